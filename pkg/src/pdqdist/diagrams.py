"""
Persistence-diagram data model, point norms, diagonal projection and file I/O.
"""

from __future__ import annotations

import csv
import io
import json
import json.decoder
import json.scanner
import logging
import math
import os
from dataclasses import dataclass
from enum import Enum
from typing import BinaryIO, Iterable, List, Optional, Tuple

import numpy as np

from .errors import DiagramValidationError, ParameterError, ParseError

logger = logging.getLogger(__name__)

CSV_HEADER = ("birth", "death")


class DiagramFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True)
class DiagramPoint:
    """A finite (birth, death) pair with death >= birth."""

    birth: float
    death: float

    def __post_init__(self):
        if not (math.isfinite(self.birth) and math.isfinite(self.death)):
            raise DiagramValidationError(
                f"non-finite coordinate in ({self.birth}, {self.death})"
            )
        if self.death < self.birth:
            raise DiagramValidationError(
                f"death {self.death} is smaller than birth {self.birth}"
            )

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    def as_tuple(self) -> Tuple[float, float]:
        return (self.birth, self.death)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Ordered multiset of diagram points; duplicates are kept."""

    points: Tuple[DiagramPoint, ...] = ()
    label: str = ""

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, float]], label: str = "") -> "PersistenceDiagram":
        return cls(tuple(DiagramPoint(float(b), float(d)) for b, d in pairs), label)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, idx: int) -> DiagramPoint:
        return self.points[idx]

    def as_array(self) -> np.ndarray:
        """Return the points as an (n, 2) float array."""
        if not self.points:
            return np.zeros((0, 2))
        return np.array([p.as_tuple() for p in self.points], dtype=float)


def diagonal_projection(x: DiagramPoint) -> DiagramPoint:
    """Nearest point of the diagonal: P(a, b) = ((a+b)/2, (a+b)/2)."""
    mid = (x.birth + x.death) / 2.0
    return DiagramPoint(mid, mid)


def _check_q(q: float) -> None:
    if not q >= 1:
        raise ParameterError(f"q must be >= 1 or inf, got {q}")


def lq_distance(a: DiagramPoint, b: DiagramPoint, q: float = math.inf) -> float:
    """
    L_q norm of a - b.

    Args:
        a: First point
        b: Second point
        q: Norm exponent, q >= 1 or math.inf for the supremum norm

    Returns:
        float: The distance

    Raises:
        ParameterError: If q < 1
    """
    _check_q(q)
    db = abs(a.birth - b.birth)
    dd = abs(a.death - b.death)
    if math.isinf(q):
        return max(db, dd)
    if q == 1:
        return db + dd
    return (db**q + dd**q) ** (1.0 / q)


def diagonal_distance(x: DiagramPoint, q: float = math.inf) -> float:
    """Distance from x to its own diagonal projection."""
    return lq_distance(x, diagonal_projection(x), q)


# ---- I/O ----


def _parse_float(text: str, line: int) -> float:
    try:
        return float(text.strip())
    except ValueError:
        raise ParseError(f"not a number: {text!r}", line) from None


def _point(b: float, d: float, line: int) -> DiagramPoint:
    try:
        return DiagramPoint(b, d)
    except DiagramValidationError as e:
        raise DiagramValidationError(f"line {line}: {e}") from None


def _load_csv(text: str, label: str) -> PersistenceDiagram:
    points: List[DiagramPoint] = []
    reader = csv.reader(io.StringIO(text))
    first = True
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 columns, got {len(row)}", line)
        # the header may only be the first non-blank row
        is_header = first and tuple(cell.strip().lower() for cell in row) == CSV_HEADER
        first = False
        if is_header:
            continue
        b = _parse_float(row[0], line)
        d = _parse_float(row[1], line)
        points.append(_point(b, d, line))
    return PersistenceDiagram(tuple(points), label)


class _LocatedList(list):
    """Decoded JSON array that remembers the offset of its opening bracket."""

    offset = 0


def _array_with_offset(s_and_end, scan_once, *args):
    values, end = json.decoder.JSONArray(s_and_end, scan_once, *args)
    located = _LocatedList(values)
    located.offset = s_and_end[1] - 1
    return located, end


def _located_decoder() -> json.JSONDecoder:
    decoder = json.JSONDecoder()
    decoder.parse_array = _array_with_offset
    decoder.scan_once = json.scanner.py_make_scanner(decoder)
    return decoder


def _line_of(text: str, node, fallback: int = 1) -> int:
    if isinstance(node, _LocatedList):
        return text.count("\n", 0, node.offset) + 1
    return fallback


def _load_json(text: str) -> PersistenceDiagram:
    try:
        data = _located_decoder().decode(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno) from None
    if not isinstance(data, dict) or not isinstance(data.get("points", []), list):
        raise ParseError("expected an object with a 'points' list", 1)
    label = data.get("label", "")
    if not isinstance(label, str):
        raise ParseError("'label' must be a string", 1)
    records = data.get("points", [])
    points: List[DiagramPoint] = []
    for k, rec in enumerate(records, start=1):
        # records that are not arrays are reported at the line of the points list
        line = _line_of(text, rec, _line_of(text, records))
        if not isinstance(rec, list) or len(rec) != 2:
            raise ParseError(f"point record {k} must be a [birth, death] pair", line)
        try:
            b, d = float(rec[0]), float(rec[1])
        except (TypeError, ValueError):
            raise ParseError(f"point record {k} is not numeric", line) from None
        points.append(_point(b, d, line))
    return PersistenceDiagram(tuple(points), label)


def load_diagram(source: BinaryIO, format: DiagramFormat = DiagramFormat.CSV, label: str = "") -> PersistenceDiagram:
    """
    Read a persistence diagram from a byte stream.

    Args:
        source: Binary stream holding CSV ("birth,death" per line, optional
            header) or JSON ({"label": ..., "points": [[b, d], ...]})
        format: Declared format of the stream
        label: Label for CSV input (JSON carries its own)

    Returns:
        PersistenceDiagram: Points in file order

    Raises:
        ParseError: Malformed row or record, with its line number
        DiagramValidationError: death < birth or a non-finite coordinate
    """
    raw = source.read()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError:
        raise ParseError("input is not UTF-8", 1) from None
    fmt = DiagramFormat(format)
    diagram = _load_json(text) if fmt == DiagramFormat.JSON else _load_csv(text, label)
    logger.debug("loaded %d points (%s)", len(diagram), fmt.value)
    return diagram


def save_diagram(diagram: PersistenceDiagram, sink: BinaryIO, format: DiagramFormat = DiagramFormat.CSV) -> None:
    """Write a diagram in the same formats load_diagram reads."""
    fmt = DiagramFormat(format)
    if fmt == DiagramFormat.JSON:
        payload = {"label": diagram.label, "points": [[p.birth, p.death] for p in diagram]}
        text = json.dumps(payload, indent=2) + "\n"
    else:
        lines = [",".join(CSV_HEADER)]
        lines += [f"{float(p.birth)!r},{float(p.death)!r}" for p in diagram]
        text = "\n".join(lines) + "\n"
    sink.write(text.encode("utf-8"))


def format_for_path(path: str) -> DiagramFormat:
    return DiagramFormat.JSON if path.lower().endswith(".json") else DiagramFormat.CSV


def read_diagram_file(path: str, format: Optional[DiagramFormat] = None) -> PersistenceDiagram:
    fmt = format or format_for_path(path)
    with open(path, "rb") as f:
        return load_diagram(f, fmt, label=os.path.splitext(os.path.basename(path))[0])

from __future__ import annotations

import csv
import io
import json
import math
from enum import Enum
from typing import Any, Dict, List, Sequence

from .exact import ExactResult
from .matchgraph import (
    FeasibilityMode,
    MatchingGraph,
    bits_string,
    check_feasibility,
    cost_table,
    graph_to_dict,
)
from .qaoa import DistanceReport
from .qsim import MixerLevel
from .verify import PropertyResult


class Mode(str, Enum):
    JSON = "json"
    CSV = "csv"
    TEXT = "text"


HISTOGRAM_COLUMNS = ("bits", "count", "cost", "strict", "relaxed")
ENUMERATE_COLUMNS = ("index", "bits", "cost", "strict", "relaxed", "movable")


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _flag(value: bool) -> str:
    return "true" if value else "false"


def _num(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def enumerate_rows(g: MatchingGraph, states: Sequence[int], movable: Dict[int, List[str]]) -> List[Dict[str, Any]]:
    """One record per listed state, shared by every renderer."""
    costs = cost_table(g)
    return [
        {
            "index": s,
            "bits": bits_string(g, s),
            "cost": float(costs[s]),
            "strict": check_feasibility(g, s, FeasibilityMode.STRICT),
            "relaxed": check_feasibility(g, s, FeasibilityMode.RELAXED),
            "movable": movable.get(s, []),
        }
        for s in states
    ]


def histogram_csv(report: DistanceReport) -> str:
    """bits,count,cost,strict,relaxed per sampled state, ascending basis index."""
    return _csv(
        HISTOGRAM_COLUMNS,
        [(h.bits, h.count, _num(h.cost), _flag(h.strict), _flag(h.relaxed)) for h in report.histogram],
    )


class Renderer:
    def exact(self, result: ExactResult) -> str: ...
    def report(self, report: DistanceReport) -> str: ...
    def graph(self, g: MatchingGraph) -> str: ...
    def enumerate(self, g: MatchingGraph, rows: List[Dict[str, Any]]) -> str: ...
    def verify(self, results: List[PropertyResult]) -> str: ...
    def tree(self, g: MatchingGraph, levels: List[MixerLevel]) -> str: ...


# ---- JSON ----
class JsonRenderer(Renderer):
    def _dump(self, payload: Any) -> str:
        return json.dumps(payload, indent=2) + "\n"

    def exact(self, result):
        return self._dump(result.to_dict())

    def report(self, report):
        return self._dump(report.to_dict())

    def graph(self, g):
        return self._dump(graph_to_dict(g))

    def enumerate(self, g, rows):
        return self._dump({"variant": g.variant.to_dict(), "n": g.n, "m": g.m, "states": rows})

    def verify(self, results):
        return self._dump(
            {"passed": all(r.passed for r in results), "properties": [r.to_dict() for r in results]}
        )

    def tree(self, g, levels):
        return self._dump(
            {
                "levels": [
                    {
                        "edge": lvl.edge,
                        "support": [
                            {"bits": bits_string(g, k), "amplitude": [a.real, a.imag]}
                            for k, a in lvl.support
                        ],
                    }
                    for lvl in levels
                ]
            }
        )


# ---- CSV ----
class CsvRenderer(Renderer):
    def exact(self, result):
        return _csv(
            ("variant", "n", "m", "optimal_cost", "distance"),
            [(result.variant.kind.value, result.n, result.m, _num(result.optimal_cost), _num(result.distance))],
        )

    def report(self, report):
        return histogram_csv(report)

    def graph(self, g):
        return _csv(
            ("bit_index", "label", "kind", "weight"),
            [(e.bit_index, e.label, e.kind.value, _num(e.weight)) for e in g.edges],
        )

    def enumerate(self, g, rows):
        return _csv(
            ENUMERATE_COLUMNS,
            [
                (r["index"], r["bits"], _num(r["cost"]), _flag(r["strict"]), _flag(r["relaxed"]), " ".join(r["movable"]))
                for r in rows
            ],
        )

    def verify(self, results):
        return _csv(("property", "passed", "detail"), [(r.name, _flag(r.passed), r.detail) for r in results])

    def tree(self, g, levels):
        rows = []
        for depth, lvl in enumerate(levels):
            for k, a in lvl.support:
                rows.append((depth, lvl.edge or "", bits_string(g, k), repr(a.real), repr(a.imag)))
        return _csv(("level", "edge", "bits", "re", "im"), rows)


# ---- Text ----
class TextRenderer(Renderer):
    def _variant(self, v) -> str:
        extra = f", c={v.c:g}" if v.is_dcp else ""
        return f"{v.kind.value} (p={v.p:g}, q={v.q:g}{extra})"

    def exact(self, result):
        kind = result.variant.kind
        return (
            f"variant:      {self._variant(result.variant)}\n"
            f"sizes:        n={result.n} m={result.m}\n"
            f"optimal cost: {result.optimal_cost:.10g}\n"
            f"distance:     {result.distance:.10g}\n"
            f"matching:     {result.matching.describe(kind)}\n"
        )

    def report(self, report):
        kind = report.variant.kind
        lines = [
            f"variant:        {self._variant(report.variant)}",
            f"qubits:         {report.qubits} ({report.rotations_per_operator} rotations per operator)",
            f"angles:         beta0={report.params.beta0:.6g} "
            + " ".join(f"(gamma={g:.6g}, beta={b:.6g})" for g, b in report.params.layers),
            f"expected cost:  {report.expected_cost:.10g}",
        ]
        if report.swapped:
            lines.append("(inputs swapped so that n <= m; bits and matchings use the swapped order)")
        if report.best is not None:
            lines.append(
                f"best sampled:   {report.best.bits} cost={report.best.cost:.10g} "
                f"distance={report.best.distance:.10g} [{report.best.matching.describe(kind)}]"
            )
        lines.append(f"most frequent:  {report.most_frequent.bits} ({report.most_frequent.count} shots)")
        if report.exact is not None:
            lines.append(f"exact distance: {report.exact.distance:.10g}")
        return "\n".join(lines) + "\n"

    def graph(self, g):
        lines = [f"{self._variant(g.variant)} graph: n={g.n} m={g.m} qubits={g.num_qubits}"]
        if g.swapped:
            lines.append("(inputs swapped so that n <= m)")
        lines += [f"  bit {e.bit_index:>2}  {e.label:<12} w={e.weight:.10g}" for e in g.edges]
        return "\n".join(lines) + "\n"

    def enumerate(self, g, rows):
        lines = [f"{len(rows)} states"]
        for r in rows:
            tag = "strict" if r["strict"] else "relaxed"
            moves = " ".join(r["movable"])
            lines.append(f"  |{r['index']}> {r['bits']}  cost={r['cost']:.10g}  {tag}  {moves}".rstrip())
        return "\n".join(lines) + "\n"

    def verify(self, results):
        lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}" for r in results]
        return "\n".join(lines) + "\n"

    def tree(self, g, levels):
        lines = []
        for depth, lvl in enumerate(levels):
            lines.append(f"[{depth}] {lvl.edge or 'initial'}")
            for k, a in lvl.support:
                lines.append(f"    {bits_string(g, k)}  {a.real:+.6f}{a.imag:+.6f}i")
        return "\n".join(lines) + "\n"


def make_renderer(mode: Mode) -> Renderer:
    mode = Mode(mode)
    if mode == Mode.CSV:
        return CsvRenderer()
    if mode == Mode.TEXT:
        return TextRenderer()
    return JsonRenderer()

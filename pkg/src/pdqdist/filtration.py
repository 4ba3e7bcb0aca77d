"""
Small Vietoris-Rips persistence generator used to produce example diagrams.

Only dimensions 0 and 1 are computed. The filtration is reduced with the
plain column algorithm over Z/2, which is plenty for a few hundred points.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from typing import BinaryIO, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .config import Limits, resolve_limits
from .diagrams import PersistenceDiagram
from .errors import CapacityError, ParameterError, ParseError

logger = logging.getLogger(__name__)

Simplex = Tuple[int, ...]


@dataclass(frozen=True)
class PointCloud:
    """Finite set of 2D points."""

    points: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        for x, y in self.points:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ParameterError(f"non-finite coordinate ({x}, {y}) in point cloud")

    @classmethod
    def from_array(cls, arr) -> "PointCloud":
        arr = np.asarray(arr, dtype=float).reshape(-1, 2)
        return cls(tuple((float(x), float(y)) for x, y in arr))

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, 2))
        return np.array(self.points, dtype=float)

    def union(self, other: "PointCloud") -> "PointCloud":
        return PointCloud(self.points + other.points)


def sample_circle(
    center: Tuple[float, float],
    radius: float,
    count: int,
    noise_sd: float = 0.0,
    seed: int = 0,
) -> PointCloud:
    """
    Sample points at uniformly spaced angles on a circle.

    Args:
        center: Circle center (x, y)
        radius: Circle radius, must be positive
        count: Number of points, angle k is 2*pi*k/count
        noise_sd: Standard deviation of the Gaussian offset per coordinate
        seed: Seed for the PCG64 generator

    Returns:
        PointCloud: The sampled points

    Raises:
        ParameterError: If radius <= 0, count < 1 or noise_sd < 0
    """
    if not radius > 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    if count < 1:
        raise ParameterError(f"count must be at least 1, got {count}")
    if noise_sd < 0:
        raise ParameterError(f"noise_sd must be non-negative, got {noise_sd}")
    angles = 2.0 * np.pi * np.arange(count) / count
    pts = np.column_stack(
        (center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles))
    )
    if noise_sd > 0:
        rng = np.random.Generator(np.random.PCG64(seed))
        pts = pts + rng.normal(0.0, noise_sd, size=pts.shape)
    return PointCloud.from_array(pts)


def sample_clusters(
    centers: Sequence[Tuple[float, float]],
    count: int,
    spread: float,
    seed: int = 0,
) -> PointCloud:
    """
    Gaussian blobs of count points around each center, drawn center by center
    from one PCG64 stream.

    Raises:
        ParameterError: If centers is empty, count < 1 or spread < 0
    """
    if not centers:
        raise ParameterError("at least one cluster center is required")
    if count < 1:
        raise ParameterError(f"count must be at least 1, got {count}")
    if spread < 0:
        raise ParameterError(f"spread must be non-negative, got {spread}")
    rng = np.random.Generator(np.random.PCG64(seed))
    blobs = [rng.normal(loc=c, scale=spread, size=(count, 2)) for c in np.asarray(centers, dtype=float)]
    return PointCloud.from_array(np.vstack(blobs))


# ---- filtration ----


def _rips_simplices(dist: np.ndarray, max_dim: int, max_scale: float) -> List[Tuple[float, int, Simplex]]:
    n = dist.shape[0]
    simplices: List[Tuple[float, int, Simplex]] = [(0.0, 0, (i,)) for i in range(n)]
    adj = dist <= max_scale
    np.fill_diagonal(adj, False)
    for i in range(n):
        for j in np.nonzero(adj[i, i + 1 :])[0] + i + 1:
            simplices.append((float(dist[i, j]), 1, (i, int(j))))
            if max_dim < 1:
                continue
            common = np.nonzero(adj[i, j + 1 :] & adj[j, j + 1 :])[0] + j + 1
            for k in common:
                value = max(dist[i, j], dist[i, k], dist[j, k])
                simplices.append((float(value), 2, (i, int(j), int(k))))
    # filtration value, then dimension, then lexicographic vertices
    simplices.sort()
    return simplices


def _faces(simplex: Simplex) -> List[Simplex]:
    if len(simplex) == 1:
        return []
    return [simplex[:k] + simplex[k + 1 :] for k in range(len(simplex))]


def _reduce(simplices: Sequence[Tuple[float, int, Simplex]]) -> List[Tuple[int, int]]:
    """Column reduction over Z/2; returns (birth column, death column) pairs."""
    index = {s[2]: k for k, s in enumerate(simplices)}
    reduced: Dict[int, Set[int]] = {}
    pivot_of: Dict[int, int] = {}
    pairs: List[Tuple[int, int]] = []
    for j, (_, _, simplex) in enumerate(simplices):
        col = {index[f] for f in _faces(simplex)}
        while col:
            low = max(col)
            if low not in pivot_of:
                pivot_of[low] = j
                reduced[j] = col
                pairs.append((low, j))
                break
            col ^= reduced[pivot_of[low]]
    return pairs


def vietoris_rips_persistence(
    cloud: PointCloud,
    max_dim: int = 1,
    max_scale: float = 4.0,
    min_persistence: float = 0.0,
    limits: Optional[Limits] = None,
) -> Dict[int, PersistenceDiagram]:
    """
    Persistence diagrams of the Rips filtration of a 2D cloud up to max_scale.

    Dimension-0 pairs keep zero persistence so their count equals the number
    of merges. Higher-dimensional pairs must persist longer than
    min_persistence. Classes still alive at max_scale are dropped.

    Returns:
        dict: {dimension: PersistenceDiagram}, points sorted by (birth, death)

    Raises:
        ParameterError: Empty cloud, max_dim outside {0, 1} or max_scale <= 0
        CapacityError: Cloud larger than limits.cloud_cap
    """
    limits = resolve_limits(limits)
    if len(cloud) == 0:
        raise ParameterError("point cloud is empty")
    if max_dim not in (0, 1):
        raise ParameterError(f"max_dim must be 0 or 1, got {max_dim}")
    if not max_scale > 0:
        raise ParameterError(f"max_scale must be positive, got {max_scale}")
    if min_persistence < 0:
        raise ParameterError(f"min_persistence must be non-negative, got {min_persistence}")
    if len(cloud) > limits.cloud_cap:
        raise CapacityError(f"cloud has {len(cloud)} points, cap is {limits.cloud_cap}")

    pts = cloud.as_array()
    dist = squareform(pdist(pts)) if len(pts) > 1 else np.zeros((1, 1))
    simplices = _rips_simplices(dist, max_dim, max_scale)
    logger.debug("rips filtration: %d points, %d simplices", len(pts), len(simplices))

    found: Dict[int, List[Tuple[float, float]]] = {d: [] for d in range(max_dim + 1)}
    for birth_col, death_col in _reduce(simplices):
        birth, dim, _ = simplices[birth_col]
        death = simplices[death_col][0]
        if dim > max_dim:
            continue
        if dim >= 1 and not death - birth > min_persistence:
            continue
        found[dim].append((birth, death))

    diagrams = {
        dim: PersistenceDiagram.from_pairs(sorted(pairs), label=f"H{dim}")
        for dim, pairs in found.items()
    }
    logger.info(
        "rips persistence: %s",
        ", ".join(f"H{d}={len(g)}" for d, g in diagrams.items()),
    )
    return diagrams


# ---- cloud I/O ----


def load_cloud(source: BinaryIO) -> PointCloud:
    """Read a CSV cloud, one "x,y" row per point, optional "x,y" header."""
    try:
        text = source.read().decode("utf-8-sig")
    except UnicodeDecodeError:
        raise ParseError("input is not UTF-8", 1) from None
    points: List[Tuple[float, float]] = []
    reader = csv.reader(io.StringIO(text))
    first = True
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 columns, got {len(row)}", line)
        is_header = first and [c.strip().lower() for c in row] == ["x", "y"]
        first = False
        if is_header:
            continue
        try:
            x, y = float(row[0]), float(row[1])
        except ValueError:
            raise ParseError(f"not a number in {row!r}", line) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError("non-finite coordinate", line)
        points.append((x, y))
    return PointCloud(tuple(points))


def save_cloud(cloud: PointCloud, sink: BinaryIO) -> None:
    lines = ["x,y"] + [f"{float(x)!r},{float(y)!r}" for x, y in cloud.points]
    sink.write(("\n".join(lines) + "\n").encode("utf-8"))


# ---- reference data ----

REFERENCE_MAX_SCALE = 4.0
REFERENCE_MIN_PERSISTENCE = 0.1
REFERENCE_NOISE_SD = 0.02


@dataclass(frozen=True)
class CircleSpec:
    center: Tuple[float, float]
    radius: float
    count: int
    seed: int


@dataclass(frozen=True)
class ClusterSpec:
    centers: Tuple[Tuple[float, float], ...]
    count: int
    spread: float
    seed: int


# The small circle is shared by both clouds of a pair with the same seed, so
# its features coincide. The 8-point loops stand in for the noise feature each
# noisy cloud gains; they use different seeds and so differ slightly.
_SMALL_CIRCLE = CircleSpec((0.0, 0.0), 0.5, 32, seed=7)
_LARGE_CIRCLE = CircleSpec((10.0, 0.0), 0.8, 32, seed=11)
_NOISE_LOOP_ONE = CircleSpec((0.0, 10.0), 0.25, 8, seed=13)
_NOISE_LOOP_TWO = CircleSpec((10.0, 10.0), 0.25, 8, seed=17)

REFERENCE_LAYOUT: Dict[str, Tuple[Tuple[CircleSpec, ...], float]] = {
    "clean-one-circle": ((_SMALL_CIRCLE,), 0.0),
    "clean-two-circles": ((_SMALL_CIRCLE, _LARGE_CIRCLE), 0.0),
    "noisy-one-circle": ((_SMALL_CIRCLE, _NOISE_LOOP_ONE), REFERENCE_NOISE_SD),
    "noisy-two-circles": ((_SMALL_CIRCLE, _LARGE_CIRCLE, _NOISE_LOOP_TWO), REFERENCE_NOISE_SD),
}

FIVE_CLUSTERS = ClusterSpec(
    centers=((0.0, 0.0), (2.0, 0.3), (4.0, 0.0), (1.0, 2.0), (3.2, 2.2)),
    count=12,
    spread=0.1,
    seed=23,
)

# Homology dimension reported for each reference cloud; circles default to 1.
REFERENCE_DIMENSION: Dict[str, int] = {"five-clusters": 0}


def reference_clouds() -> Dict[str, PointCloud]:
    """The seeded reference clouds, keyed by name."""
    clouds: Dict[str, PointCloud] = {}
    for name, (circles, noise) in REFERENCE_LAYOUT.items():
        cloud = PointCloud()
        for c in circles:
            cloud = cloud.union(sample_circle(c.center, c.radius, c.count, noise, c.seed))
        clouds[name] = cloud
    clusters = FIVE_CLUSTERS
    clouds["five-clusters"] = sample_clusters(clusters.centers, clusters.count, clusters.spread, clusters.seed)
    return clouds


def reference_diagrams(limits: Optional[Limits] = None) -> Dict[str, PersistenceDiagram]:
    """
    Diagrams of the reference clouds, labelled by cloud name.

    Circle clouds give their dimension-1 diagram with points in increasing
    persistence; the cluster cloud gives its dimension-0 diagram.
    """
    out: Dict[str, PersistenceDiagram] = {}
    for name, cloud in reference_clouds().items():
        dim = REFERENCE_DIMENSION.get(name, 1)
        diagram = vietoris_rips_persistence(
            cloud,
            max_dim=dim,
            max_scale=REFERENCE_MAX_SCALE,
            min_persistence=REFERENCE_MIN_PERSISTENCE,
            limits=limits,
        )[dim]
        points = sorted(diagram.points, key=lambda p: (p.persistence, p.birth))
        out[name] = PersistenceDiagram(tuple(points), label=name)
    return out

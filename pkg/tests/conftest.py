"""Shared fixtures: the running example and seeded random diagram pairs."""

import numpy as np
import pytest

from pdqdist.config import Limits
from pdqdist.diagrams import PersistenceDiagram, save_diagram
from pdqdist.matchgraph import Variant, build_graph

E1_C = 0.2


@pytest.fixture
def e1_d1():
    return PersistenceDiagram.from_pairs([(0.0, 1.0)], label="d1")


@pytest.fixture
def e1_d2():
    return PersistenceDiagram.from_pairs([(0.0, 1.0), (0.0, 3.0)], label="d2")


@pytest.fixture
def wasserstein():
    return Variant.wasserstein(p=2.0)


@pytest.fixture
def dcp():
    return Variant.dcp(E1_C, p=2.0)


@pytest.fixture
def limits():
    return Limits()


@pytest.fixture
def w_graph(e1_d1, e1_d2, wasserstein, limits):
    return build_graph(e1_d1, e1_d2, wasserstein, limits)


@pytest.fixture
def dcp_graph(e1_d1, e1_d2, dcp, limits):
    return build_graph(e1_d1, e1_d2, dcp, limits)


def random_diagram(rng: np.random.Generator, size: int) -> PersistenceDiagram:
    births = rng.uniform(0.0, 2.0, size)
    lives = rng.uniform(0.05, 2.0, size)
    return PersistenceDiagram.from_pairs(zip(births, births + lives))


@pytest.fixture
def random_pair():
    """Factory: random_pair(n, m, seed) -> (d1, d2)."""

    def make(n: int, m: int, seed: int):
        rng = np.random.Generator(np.random.PCG64(seed))
        return random_diagram(rng, n), random_diagram(rng, m)

    return make


@pytest.fixture
def e1_files(tmp_path, e1_d1, e1_d2):
    """E1 diagrams written as CSV files; returns (path1, path2)."""
    paths = []
    for name, diagram in (("d1.csv", e1_d1), ("d2.csv", e1_d2)):
        path = tmp_path / name
        with open(path, "wb") as f:
            save_diagram(diagram, f)
        paths.append(str(path))
    return tuple(paths)

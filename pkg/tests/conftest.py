"""
Fixtures compartidas por las pruebas de topomap.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Agregar la raíz del proyecto al path para importar el paquete src
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.graph_core import Graph
from src.topology import ProcessorGraph, all_pairs_time, build_custom, build_grid


def path_graph(n: int, weights=None) -> Graph:
    weights = weights if weights is not None else [1.0] * (n - 1)
    return Graph.from_edges(n, [(i, i + 1, w) for i, w in enumerate(weights)])


def random_connected_graph(rng: np.random.Generator, n: int, extra: int,
                           weights=(1.0, 2.0, 4.0)) -> Graph:
    """Árbol aleatorio más `extra` aristas, con pesos tomados de `weights`."""
    edges = {}
    for v in range(1, n):
        u = int(rng.integers(v))
        edges[(u, v)] = float(rng.choice(weights))
    attempts = 0
    while extra > 0 and attempts < 50 * (extra + 1):
        attempts += 1
        u, v = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
        if (u, v) not in edges:
            edges[(u, v)] = float(rng.choice(weights))
            extra -= 1
    return Graph.from_edges(n, [(u, v, w) for (u, v), w in edges.items()])


@pytest.fixture
def path3() -> Graph:
    return path_graph(3)


@pytest.fixture
def path4() -> Graph:
    return path_graph(4)


@pytest.fixture
def weighted_path3() -> Graph:
    """G_c 0–1 (w=2), 1–2 (w=1)."""
    return path_graph(3, [2.0, 1.0])


@pytest.fixture
def star4() -> Graph:
    """Estrella con centro 0 y hojas 1, 2, 3 de pesos 3, 2, 1."""
    return Graph.from_edges(4, [(0, 1, 3.0), (0, 2, 2.0), (0, 3, 1.0)])


@pytest.fixture
def cycle4() -> Graph:
    return Graph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)])


@pytest.fixture
def two_triangles() -> Graph:
    return Graph.from_edges(6, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0),
                                (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0), (2, 3, 1.0)])


@pytest.fixture
def grid2x2() -> ProcessorGraph:
    return build_grid([2, 2])


@pytest.fixture
def path_topology3() -> ProcessorGraph:
    return build_custom(path_graph(3))


@pytest.fixture
def path_topology4() -> ProcessorGraph:
    return build_custom(path_graph(4))


@pytest.fixture
def tm_grid2x2(grid2x2):
    return all_pairs_time(grid2x2)


@pytest.fixture
def tm_path3(path_topology3):
    return all_pairs_time(path_topology3)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def graph_factory():
    """Acceso a los constructores auxiliares desde las pruebas."""
    return {"path": path_graph, "random_connected": random_connected_graph}

"""
Pruebas de la bisección balanceada (crecimiento BFS + refinamiento FM).
"""

import itertools
import logging

import numpy as np
import pytest

from src.bisection import Bisection, BisectionError, bisect, cut_weight
from src.graph_core import Graph

logger = logging.getLogger(__name__)


def _grid(side: int) -> Graph:
    edges = []
    for r in range(side):
        for c in range(side):
            v = r * side + c
            if c + 1 < side:
                edges.append((v, v + 1, 1.0))
            if r + 1 < side:
                edges.append((v, v + side, 1.0))
    return Graph.from_edges(side * side, edges)


def _cycle(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n, 1.0) for i in range(n)])


def _complete(n: int) -> Graph:
    return Graph.from_edges(n, [(u, v, 1.0) for u, v in itertools.combinations(range(n), 2)])


def _optimal_cut(g: Graph, size0: int) -> float:
    best = float("inf")
    for chosen in itertools.combinations(range(g.n), size0):
        side = np.ones(g.n, dtype=np.int8)
        side[list(chosen)] = 0
        best = min(best, cut_weight(g, side))
    return best


class TestCutWeight:

    def test_camino(self, path4):
        assert cut_weight(path4, np.array([0, 0, 1, 1])) == 1.0
        assert cut_weight(path4, np.array([0, 1, 0, 1])) == 3.0

    def test_pesos(self, weighted_path3):
        assert cut_weight(weighted_path3, np.array([0, 1, 1])) == 2.0


class TestBisect:

    def test_camino(self, path4):
        result = bisect(path4)
        assert result.cut_weight == 1.0
        assert result.sizes == (2, 2)
        assert result.members(0) == [0, 1]

    def test_completo(self):
        assert bisect(_complete(4)).cut_weight == 4.0

    def test_dos_triangulos(self, two_triangles):
        result = bisect(two_triangles)
        assert result.cut_weight == 1.0
        assert {frozenset(result.members(0)), frozenset(result.members(1))} == {
            frozenset({0, 1, 2}), frozenset({3, 4, 5})}

    def test_no_conexo(self):
        g = Graph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
        result = bisect(g)
        assert result.sizes == (2, 2)
        assert result.cut_weight == 0.0

    @pytest.mark.parametrize("n", [2, 3, 7, 10, 31])
    def test_balance_por_defecto(self, n, rng, graph_factory):
        g = graph_factory["random_connected"](rng, n, n)
        result = bisect(g, seed=3)
        assert result.sizes == ((n + 1) // 2, n // 2)

    def test_tamano_explicito(self, rng, graph_factory):
        g = graph_factory["random_connected"](rng, 12, 8)
        assert bisect(g, size0=4).sizes == (4, 8)

    def test_corte_recalculado(self, graph_factory):
        rng = np.random.default_rng(21)
        for _ in range(30):
            n = int(rng.integers(2, 40))
            g = graph_factory["random_connected"](rng, n, int(rng.integers(0, 2 * n)))
            result = bisect(g, seed=int(rng.integers(1000)))
            assert result.cut_weight == cut_weight(g, result.side)

    def test_determinista(self, rng, graph_factory):
        g = graph_factory["random_connected"](rng, 25, 20)
        a = bisect(g, seed=5)
        b = bisect(g, seed=5)
        assert np.array_equal(a.side, b.side)

    @pytest.mark.parametrize("g", [_cycle(6), _cycle(9), _grid(4), _complete(6),
                                   Graph.from_edges(7, [(i, i + 1, 1.0) for i in range(6)])],
                             ids=["c6", "c9", "malla4x4", "k6", "camino7"])
    def test_a_lo_sumo_el_doble_del_optimo(self, g):
        size0 = (g.n + 1) // 2
        assert bisect(g).cut_weight <= 2 * _optimal_cut(g, size0)

    def test_grafo_pequeno(self):
        with pytest.raises(BisectionError):
            bisect(Graph([[]]))

    @pytest.mark.parametrize("size0", [0, 4])
    def test_tamano_invalido(self, path4, size0):
        with pytest.raises(BisectionError):
            bisect(path4, size0=size0)

    @pytest.mark.regression
    def test_optimo_lejos_del_primer_extremo(self):
        # Desde el extremo 3 el lado 0 crece sobre {3, 2, 0} y corta dos aristas
        # pesadas; arrancar desde el otro extremo o crecer el lado 1 da el óptimo
        g = Graph.from_edges(5, [(0, 1, 4.0), (0, 2, 1.0), (0, 4, 4.0), (1, 4, 4.0), (2, 3, 1.0)])
        result = bisect(g, seed=61)
        assert result.sizes == (3, 2)
        assert result.cut_weight == 1.0

    @pytest.mark.regression
    def test_a_lo_sumo_el_doble_en_grafos_aleatorios(self, graph_factory):
        rng = np.random.default_rng(2024)
        failures = []
        for case in range(200):
            n = int(rng.integers(2, 13))
            g = graph_factory["random_connected"](rng, n, int(rng.integers(0, n + 1)))
            seed = int(rng.integers(1000))
            size0 = (n + 1) // 2
            got = bisect(g, seed=seed).cut_weight
            optimum = _optimal_cut(g, size0)
            if got > 2 * optimum:
                logger.warning(f"Caso {case}: n={n}, semilla {seed}, corte {got} > 2 x {optimum}, "
                               f"aristas {[(r.u, r.v, w) for r, w in g.iter_edges()]}")
                failures.append(case)
        assert len(failures) <= 3, f"casos por encima del doble del óptimo: {failures}"


class TestBisectWeighted:
    """Balance por peso de vértice."""

    @pytest.fixture
    def heavy_path(self, graph_factory):
        g = graph_factory["path"](6)
        return Graph(g.edges, [3.0, 3.0, 1.0, 1.0, 1.0, 1.0])

    @pytest.mark.regression
    def test_balance_por_peso(self, heavy_path):
        result = bisect(heavy_path)
        weights = np.asarray(heavy_path.vertex_weights)
        assert weights[result.side == 0].sum() == 5.0
        assert result.members(0) == [0, 2, 3]
        assert result.cut_weight == cut_weight(heavy_path, result.side)

    def test_balance_por_numero(self, heavy_path):
        result = bisect(heavy_path, by_weight=False)
        assert result.sizes == (3, 3)
        assert result.members(0) == [0, 1, 2]
        assert result.cut_weight == 1.0

    def test_objetivo_fraccionario(self):
        g = Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)], vertex_weights=[0.5, 1.0, 0.5])
        result = bisect(g)
        weights = np.asarray(g.vertex_weights)
        assert weights[result.side == 0].sum() <= 1.0

    def test_objetivo_igual_al_total(self, heavy_path):
        with pytest.raises(BisectionError):
            bisect(heavy_path, size0=10.0)


class TestBisectionResult:

    def test_miembros_y_tamanos(self):
        b = Bisection(side=np.array([0, 1, 1, 0], dtype=np.int8), cut_weight=2.0)
        assert b.sizes == (2, 2)
        assert b.members(1) == [1, 2]

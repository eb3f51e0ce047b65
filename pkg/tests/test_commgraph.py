"""
Pruebas del grafo de comunicación, métricas de partición y particionadores.
"""

import numpy as np
import pytest

from src.commgraph import (
    Partition,
    PartitionError,
    build_comm_graph,
    check_balance,
    edge_cut,
    mcv,
    ordering_partition,
    parse_partition,
    partition_from_ordering,
    partition_quality,
    read_partition,
    simple_partition,
    write_partition,
    write_partition_file,
)
from src.graph_core import Graph


@pytest.fixture
def path6(graph_factory):
    return graph_factory["path"](6)


@pytest.fixture
def path6_three_blocks():
    return Partition(np.array([0, 0, 1, 1, 2, 2]), 3)


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [(0, 1, 2.0), (1, 2, 3.0), (0, 2, 5.0)])


def _mcv_oracle(g_a: Graph, p: Partition) -> int:
    """Evaluación directa de la fórmula con conjuntos."""
    per_block = [0] * p.k
    for v in range(g_a.n):
        mine = p.assignment[v]
        foreign = {int(p.assignment[u]) for u, _ in g_a.neighbors(v) if p.assignment[u] != mine}
        per_block[mine] += len(foreign)
    return max(per_block) if p.k > 1 else 0


def _random_partition(rng, n, k):
    assignment = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
    rng.shuffle(assignment)
    return Partition(assignment, k)


class TestPartition:

    def test_bloque_vacio(self):
        with pytest.raises(PartitionError, match="vacíos"):
            Partition(np.array([0, 0, 2]), 3)

    def test_bloque_fuera_de_rango(self):
        with pytest.raises(PartitionError, match="vértice 1"):
            Partition(np.array([0, 3, 1]), 3)

    @pytest.mark.parametrize("k,epsilon", [(0, 0.0), (2, -0.1)])
    def test_parametros_invalidos(self, k, epsilon):
        with pytest.raises(PartitionError):
            Partition(np.array([0, 1]), k, epsilon)

    def test_bloques(self, path6_three_blocks):
        assert path6_three_blocks.blocks() == [[0, 1], [2, 3], [4, 5]]
        assert path6_three_blocks.block_sizes.tolist() == [2, 2, 2]

    def test_longitud_distinta_al_grafo(self, path4, path6_three_blocks):
        with pytest.raises(PartitionError):
            build_comm_graph(path4, path6_three_blocks)


class TestBuildCommGraph:

    def test_camino_en_tres_bloques(self, path6, path6_three_blocks):
        g_c = build_comm_graph(path6, path6_three_blocks)
        assert g_c == Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])

    def test_un_bloque(self, path6):
        g_c = build_comm_graph(path6, Partition(np.zeros(6, dtype=int), 1))
        assert g_c.n == 1 and g_c.num_edges == 0

    def test_triangulo_identidad(self, triangle):
        assert build_comm_graph(triangle, Partition(np.arange(3), 3)) == triangle

    def test_aristas_paralelas_se_suman(self):
        g = Graph.from_edges(4, [(0, 2, 1.0), (0, 3, 2.0), (1, 3, 4.0)])
        g_c = build_comm_graph(g, Partition(np.array([0, 0, 1, 1]), 2))
        assert g_c.edge_weight(0, 1) == 7.0

    def test_invariante_a_renumeracion_dentro_de_bloques(self, path6):
        # intercambiar 2 y 3 (mismo bloque) no cambia G_c
        swapped = Graph.from_edges(6, [(0, 1, 1.0), (1, 3, 1.0), (3, 2, 1.0), (2, 4, 1.0), (4, 5, 1.0)])
        p = Partition(np.array([0, 0, 1, 1, 2, 2]), 3)
        assert build_comm_graph(path6, p) == build_comm_graph(swapped, p)

    def test_suma_de_pesos_igual_al_corte(self, graph_factory):
        rng = np.random.default_rng(2024)
        for _ in range(500):
            n = int(rng.integers(2, 30))
            k = int(rng.integers(1, n + 1))
            g = graph_factory["random_connected"](rng, n, int(rng.integers(0, n)), weights=(1.0, 2.0, 3.0, 7.0))
            p = _random_partition(rng, n, k)
            g_c = build_comm_graph(g, p)
            assert sum(w for _, w in g_c.iter_edges()) == edge_cut(g, p)


class TestEdgeCut:

    def test_camino(self, path6, path6_three_blocks):
        assert edge_cut(path6, path6_three_blocks) == 2.0

    def test_un_bloque(self, path6):
        assert edge_cut(path6, Partition(np.zeros(6, dtype=int), 1)) == 0.0

    def test_triangulo_identidad(self, triangle):
        assert edge_cut(triangle, Partition(np.arange(3), 3)) == 10.0


class TestMcv:

    def test_camino(self, path6, path6_three_blocks):
        assert mcv(path6, path6_three_blocks) == 2

    def test_un_bloque(self, path6):
        assert mcv(path6, Partition(np.zeros(6, dtype=int), 1)) == 0

    def test_estrella(self, star4):
        assert mcv(star4, Partition(np.arange(4), 4)) == 3

    def test_oraculo_de_conjuntos(self, graph_factory):
        rng = np.random.default_rng(99)
        for _ in range(500):
            n = int(rng.integers(2, 30))
            k = int(rng.integers(1, n + 1))
            g = graph_factory["random_connected"](rng, n, int(rng.integers(0, 2 * n)))
            p = _random_partition(rng, n, k)
            value = mcv(g, p)
            assert value == _mcv_oracle(g, p)
            # cota inferior: bloques ajenos distintos vistos desde un solo vértice
            for v in range(n):
                seen = {int(p.assignment[u]) for u, _ in g.neighbors(v)} - {int(p.assignment[v])}
                assert value >= len(seen)


class TestBalance:

    def test_balanceada(self, path6, path6_three_blocks):
        report = check_balance(path6, path6_three_blocks)
        assert report.balanced
        assert report.limit == 2.0
        assert report.imbalance == 0.0

    def test_desbalance_genera_advertencia(self, path6, caplog):
        p = Partition(np.array([0, 0, 0, 0, 1, 2]), 3, epsilon=0.5)
        with caplog.at_level("WARNING"):
            report = check_balance(path6, p)
        assert not report.balanced
        assert report.max_block_weight == 4.0
        assert report.imbalance == pytest.approx(1.0)
        assert "desbalanceada" in caplog.text

    def test_epsilon_tolera(self, path6):
        p = Partition(np.array([0, 0, 0, 1, 1, 2]), 3, epsilon=0.5)
        assert check_balance(path6, p).balanced

    def test_pesos_de_vertice(self):
        g = Graph([[(1, 1.0)], [(0, 1.0)]], vertex_weights=[3.0, 1.0])
        report = check_balance(g, Partition(np.array([0, 1]), 2))
        assert report.max_block_weight == 3.0
        assert not report.balanced


class TestPartitionFromOrdering:

    def test_identidad_n6_k3(self, path6):
        p = partition_from_ordering(path6, list(range(6)), 3)
        assert p.blocks() == [[0, 1], [2, 3], [4, 5]]

    def test_n5_k2(self, graph_factory):
        p = partition_from_ordering(graph_factory["path"](5), list(range(5)), 2)
        assert p.block_sizes.tolist() == [3, 2]

    def test_n7_invertido(self, graph_factory):
        p = partition_from_ordering(graph_factory["path"](7), list(range(6, -1, -1)), 3)
        assert p.assignment[6] == 0

    def test_tamanos_difieren_a_lo_sumo_en_uno(self, rng, graph_factory):
        for n in range(1, 40):
            g = graph_factory["path"](n) if n > 1 else Graph([[]])
            order = rng.permutation(n)
            for k in range(1, n + 1):
                sizes = partition_from_ordering(g, order, k).block_sizes
                assert sizes.max() - sizes.min() <= 1

    @pytest.mark.parametrize("order,k", [([0, 1, 1, 3], 2), ([0, 1, 2], 2), ([0, 1, 2, 3], 5)])
    def test_invalidos(self, path4, order, k):
        with pytest.raises(PartitionError):
            partition_from_ordering(path4, order, k)


class TestSimplePartition:

    def test_k1(self, path6):
        assert simple_partition(path6, 1).assignment.tolist() == [0] * 6

    def test_camino_k2(self, path4):
        p = simple_partition(path4, 2)
        assert p.blocks() == [[0, 1], [2, 3]]
        assert edge_cut(path4, p) == 1.0

    def test_k_igual_a_n(self, rng, graph_factory):
        g = graph_factory["random_connected"](rng, 9, 5)
        p = simple_partition(g, 9, seed=1)
        assert sorted(p.assignment.tolist()) == list(range(9))

    def test_k_mayor_que_n(self, path4):
        with pytest.raises(PartitionError):
            simple_partition(path4, 5)

    @pytest.mark.parametrize("k", [2, 3, 5, 8, 13])
    def test_tamanos_balanceados(self, k, rng, graph_factory):
        g = graph_factory["random_connected"](rng, 64, 40)
        p = simple_partition(g, k, seed=4)
        sizes = p.block_sizes
        assert sizes.max() - sizes.min() <= 1
        assert check_balance(g, p).balanced

    def test_determinista(self, rng, graph_factory):
        g = graph_factory["random_connected"](rng, 40, 30)
        a = simple_partition(g, 6, seed=8)
        b = simple_partition(g, 6, seed=8)
        assert np.array_equal(a.assignment, b.assignment)

    @pytest.mark.regression
    def test_balance_por_peso_de_vertice(self, path6):
        g = Graph(path6.edges, [3.0, 3.0, 1.0, 1.0, 1.0, 1.0])
        p = simple_partition(g, 2)
        report = check_balance(g, p)
        assert report.max_block_weight == 5.0
        assert report.balanced
        assert p.assignment.tolist() == [0, 1, 0, 0, 1, 1]

    def test_peso_concentrado_recurre_a_conteo(self, graph_factory):
        # Por peso el vértice 0 solo no puede cubrir dos bloques: se reparte por número
        g = Graph(graph_factory["path"](3).edges, [10.0, 1.0, 1.0])
        assert simple_partition(g, 3).assignment.tolist() == [0, 1, 2]


class TestSimplePartitionLattice:
    """Numeración de bloques sobre una malla de procesadores."""

    @pytest.mark.regression
    def test_camino_sobre_malla_2x4(self, graph_factory):
        g = graph_factory["path"](8)
        assert simple_partition(g, 8).assignment.tolist() == list(range(8))
        assert simple_partition(g, 8, dims=(2, 4)).assignment.tolist() == [0, 1, 4, 5, 2, 3, 6, 7]

    @pytest.mark.regression
    def test_cuadrantes_de_malla(self):
        edges = []
        for r in range(4):
            for c in range(4):
                v = 4 * r + c
                if c < 3:
                    edges.append((v, v + 1, 1.0))
                if r < 3:
                    edges.append((v, v + 4, 1.0))
        g = Graph.from_edges(16, edges)
        p = simple_partition(g, 4, dims=(2, 2))
        assert p.assignment.reshape(4, 4).tolist() == [
            [0, 0, 1, 1], [0, 0, 1, 1], [2, 2, 3, 3], [2, 2, 3, 3]]
        assert edge_cut(g, p) == 8.0

    def test_una_dimension_equivale_al_orden_de_arbol(self, rng, graph_factory):
        g = graph_factory["random_connected"](rng, 30, 15)
        a = simple_partition(g, 5, seed=3)
        b = simple_partition(g, 5, seed=3, dims=[5])
        assert np.array_equal(a.assignment, b.assignment)

    def test_malla_incompatible(self, path4):
        with pytest.raises(PartitionError):
            simple_partition(path4, 4, dims=(3, 2))


class TestOrderingPartition:

    def test_tamanos(self, rng, graph_factory):
        g = graph_factory["random_connected"](rng, 30, 10)
        p = ordering_partition(g, 4, seed=2)
        assert sorted(p.block_sizes.tolist()) == [7, 7, 8, 8]

    def test_determinista(self, rng, graph_factory):
        g = graph_factory["random_connected"](rng, 30, 10)
        assert np.array_equal(ordering_partition(g, 5, seed=3).assignment,
                              ordering_partition(g, 5, seed=3).assignment)


class TestPartitionQuality:

    def test_camino(self, path6, path6_three_blocks):
        quality = partition_quality(path6, path6_three_blocks, seconds=0.25)
        assert quality.edge_cut == 2.0
        assert quality.mcv == 2
        assert quality.balance == 0.0
        assert quality.time == 0.25


class TestPartitionFiles:

    def test_parse(self):
        p = parse_partition("0\n1\n1\n2\n")
        assert p.k == 3
        assert p.assignment.tolist() == [0, 1, 1, 2]

    def test_parse_bytes_con_k(self):
        p = parse_partition(b"1\n0\n", k=2, epsilon=0.03)
        assert p.k == 2 and p.epsilon == 0.03

    def test_token_invalido_reporta_linea(self):
        with pytest.raises(PartitionError, match="línea 2"):
            parse_partition("0\nx\n1\n")

    def test_vacio(self):
        with pytest.raises(PartitionError):
            parse_partition("\n\n")

    def test_bloque_vacio_con_k_explicito(self):
        with pytest.raises(PartitionError):
            parse_partition("0\n1\n", k=3)

    def test_write(self, path6_three_blocks):
        assert write_partition(path6_three_blocks) == "0\n0\n1\n1\n2\n2\n"

    def test_archivos(self, tmp_path, path6_three_blocks):
        path = tmp_path / "camino.part"
        write_partition_file(path6_three_blocks, path)
        loaded = read_partition(path, k=3)
        assert np.array_equal(loaded.assignment, path6_three_blocks.assignment)

"""
Pruebas de la representación de grafos y del formato METIS.
"""

import numpy as np
import pytest

from src.graph_core import (
    EdgeRef,
    Graph,
    GraphFormatError,
    parse_metis,
    read_metis_file,
    weighted_degree,
    write_metis,
    write_metis_file,
)


class TestGraph:
    """Construcción y validación."""

    def test_from_edges_ordena_vecinos(self):
        g = Graph.from_edges(3, [(2, 0, 1.0), (1, 0, 2.0)])
        assert g.neighbors(0) == ((1, 2.0), (2, 1.0))
        assert g.num_edges == 2

    @pytest.mark.parametrize("edges", [
        [(0, 0, 1.0)],
        [(0, 1, 1.0), (1, 0, 1.0)],
        [(0, 3, 1.0)],
        [(0, 1, 0.0)],
        [(0, 1, -2.0)],
    ])
    def test_from_edges_rechaza_invalidos(self, edges):
        with pytest.raises(GraphFormatError):
            Graph.from_edges(3, edges)

    def test_rechaza_asimetria(self):
        with pytest.raises(GraphFormatError, match="asimétrica"):
            Graph([[(1, 1.0)], [(0, 2.0)]])

    def test_rechaza_vecinos_desordenados(self):
        with pytest.raises(GraphFormatError):
            Graph([[(2, 1.0), (1, 1.0)], [(0, 1.0)], [(0, 1.0)]])

    def test_fuzz_mutacion_rompe_simetria(self, rng, graph_factory):
        for _ in range(20):
            g = graph_factory["random_connected"](rng, 8, 5)
            adjacency = [list(nbrs) for nbrs in g.edges]
            u = int(rng.integers(g.n))
            v, w = adjacency[u][0]
            adjacency[u][0] = (v, w + 1.0)
            with pytest.raises(GraphFormatError):
                Graph(adjacency)

    def test_rechaza_peso_de_vertice_no_positivo(self):
        with pytest.raises(GraphFormatError):
            Graph([[], []], vertex_weights=[1.0, 0.0])

    def test_iter_edges_orden_canonico(self, star4):
        refs = [ref for ref, _ in star4.iter_edges()]
        assert refs == [EdgeRef(0, 1), EdgeRef(0, 2), EdgeRef(0, 3)]

    def test_edgeref_canonico(self):
        assert EdgeRef.of(5, 2) == EdgeRef(2, 5)
        with pytest.raises(ValueError):
            EdgeRef(3, 3)

    def test_induced_subgraph_renumera(self, path4):
        sub = path4.induced_subgraph([3, 2, 0])
        assert sub.n == 3
        assert sub.neighbors(0) == ((1, 1.0),)
        assert sub.neighbors(2) == ()

    def test_csr(self, weighted_path3):
        indptr, indices, weights = weighted_path3.csr()
        assert indptr.tolist() == [0, 1, 3, 4]
        assert indices.tolist() == [1, 0, 2, 1]
        assert weights.tolist() == [2.0, 2.0, 1.0, 1.0]


class TestWeightedDegree:

    def test_camino(self, path3):
        assert weighted_degree(path3, 1) == 2.0

    def test_vertice_aislado(self):
        g = Graph.from_edges(3, [(0, 1, 1.0)])
        assert weighted_degree(g, 2) == 0.0

    def test_estrella(self, star4):
        assert weighted_degree(star4, 0) == 6.0

    def test_fuera_de_rango(self, path3):
        with pytest.raises(IndexError):
            weighted_degree(path3, 3)

    def test_suma_es_doble_del_peso_total(self, rng, graph_factory):
        g = graph_factory["random_connected"](rng, 20, 15)
        total = sum(weighted_degree(g, v) for v in range(g.n))
        assert total == 2 * sum(w for _, w in g.iter_edges())


class TestParseMetis:
    """Lectura de archivos METIS/Chaco."""

    def test_camino_sin_pesos(self):
        g = parse_metis(b"3 2\n2\n1 3\n2\n")
        assert g == Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])

    def test_pesos_de_arista(self):
        g = parse_metis(b"3 2 1\n2 5\n1 5 3 2\n2 2\n")
        assert g.edge_weight(0, 1) == 5.0
        assert g.edge_weight(1, 2) == 2.0

    def test_pesos_de_vertice_y_arista(self):
        g = parse_metis("2 1 11\n3 2 7\n4 1 7\n")
        assert g.vertex_weights == (3.0, 4.0)
        assert g.edge_weight(0, 1) == 7.0

    def test_comentarios(self):
        g = parse_metis("% cabecera\n3 2\n% vértice 1\n2\n1 3\n2\n")
        assert g.num_edges == 2

    def test_vertice_aislado_con_linea_vacia(self):
        g = parse_metis("3 1\n2\n1\n\n")
        assert g.n == 3
        assert g.degree(2) == 0

    def test_exceso_de_vecinos_reporta_linea(self):
        with pytest.raises(GraphFormatError) as info:
            parse_metis("4 1\n2 3 4\n1\n1\n1\n")
        assert info.value.line == 2

    @pytest.mark.regression
    def test_exceso_de_aristas_reporta_primera_linea(self):
        # Tres aristas distintas en la línea 2 con m=2; el acumulado de
        # adyacencias recién pasa 2m en la línea 4
        with pytest.raises(GraphFormatError) as info:
            parse_metis("4 2\n2 3 4\n1\n1\n1\n")
        assert info.value.line == 2
        assert "línea 2" in str(info.value)

    @pytest.mark.parametrize("text,line", [
        ("3 2\n2\n1 3\n1\n", 3),           # asimetría: 2 lista a 3 y no al revés
        ("3 2\n1 2\n1 3\n2\n", 2),         # lazo
        ("3 2 1\n2 0\n1 0 3 2\n2 2\n", 2),  # peso no positivo
        ("3 2\n2\n1 x\n2\n", 3),           # token mal formado
        ("3 2\n2\n1 3 3\n2\n", 3),         # arista duplicada
        ("3 3\n2\n1 3\n2\n", 4),           # cabecera no coincide
    ])
    def test_errores_con_numero_de_linea(self, text, line):
        with pytest.raises(GraphFormatError) as info:
            parse_metis(text)
        assert info.value.line == line
        assert f"línea {line}" in str(info.value)

    def test_cabecera_invalida(self):
        with pytest.raises(GraphFormatError):
            parse_metis("3\n")

    def test_ncon_mayor_a_uno(self):
        with pytest.raises(GraphFormatError):
            parse_metis("2 1 10 2\n1 2\n1 1\n")


class TestWriteMetis:
    """Escritura y round-trip."""

    def test_camino_sin_pesos(self, path3):
        assert write_metis(path3) == b"3 2\n2\n1 3\n2\n"

    def test_grafo_vacio(self):
        assert write_metis(Graph([])) == b"0 0\n"

    def test_round_trip_byte_a_byte(self):
        data = b"3 2 1\n2 5\n1 5 3 2\n2 2\n"
        assert write_metis(parse_metis(data)) == data

    def test_round_trip_aleatorio(self, rng, graph_factory):
        for n in (2, 5, 17, 40):
            g = graph_factory["random_connected"](rng, n, n)
            assert parse_metis(write_metis(g)) == g

    def test_pesos_no_enteros_sin_perdida(self, caplog):
        g = Graph.from_edges(2, [(0, 1, 0.1)])
        with caplog.at_level("WARNING"):
            data = write_metis(g)
        assert parse_metis(data) == g
        assert "no enteros" in caplog.text

    def test_archivos(self, tmp_path, weighted_path3):
        path = tmp_path / "g.graph"
        write_metis_file(weighted_path3, path)
        assert read_metis_file(path) == weighted_path3
        assert np.isclose(read_metis_file(path).total_vertex_weight, 3.0)

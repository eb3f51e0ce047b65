#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Representación canónica de grafos no dirigidos y ponderados.

Este módulo contiene la clase Graph (usada para el grafo de aplicación,
el grafo de comunicación y la parte combinatoria del grafo de procesadores),
su validación y la lectura/escritura en formato METIS/Chaco.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

Adjacency = Sequence[Sequence[Tuple[int, float]]]


class GraphFormatError(ValueError):
    """Error de validación o de formato de un grafo."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"línea {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, order=True)
class EdgeRef:
    """Identidad estable de una arista no dirigida (u < v)."""
    u: int
    v: int

    def __post_init__(self):
        if not self.u < self.v:
            raise ValueError(f"EdgeRef requiere u < v, recibido ({self.u}, {self.v})")

    @classmethod
    def of(cls, a: int, b: int) -> "EdgeRef":
        """Crea la referencia canónica para el par {a, b}."""
        return cls(a, b) if a < b else cls(b, a)


class Graph:
    """Grafo no dirigido con pesos positivos en aristas y vértices.

    Inmutable tras la construcción. Cada lista de vecinos está ordenada
    estrictamente por id y la adyacencia es simétrica.
    """

    def __init__(self, adjacency: Adjacency,
                 vertex_weights: Optional[Sequence[float]] = None,
                 validate: bool = True):
        self._edges: Tuple[Tuple[Tuple[int, float], ...], ...] = tuple(
            tuple((int(v), float(w)) for v, w in nbrs) for nbrs in adjacency
        )
        n = len(self._edges)
        if vertex_weights is None:
            self._vertex_weights = (1.0,) * n
        else:
            self._vertex_weights = tuple(float(x) for x in vertex_weights)
        if validate:
            validate_graph(self)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int, float]],
                   vertex_weights: Optional[Sequence[float]] = None) -> "Graph":
        """Construye un grafo a partir de una lista de aristas (u, v, w).

        Las aristas duplicadas son un error: fusionarlas alteraría los
        volúmenes de comunicación.
        """
        adjacency: List[Dict[int, float]] = [dict() for _ in range(n)]
        for u, v, w in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"arista ({u}, {v}) fuera de rango [0, {n})")
            if u == v:
                raise GraphFormatError(f"lazo en el vértice {u}")
            if v in adjacency[u]:
                raise GraphFormatError(f"arista duplicada ({u}, {v})")
            adjacency[u][v] = float(w)
            adjacency[v][u] = float(w)
        return cls([sorted(nbrs.items()) for nbrs in adjacency], vertex_weights)

    @property
    def n(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> Tuple[Tuple[Tuple[int, float], ...], ...]:
        return self._edges

    @property
    def vertex_weights(self) -> Tuple[float, ...]:
        return self._vertex_weights

    @cached_property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self._edges) // 2

    @property
    def total_vertex_weight(self) -> float:
        return float(sum(self._vertex_weights))

    def neighbors(self, v: int) -> Tuple[Tuple[int, float], ...]:
        return self._edges[v]

    def degree(self, v: int) -> int:
        return len(self._edges[v])

    def iter_edges(self) -> Iterator[Tuple[EdgeRef, float]]:
        """Recorre cada arista una sola vez, en orden canónico (u, v)."""
        for u, nbrs in enumerate(self._edges):
            for v, w in nbrs:
                if u < v:
                    yield EdgeRef(u, v), w

    def edge_weight(self, u: int, v: int) -> Optional[float]:
        for x, w in self._edges[u]:
            if x == v:
                return w
        return None

    @cached_property
    def _csr(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        for u, nbrs in enumerate(self._edges):
            indptr[u + 1] = indptr[u] + len(nbrs)
        indices = np.fromiter((v for nbrs in self._edges for v, _ in nbrs),
                              dtype=np.int64, count=int(indptr[-1]))
        weights = np.fromiter((w for nbrs in self._edges for _, w in nbrs),
                              dtype=np.float64, count=int(indptr[-1]))
        return indptr, indices, weights

    def csr(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Arreglos (indptr, indices, weights) de la adyacencia simétrica."""
        return self._csr

    def induced_subgraph(self, vertices: Sequence[int]) -> "Graph":
        """Subgrafo inducido; el vértice vertices[i] pasa a ser el id local i."""
        local = {v: i for i, v in enumerate(vertices)}
        adjacency = []
        for v in vertices:
            nbrs = sorted((local[x], w) for x, w in self._edges[v] if x in local)
            adjacency.append(nbrs)
        weights = [self._vertex_weights[v] for v in vertices]
        return Graph(adjacency, weights, validate=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._edges == other._edges and self._vertex_weights == other._vertex_weights

    def __hash__(self) -> int:
        return hash((self._edges, self._vertex_weights))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"


def validate_graph(g: Graph) -> None:
    """Verifica las invariantes de Graph; lanza GraphFormatError si falla."""
    n = g.n
    if len(g.vertex_weights) != n:
        raise GraphFormatError(
            f"se esperaban {n} pesos de vértice, hay {len(g.vertex_weights)}")
    for v, w in enumerate(g.vertex_weights):
        if not (w > 0 and math.isfinite(w)):
            raise GraphFormatError(f"peso de vértice no positivo en {v}: {w}")

    lookup: List[Dict[int, float]] = []
    for u, nbrs in enumerate(g.edges):
        previous = -1
        table: Dict[int, float] = {}
        for v, w in nbrs:
            if not 0 <= v < n:
                raise GraphFormatError(f"vecino {v} de {u} fuera de rango [0, {n})")
            if v == u:
                raise GraphFormatError(f"lazo en el vértice {u}")
            if v <= previous:
                raise GraphFormatError(
                    f"vecinos de {u} no ordenados estrictamente o duplicados ({v})")
            if not (w > 0 and math.isfinite(w)):
                raise GraphFormatError(f"peso no positivo en la arista ({u}, {v}): {w}")
            previous = v
            table[v] = w
        lookup.append(table)

    for u, table in enumerate(lookup):
        for v, w in table.items():
            if lookup[v].get(u) != w:
                raise GraphFormatError(f"adyacencia asimétrica entre {u} y {v}")


def weighted_degree(g: Graph, v: int) -> float:
    """Suma de los pesos de las aristas incidentes a v."""
    if not 0 <= v < g.n:
        raise IndexError(f"vértice {v} fuera de rango [0, {g.n})")
    return float(sum(w for _, w in g.neighbors(v)))


# =====================================================
# Formato METIS / Chaco
# =====================================================

def _parse_fmt(token: str, line: int) -> Tuple[bool, bool]:
    if not token.isdigit() or len(token) > 3:
        raise GraphFormatError(f"código fmt inválido '{token}'", line)
    digits = token.zfill(3)
    if digits[0] == "1":
        raise GraphFormatError("tamaños de vértice (fmt=1xx) no soportados", line)
    if digits[0] not in "0" or digits[1] not in "01" or digits[2] not in "01":
        raise GraphFormatError(f"código fmt inválido '{token}'", line)
    return digits[1] == "1", digits[2] == "1"


def _parse_int(token: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphFormatError(f"token entero mal formado '{token}'", line) from None


def _parse_weight(token: str, line: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise GraphFormatError(f"peso mal formado '{token}'", line) from None
    if not (value > 0 and math.isfinite(value)):
        raise GraphFormatError(f"peso no positivo '{token}'", line)
    return value


def parse_metis(data: Union[bytes, str]) -> Graph:
    """Lee un grafo en formato METIS/Chaco.

    Args:
        data: Contenido del archivo (bytes o texto)

    Returns:
        Graph validado, con ids de vértice desde 0

    Raises:
        GraphFormatError: con el número de línea del problema
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    numbered = [(i + 1, raw.rstrip("\r")) for i, raw in enumerate(lines)
                if not raw.lstrip().startswith("%")]
    if not numbered:
        raise GraphFormatError("archivo vacío: falta la cabecera 'n m [fmt [ncon]]'", 1)

    header_line, header = numbered[0]
    tokens = header.split()
    if len(tokens) < 2 or len(tokens) > 4:
        raise GraphFormatError("cabecera debe ser 'n m [fmt [ncon]]'", header_line)
    n = _parse_int(tokens[0], header_line)
    m = _parse_int(tokens[1], header_line)
    if n < 0 or m < 0:
        raise GraphFormatError("n y m deben ser no negativos", header_line)
    has_vweights, has_eweights = (False, False)
    if len(tokens) >= 3:
        has_vweights, has_eweights = _parse_fmt(tokens[2], header_line)
    if len(tokens) == 4:
        ncon = _parse_int(tokens[3], header_line)
        if ncon != 1:
            raise GraphFormatError(f"solo se soporta ncon=1 (recibido {ncon})", header_line)

    body = numbered[1:]
    # Líneas en blanco finales no cuentan como vértices adicionales
    while len(body) > n and body[-1][1].strip() == "":
        body.pop()
    if len(body) < n:
        last = body[-1][0] if body else header_line
        raise GraphFormatError(f"se esperaban {n} líneas de vértices, hay {len(body)}", last)
    if len(body) > n:
        raise GraphFormatError(f"líneas sobrantes tras {n} vértices", body[n][0])

    adjacency: List[List[Tuple[int, float]]] = []
    vertex_weights: List[float] = []
    line_of: List[int] = []
    entries = 0
    # Aristas distintas ya nombradas: las que van hacia un vértice posterior
    forward = 0
    for u, (line_no, raw) in enumerate(body):
        tokens = raw.split()
        pos = 0
        if has_vweights:
            if not tokens:
                raise GraphFormatError("falta el peso del vértice", line_no)
            vertex_weights.append(_parse_weight(tokens[0], line_no))
            pos = 1
        step = 2 if has_eweights else 1
        rest = tokens[pos:]
        if len(rest) % step != 0:
            raise GraphFormatError("vecino sin peso de arista", line_no)
        seen: Dict[int, float] = {}
        for j in range(0, len(rest), step):
            v = _parse_int(rest[j], line_no) - 1
            w = _parse_weight(rest[j + 1], line_no) if has_eweights else 1.0
            if not 0 <= v < n:
                raise GraphFormatError(f"vecino {v + 1} fuera de rango [1, {n}]", line_no)
            if v == u:
                raise GraphFormatError(f"lazo en el vértice {u + 1}", line_no)
            if v in seen:
                raise GraphFormatError(f"arista duplicada ({u + 1}, {v + 1})", line_no)
            seen[v] = w
        entries += len(seen)
        forward += sum(1 for v in seen if v > u)
        if forward > m or entries > 2 * m:
            raise GraphFormatError(
                f"más adyacencias que las declaradas en la cabecera (m={m})", line_no)
        adjacency.append(sorted(seen.items()))
        line_of.append(line_no)

    lookup = [dict(nbrs) for nbrs in adjacency]
    for u, nbrs in enumerate(adjacency):
        for v, w in nbrs:
            if lookup[v].get(u) != w:
                raise GraphFormatError(
                    f"adyacencia asimétrica: {u + 1} lista a {v + 1} pero no al revés "
                    f"con el mismo peso", line_of[u])
    if entries != 2 * m:
        last = line_of[-1] if line_of else header_line
        raise GraphFormatError(
            f"la cabecera declara {m} aristas, el cuerpo contiene {entries // 2}", last)

    graph = Graph(adjacency, vertex_weights if has_vweights else None)
    logger.debug(f"Grafo METIS leído: {graph.n} vértices, {graph.num_edges} aristas")
    return graph


def _format_weight(w: float) -> str:
    if float(w).is_integer():
        return str(int(w))
    return repr(float(w))


def write_metis(g: Graph) -> bytes:
    """Serializa el grafo en formato METIS (ids desde 1).

    Los pesos enteros se escriben como enteros. Los no enteros se escriben
    sin pérdida con repr(), lo que las herramientas METIS estrictas rechazan;
    en ese caso se emite una advertencia.
    """
    has_vweights = any(w != 1.0 for w in g.vertex_weights)
    has_eweights = any(w != 1.0 for nbrs in g.edges for _, w in nbrs)
    non_integral = any(not float(w).is_integer() for nbrs in g.edges for _, w in nbrs) or \
        any(not float(w).is_integer() for w in g.vertex_weights)
    if non_integral:
        logger.warning("Pesos no enteros escritos en formato METIS; "
                       "herramientas que esperan enteros no podrán leerlos")

    header = [str(g.n), str(g.num_edges)]
    if has_vweights or has_eweights:
        header.append(f"{int(has_vweights)}{int(has_eweights)}".lstrip("0") or "0")
    out = [" ".join(header)]
    for u, nbrs in enumerate(g.edges):
        tokens: List[str] = []
        if has_vweights:
            tokens.append(_format_weight(g.vertex_weights[u]))
        for v, w in nbrs:
            tokens.append(str(v + 1))
            if has_eweights:
                tokens.append(_format_weight(w))
        out.append(" ".join(tokens))
    return ("\n".join(out) + "\n").encode("utf-8")


def read_metis_file(path: Union[str, Path]) -> Graph:
    """Lee un archivo METIS del disco."""
    path = Path(path)
    graph = parse_metis(path.read_bytes())
    logger.info(f"Grafo cargado desde {path}: {graph.n} vértices, {graph.num_edges} aristas")
    return graph


def write_metis_file(g: Graph, path: Union[str, Path]) -> None:
    """Escribe el grafo en un archivo METIS."""
    Path(path).write_bytes(write_metis(g))
    logger.info(f"Grafo escrito en {path}")

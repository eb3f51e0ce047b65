#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Grafos de procesadores: mallas y toros 2D/3D.

Este módulo genera los grafos de procesadores con numeración lexicográfica,
calcula la matriz de tiempos t(u, v) (suma mínima de 1/ancho de banda) y
las fracciones de flujo por arista bajo enrutamiento uniforme por caminos
mínimos.
"""

import itertools
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .graph_core import EdgeRef, Graph, read_metis_file

logger = logging.getLogger(__name__)

# Tolerancia relativa para considerar un camino como mínimo
PATH_TOLERANCE = 1e-12


class TopologyError(ValueError):
    """Error en la construcción o uso de un grafo de procesadores."""


class TopologyKind(str, Enum):
    GRID2D = "grid2d"
    GRID3D = "grid3d"
    TORUS2D = "torus2d"
    TORUS3D = "torus3d"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ProcessorGraph:
    """Grafo de procesadores: los pesos de arista son anchos de banda."""
    graph: Graph
    kind: TopologyKind
    dims: Tuple[int, ...]
    coords: Optional[Tuple[Tuple[int, ...], ...]] = None

    @property
    def k(self) -> int:
        return self.graph.n

    def bandwidth(self, u: int, v: int) -> float:
        w = self.graph.edge_weight(u, v)
        if w is None:
            raise TopologyError(f"no hay enlace entre {u} y {v}")
        return w

    @property
    def label(self) -> str:
        if self.kind is TopologyKind.CUSTOM:
            return f"custom:{self.k}"
        return f"{self.kind.value}:" + "x".join(str(d) for d in self.dims)


@dataclass(frozen=True, eq=False)
class TimeMatrix:
    """Matriz simétrica k×k de tiempos mínimos por unidad de mensaje."""
    t: np.ndarray

    @property
    def k(self) -> int:
        return int(self.t.shape[0])

    def __getitem__(self, index):
        return self.t[index]


@dataclass
class EdgeFlow:
    """Fracción de un mensaje unitario s→d que cruza cada enlace."""
    source: int
    target: int
    fractions: Dict[EdgeRef, float] = field(default_factory=dict)

    def __getitem__(self, edge: EdgeRef) -> float:
        return self.fractions.get(edge, 0.0)


def _check_dims(dims: Sequence[int]) -> Tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if len(dims) not in (2, 3):
        raise TopologyError(f"se esperan 2 o 3 ejes, recibidos {len(dims)}")
    if any(d < 2 for d in dims):
        raise TopologyError(f"cada eje debe tener extensión >= 2: {dims}")
    return dims


def _check_bandwidth(bandwidth: float) -> float:
    bandwidth = float(bandwidth)
    if not bandwidth > 0:
        raise TopologyError(f"el ancho de banda debe ser positivo: {bandwidth}")
    return bandwidth


def _lattice(dims: Tuple[int, ...], bandwidth: float, wrap: bool) -> Tuple[Graph, tuple]:
    coords = tuple(itertools.product(*(range(d) for d in dims)))
    edges = set()
    for node, c in enumerate(coords):
        for axis, extent in enumerate(dims):
            nxt = list(c)
            if c[axis] + 1 < extent:
                nxt[axis] = c[axis] + 1
            elif wrap:
                nxt[axis] = 0
            else:
                continue
            other = int(np.ravel_multi_index(tuple(nxt), dims))
            if other != node:
                # En ejes de extensión 2 el enlace de vuelta coincide con el de la malla
                edges.add(EdgeRef.of(node, other))
    graph = Graph.from_edges(len(coords), ((e.u, e.v, bandwidth) for e in sorted(edges)))
    return graph, coords


def build_grid(dims: Sequence[int], bandwidth: float = 1.0) -> ProcessorGraph:
    """Malla 2D/3D con ancho de banda uniforme y numeración lexicográfica."""
    dims = _check_dims(dims)
    bandwidth = _check_bandwidth(bandwidth)
    graph, coords = _lattice(dims, bandwidth, wrap=False)
    kind = TopologyKind.GRID2D if len(dims) == 2 else TopologyKind.GRID3D
    return ProcessorGraph(graph, kind, dims, coords)


def build_torus(dims: Sequence[int], bandwidth: float = 1.0) -> ProcessorGraph:
    """Toro 2D/3D; los ejes de extensión 2 tienen un único enlace."""
    dims = _check_dims(dims)
    bandwidth = _check_bandwidth(bandwidth)
    graph, coords = _lattice(dims, bandwidth, wrap=True)
    kind = TopologyKind.TORUS2D if len(dims) == 2 else TopologyKind.TORUS3D
    return ProcessorGraph(graph, kind, dims, coords)


def build_custom(graph: Graph) -> ProcessorGraph:
    """Grafo de procesadores arbitrario; los pesos de arista son anchos de banda."""
    if graph.n == 0:
        raise TopologyError("el grafo de procesadores no puede estar vacío")
    return ProcessorGraph(graph, TopologyKind.CUSTOM, (graph.n,), None)


def parse_topology_spec(spec: str, bandwidth: float = 1.0) -> ProcessorGraph:
    """Interpreta cadenas como 'grid2d:16x16', 'torus3d:8x8x8' o 'custom:<archivo>'."""
    if ":" not in spec:
        raise TopologyError(f"especificación de topología inválida '{spec}' (falta ':')")
    kind_text, _, rest = spec.partition(":")
    try:
        kind = TopologyKind(kind_text.strip().lower())
    except ValueError:
        raise TopologyError(f"tipo de topología desconocido '{kind_text}'") from None

    if kind is TopologyKind.CUSTOM:
        path = Path(rest)
        if not path.exists():
            raise TopologyError(f"no se encontró el archivo de topología {path}")
        return build_custom(read_metis_file(path))

    try:
        dims = [int(x) for x in rest.lower().split("x")]
    except ValueError:
        raise TopologyError(f"dimensiones inválidas '{rest}' en '{spec}'") from None
    expected = 2 if kind in (TopologyKind.GRID2D, TopologyKind.TORUS2D) else 3
    if len(dims) != expected:
        raise TopologyError(f"'{kind.value}' requiere {expected} ejes, recibidos {len(dims)}")
    if kind in (TopologyKind.GRID2D, TopologyKind.GRID3D):
        return build_grid(dims, bandwidth)
    return build_torus(dims, bandwidth)


def _time_csr(p: ProcessorGraph) -> csr_matrix:
    indptr, indices, weights = p.graph.csr()
    return csr_matrix((1.0 / weights, indices, indptr), shape=(p.k, p.k))


def all_pairs_time(p: ProcessorGraph) -> TimeMatrix:
    """Matriz t(u, v) = mínimo sobre caminos de la suma de 1/ω_p.

    Todos los pesos 1/ω_p son positivos, así que basta un Dijkstra por
    nodo (la repesada de Johnson no cambia nada).
    """
    started = time.perf_counter()
    t = dijkstra(_time_csr(p), directed=False)
    if not np.all(np.isfinite(t)):
        raise TopologyError("el grafo de procesadores no es conexo")
    np.fill_diagonal(t, 0.0)
    logger.debug(f"Matriz de tiempos {p.label} calculada en {time.perf_counter() - started:.3f}s")
    return TimeMatrix(t)


def centrality_sums(tm: TimeMatrix) -> np.ndarray:
    """Suma por fila de t: menor valor = nodo más central."""
    return tm.t.sum(axis=1)


def _directed_edges(p: ProcessorGraph) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    indptr, indices, weights = p.graph.csr()
    src = np.repeat(np.arange(p.k), np.diff(indptr))
    return src, indices, 1.0 / weights


def _path_counts_from(p: ProcessorGraph, tm: TimeMatrix, source: int) -> np.ndarray:
    """Número de caminos mínimos (en métrica de tiempo) desde source a cada nodo."""
    dist = tm.t[source]
    sigma = np.zeros(p.k, dtype=np.float64)
    sigma[source] = 1.0
    for v in np.argsort(dist, kind="stable"):
        if v == source:
            continue
        total = 0.0
        for u, w in p.graph.neighbors(v):
            slack = dist[u] + 1.0 / w - dist[v]
            if abs(slack) <= PATH_TOLERANCE * max(1.0, dist[v]):
                total += sigma[u]
        sigma[v] = total
    return sigma


def shortest_path_counts(p: ProcessorGraph, tm: TimeMatrix) -> np.ndarray:
    """Matriz σ k×k de conteos de caminos mínimos (float64, puede superar 2^64)."""
    return np.vstack([_path_counts_from(p, tm, s) for s in range(p.k)])


class ShortestPathRouting:
    """Precálculo de enrutamiento uniforme por caminos mínimos.

    Se calcula una sola vez por grafo de procesadores: la matriz de tiempos,
    los conteos σ y los arreglos de aristas dirigidas. Luego permite repartir
    volúmenes de comunicación sobre los enlaces de forma vectorizada.
    """

    def __init__(self, p: ProcessorGraph, tm: Optional[TimeMatrix] = None,
                 chunk_size: int = 256):
        started = time.perf_counter()
        self.p = p
        self.tm = tm if tm is not None else all_pairs_time(p)
        self.sigma = shortest_path_counts(p, self.tm)
        self.src, self.dst, self.cost = _directed_edges(p)
        lo = np.minimum(self.src, self.dst)
        hi = np.maximum(self.src, self.dst)
        self.refs: List[EdgeRef] = [ref for ref, _ in p.graph.iter_edges()]
        index = {ref: i for i, ref in enumerate(self.refs)}
        self.undirected = np.array([index[EdgeRef(int(u), int(v))] for u, v in zip(lo, hi)],
                                   dtype=np.int64)
        bandwidth = np.empty(len(self.refs))
        bandwidth[self.undirected] = 1.0 / self.cost
        self.bandwidths = bandwidth
        self.chunk_size = chunk_size
        self.precompute_seconds = time.perf_counter() - started
        logger.debug(f"Enrutamiento {p.label} precalculado en {self.precompute_seconds:.3f}s")

    def _fraction_block(self, s: np.ndarray, d: np.ndarray) -> np.ndarray:
        t = self.tm.t
        total = t[s, d][:, None]
        slack = t[s[:, None], self.src[None, :]] + self.cost[None, :] + t[self.dst[None, :], d[:, None]]
        on_dag = np.abs(slack - total) <= PATH_TOLERANCE * np.maximum(1.0, total)
        ratio = (self.sigma[s[:, None], self.src[None, :]] * self.sigma[d[:, None], self.dst[None, :]]
                 / self.sigma[s, d][:, None])
        return np.where(on_dag, ratio, 0.0)

    def edge_fractions(self, s: int, d: int) -> EdgeFlow:
        """Fracción σ(s,u)·σ(v,d)/σ(s,d) sobre cada enlace (u→v) del DAG de caminos mínimos."""
        if s == d:
            raise TopologyError("origen y destino deben ser distintos")
        block = self._fraction_block(np.array([s]), np.array([d]))[0]
        flow = EdgeFlow(s, d)
        for j in np.flatnonzero(block):
            ref = self.refs[self.undirected[j]]
            flow.fractions[ref] = flow.fractions.get(ref, 0.0) + float(block[j])
        return flow

    def route_volumes(self, sources: Sequence[int], targets: Sequence[int],
                      volumes: Sequence[float]) -> np.ndarray:
        """Carga (antes de dividir por ancho de banda) de cada enlace, en el orden de self.refs."""
        sources = np.asarray(sources, dtype=np.int64)
        targets = np.asarray(targets, dtype=np.int64)
        volumes = np.asarray(volumes, dtype=np.float64)
        if np.any(sources == targets):
            raise TopologyError("origen y destino deben ser distintos")
        directed = np.zeros(len(self.src), dtype=np.float64)
        for start in range(0, len(sources), self.chunk_size):
            stop = start + self.chunk_size
            block = self._fraction_block(sources[start:stop], targets[start:stop])
            directed += volumes[start:stop] @ block
        loads = np.zeros(len(self.refs), dtype=np.float64)
        np.add.at(loads, self.undirected, directed)
        return loads


def edge_flow_fractions(p: ProcessorGraph, s: int, d: int,
                        tm: Optional[TimeMatrix] = None) -> EdgeFlow:
    """Reparto de un mensaje unitario de s a d sobre los caminos mínimos.

    Calcula solo los conteos σ desde s y desde d; para muchas consultas
    conviene ShortestPathRouting.
    """
    if s == d:
        raise TopologyError("origen y destino deben ser distintos")
    tm = tm if tm is not None else all_pairs_time(p)
    sigma_s = _path_counts_from(p, tm, s)
    sigma_d = _path_counts_from(p, tm, d)
    total = tm.t[s, d]
    tol = PATH_TOLERANCE * max(1.0, total)
    flow = EdgeFlow(s, d)
    for u in range(p.k):
        for v, w in p.graph.neighbors(u):
            if abs(tm.t[s, u] + 1.0 / w + tm.t[v, d] - total) <= tol:
                flow.fractions[EdgeRef.of(u, v)] = sigma_s[u] * sigma_d[v] / sigma_s[d]
    return flow


def topology_summary(p: ProcessorGraph, tm: TimeMatrix) -> Dict[str, float]:
    """Estadísticas básicas de la matriz de tiempos."""
    sums = centrality_sums(tm)
    k = tm.k
    off_diagonal = tm.t[~np.eye(k, dtype=bool)] if k > 1 else np.zeros(1)
    return {
        "nodos": k,
        "enlaces": p.graph.num_edges,
        "diametro": float(tm.t.max()),
        "t_medio": float(off_diagonal.mean()),
        "centralidad_min": float(sums.min()),
        "centralidad_max": float(sums.max()),
        "nodo_mas_central": int(np.argmin(sums)),
    }

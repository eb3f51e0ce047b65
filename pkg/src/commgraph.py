"""
Grafo de comunicación y calidad de particiones.

A partir del grafo de aplicación G_a y una partición en k bloques se
construye el grafo de comunicación G_c (un vértice por bloque, peso de
arista = volumen entre bloques). También contiene las métricas de la
partición (corte, MCV, balance), los particionadores internos y la
lectura/escritura de archivos de partición en el formato METIS/KaHIP.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .bisection import Bisection, bisect
from .graph_core import Graph
from .ordering import reverse_cuthill_mckee_ordering

logger = logging.getLogger(__name__)


class PartitionError(ValueError):
    """Partición inválida o incompatible con el grafo."""


@dataclass(frozen=True, eq=False)
class Partition:
    """Asignación de cada vértice de G_a a un bloque en [0, k)."""
    assignment: np.ndarray
    k: int
    epsilon: float = 0.0

    def __post_init__(self):
        assignment = np.asarray(self.assignment, dtype=np.int64)
        object.__setattr__(self, "assignment", assignment)
        if self.k < 1:
            raise PartitionError(f"k debe ser >= 1 (k={self.k})")
        if self.epsilon < 0:
            raise PartitionError(f"epsilon debe ser >= 0 (epsilon={self.epsilon})")
        if assignment.ndim != 1:
            raise PartitionError("la asignación debe ser un vector")
        bad = np.flatnonzero((assignment < 0) | (assignment >= self.k))
        if len(bad):
            v = int(bad[0])
            raise PartitionError(f"vértice {v}: bloque {int(assignment[v])} fuera de rango [0, {self.k})")
        empty = np.flatnonzero(self.block_sizes == 0)
        if len(empty):
            raise PartitionError(f"bloques vacíos: {[int(b) for b in empty[:10]]}")

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def block_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def blocks(self) -> List[List[int]]:
        members: List[List[int]] = [[] for _ in range(self.k)]
        for v, b in enumerate(self.assignment):
            members[b].append(v)
        return members


@dataclass(frozen=True)
class BalanceReport:
    max_block_weight: float
    limit: float
    balanced: bool
    # max_block_weight / ceil(W/k) - 1
    imbalance: float


@dataclass(frozen=True)
class PartitionQuality:
    """Estadísticas de una partición: corte, MCV, desbalance y tiempo."""
    edge_cut: float
    mcv: int
    balance: float
    time: float


def _check(g_a: Graph, p: Partition) -> None:
    if p.n != g_a.n:
        raise PartitionError(f"la partición tiene {p.n} entradas y el grafo {g_a.n} vértices")


def _edge_arrays(g: Graph) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Aristas (u < v) como arreglos paralelos u, v, w en orden canónico."""
    indptr, indices, weights = g.csr()
    src = np.repeat(np.arange(g.n), np.diff(indptr))
    keep = src < indices
    return src[keep], indices[keep], weights[keep]


def check_balance(g_a: Graph, p: Partition) -> BalanceReport:
    """Comprueba max peso de bloque <= (1+eps)·ceil(W/k). No corrige nada."""
    _check(g_a, p)
    weights = np.bincount(p.assignment, weights=np.asarray(g_a.vertex_weights), minlength=p.k)
    ideal = math.ceil(g_a.total_vertex_weight / p.k)
    limit = (1.0 + p.epsilon) * ideal
    heaviest = float(weights.max())
    report = BalanceReport(
        max_block_weight=heaviest,
        limit=limit,
        balanced=heaviest <= limit,
        imbalance=heaviest / ideal - 1.0 if ideal > 0 else 0.0,
    )
    if not report.balanced:
        logger.warning(f"Partición desbalanceada: bloque de peso {heaviest} > límite {limit:.3f}")
    return report


def build_comm_graph(g_a: Graph, p: Partition) -> Graph:
    """G_c con k vértices; el peso de {A,B} es la suma de pesos de las aristas que cruzan."""
    _check(g_a, p)
    u, v, w = _edge_arrays(g_a)
    a, b = p.assignment[u], p.assignment[v]
    crossing = a != b
    lo = np.minimum(a, b)[crossing]
    hi = np.maximum(a, b)[crossing]
    volume: Dict[Tuple[int, int], float] = {}
    for x, y, weight in zip(lo.tolist(), hi.tolist(), w[crossing].tolist()):
        volume[(x, y)] = volume.get((x, y), 0.0) + weight
    return Graph.from_edges(p.k, ((x, y, weight) for (x, y), weight in volume.items()))


def edge_cut(g_a: Graph, p: Partition) -> float:
    _check(g_a, p)
    u, v, w = _edge_arrays(g_a)
    return float(w[p.assignment[u] != p.assignment[v]].sum())


def mcv(g_a: Graph, p: Partition) -> int:
    """Volumen máximo de comunicación: por bloque, suma sobre sus vértices
    del número de bloques ajenos distintos que cada vértice toca."""
    _check(g_a, p)
    if p.k == 1:
        return 0
    indptr, indices, _ = g_a.csr()
    owner = np.repeat(np.arange(g_a.n), np.diff(indptr))
    foreign = p.assignment[indices]
    mask = foreign != p.assignment[owner]
    pairs = np.unique(owner[mask] * p.k + foreign[mask])
    per_vertex = np.bincount(pairs // p.k, minlength=g_a.n)
    per_block = np.bincount(p.assignment, weights=per_vertex, minlength=p.k)
    return int(per_block.max())


def _block_sizes(n: int, k: int) -> np.ndarray:
    return np.bincount((np.arange(n) * k) // n, minlength=k)


def partition_from_ordering(g_a: Graph, order: Sequence[int], k: int) -> Partition:
    """El vértice en la posición j del ordenamiento va al bloque floor(j·k/n)."""
    n = g_a.n
    order = np.asarray(order, dtype=np.int64)
    if len(order) != n or not np.array_equal(np.sort(order), np.arange(n)):
        raise PartitionError(f"el ordenamiento no es una permutación de [0, {n})")
    if not 1 <= k <= n:
        raise PartitionError(f"k={k} no es válido para n={n}")
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = (np.arange(n) * k) // n
    return Partition(assignment, k)


def _split_boxes(sub: Graph, first: np.ndarray, second: np.ndarray,
                 sizes: np.ndarray, by_weight: bool, seed: Optional[int]) -> Bisection:
    """Bisección de sub entre dos cajas de bloques.

    Con pesos de vértice el peso se reparte en proporción al número de
    bloques de cada caja; si un lado queda con menos vértices que bloques
    se repite la bisección por número de vértices.
    """
    if by_weight:
        target = sub.total_vertex_weight * first.size / (first.size + second.size)
        half = bisect(sub, seed=seed, size0=target)
        count0, count1 = half.sizes
        if count0 >= first.size and count1 >= second.size:
            return half
        logger.debug(f"Bisección por peso deja {count0}/{count1} vértices para "
                     f"{first.size}/{second.size} bloques; se balancea por número")
    return bisect(sub, seed=seed, size0=int(sizes[first.ravel()].sum()), by_weight=False)


def simple_partition(g_a: Graph, k: int, epsilon: float = 0.0,
                     seed: Optional[int] = None,
                     dims: Optional[Sequence[int]] = None) -> Partition:
    """Particionador interno por bisección recursiva.

    Los ids de bloque forman una malla de forma `dims` (por defecto una
    fila de k) en orden lexicográfico, igual que los nodos de una malla o
    toro. Cada bisección parte la caja de bloques por su eje más largo y
    el lado 0 va a la mitad de coordenadas menores, así que bloques
    vecinos en G_a reciben ids vecinos en la malla de procesadores.

    Con pesos unitarios el bloque b recibe exactamente tantos vértices
    como en partition_from_ordering (difieren en a lo sumo uno); con pesos
    de vértice el balance se mide en peso.
    """
    n = g_a.n
    if not 1 <= k <= n:
        raise PartitionError(f"balance imposible: k={k} para n={n}")
    shape = (k,) if dims is None else tuple(int(d) for d in dims)
    if math.prod(shape) != k:
        raise PartitionError(f"la malla de bloques {'x'.join(map(str, shape))} no tiene k={k} celdas")
    sizes = _block_sizes(n, k)
    by_weight = bool(np.any(np.asarray(g_a.vertex_weights) != 1))
    rng = np.random.default_rng(seed) if seed is not None else None
    assignment = np.empty(n, dtype=np.int64)

    stack = [(list(range(n)), np.arange(k).reshape(shape))]
    while stack:
        vertices, box = stack.pop()
        if box.size == 1:
            assignment[vertices] = int(box.flat[0])
            continue
        axis = int(np.argmax(box.shape))
        first, second = np.split(box, [box.shape[axis] // 2], axis=axis)
        sub_seed = None if rng is None else int(rng.integers(2**31))
        half = _split_boxes(g_a.induced_subgraph(vertices), first, second, sizes, by_weight, sub_seed)
        stack.append(([vertices[i] for i in half.members(1)], second))
        stack.append(([vertices[i] for i in half.members(0)], first))

    partition = Partition(assignment, k, epsilon)
    check_balance(g_a, partition)
    return partition


def ordering_partition(g_a: Graph, k: int, seed: Optional[int] = None) -> Partition:
    """Bloques consecutivos del RCM de una renumeración aleatoria de G_a."""
    n = g_a.n
    if not 1 <= k <= n:
        raise PartitionError(f"k={k} no es válido para n={n}")
    relabel = np.random.default_rng(seed).permutation(n)
    order = reverse_cuthill_mckee_ordering(g_a.induced_subgraph(relabel.tolist()))
    return partition_from_ordering(g_a, relabel[np.asarray(order, dtype=np.int64)], k)


def partition_quality(g_a: Graph, p: Partition, seconds: float = 0.0) -> PartitionQuality:
    return PartitionQuality(
        edge_cut=edge_cut(g_a, p),
        mcv=mcv(g_a, p),
        balance=check_balance(g_a, p).imbalance,
        time=seconds,
    )


def parse_partition(data: Union[bytes, str], k: Optional[int] = None,
                    epsilon: float = 0.0) -> Partition:
    """Lee una partición: la línea i contiene el bloque del vértice i.

    Si no se indica k se toma como max(bloque) + 1.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = data.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    blocks = []
    for number, raw in enumerate(lines, start=1):
        token = raw.strip()
        try:
            blocks.append(int(token))
        except ValueError:
            raise PartitionError(f"línea {number}: se esperaba un id de bloque, recibido {token!r}") from None
    if not blocks:
        raise PartitionError("archivo de partición vacío")
    if k is None:
        k = max(blocks) + 1
    return Partition(np.array(blocks, dtype=np.int64), k, epsilon)


def write_partition(p: Partition) -> str:
    return "".join(f"{int(b)}\n" for b in p.assignment)


def read_partition(path: Union[str, Path], k: Optional[int] = None,
                   epsilon: float = 0.0) -> Partition:
    path = Path(path)
    partition = parse_partition(path.read_text(encoding="utf-8"), k, epsilon)
    logger.info(f"Partición cargada desde {path}: {partition.n} vértices, k={partition.k}")
    return partition


def write_partition_file(p: Partition, path: Union[str, Path]) -> None:
    path = Path(path)
    path.write_text(write_partition(p), encoding="utf-8")
    logger.info(f"Partición guardada en {path}")

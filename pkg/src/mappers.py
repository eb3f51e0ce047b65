"""
Algoritmos de mapeo de G_c sobre G_p.

Ocho algoritmos producen una biyección Π (pi[i] = nodo asignado al
vértice i de G_c): Initial, Random, RCM, DRB y las cuatro variantes
voraces GreedyAll, GreedyMin, GreedyAllC y GreedyMinC.

Todos los desempates favorecen el id más bajo; las comparaciones de
punto flotante usan una tolerancia relativa de 1e-12.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .bisection import bisect
from .graph_core import Graph
from .ordering import reverse_cuthill_mckee_ordering
from .topology import ProcessorGraph, TimeMatrix, all_pairs_time, centrality_sums

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12

ALGORITHMS = (
    "initial",
    "random",
    "rcm",
    "drb",
    "greedyall",
    "greedymin",
    "greedyallc",
    "greedyminc",
)
OBJECTIVES = ("sum", "max")

Trace = List[Tuple[int, int]]


class MappingError(ValueError):
    """Mapeo inválido o tamaños incompatibles."""


@dataclass(frozen=True, eq=False)
class Mapping:
    """Biyección Π entre vértices de G_c y nodos de G_p."""
    pi: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.int64)
        object.__setattr__(self, "pi", pi)
        if pi.ndim != 1 or not np.array_equal(np.sort(pi), np.arange(len(pi))):
            raise MappingError("pi no es una permutación")

    @property
    def k(self) -> int:
        return len(self.pi)

    def __getitem__(self, v: int) -> int:
        return int(self.pi[v])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mapping):
            return NotImplemented
        return np.array_equal(self.pi, other.pi)

    def __hash__(self) -> int:
        return hash(self.pi.tobytes())


def _check_sizes(k_c: int, k_p: int) -> None:
    if k_c != k_p:
        raise MappingError(f"|V_c| = {k_c} distinto de |V_p| = {k_p}")


def _tolerance(best: float) -> float:
    return TIE_TOLERANCE * max(1.0, abs(best))


def _argmax(values: np.ndarray, free: np.ndarray) -> int:
    best = values[free].max()
    return int(np.flatnonzero(free & (values >= best - _tolerance(best)))[0])


def _argmin(values: np.ndarray, free: np.ndarray) -> int:
    best = values[free].min()
    return int(np.flatnonzero(free & (values <= best + _tolerance(best)))[0])


def _argmin_then(primary: np.ndarray, secondary: np.ndarray, free: np.ndarray) -> int:
    """Mínimo lexicográfico (primary, secondary, id) con tolerancia."""
    best = primary[free].min()
    tied = free & (primary <= best + _tolerance(best))
    return _argmin(secondary, tied)


class GreedyState:
    """Vectores incrementales de los algoritmos voraces.

    sum_c[v]: peso total de v hacia los vértices ya mapeados.
    max_c[v]: mayor peso individual de v hacia los ya mapeados.
    sum_p[x]: suma de t(x, Π(u)) sobre los ya mapeados.
    """

    def __init__(self, g_c: Graph, tm: TimeMatrix):
        _check_sizes(g_c.n, tm.k)
        k = g_c.n
        self.g_c = g_c
        self.tm = tm
        self.sum_c = np.zeros(k, dtype=np.float64)
        self.max_c = np.zeros(k, dtype=np.float64)
        self.sum_p = np.zeros(k, dtype=np.float64)
        self.assigned_c = np.zeros(k, dtype=bool)
        self.assigned_p = np.zeros(k, dtype=bool)
        self.pi = np.full(k, -1, dtype=np.int64)

    @property
    def free_c(self) -> np.ndarray:
        return ~self.assigned_c

    @property
    def free_p(self) -> np.ndarray:
        return ~self.assigned_p

    def assign(self, v_c: int, v_p: int) -> None:
        self.assigned_c[v_c] = True
        self.assigned_p[v_p] = True
        self.pi[v_c] = v_p
        for u, w in self.g_c.neighbors(v_c):
            self.sum_c[u] += w
            if w > self.max_c[u]:
                self.max_c[u] = w
        self.sum_p += self.tm.t[v_p]

    def mapping_cost(self, v_c: int, objective: str = "sum") -> np.ndarray:
        """Costo (para cada nodo) de colocar v_c ahí, según sus vecinos ya mapeados."""
        mapped = [(u, w) for u, w in self.g_c.neighbors(v_c) if self.assigned_c[u]]
        if not mapped:
            return np.zeros(self.tm.k, dtype=np.float64)
        images = self.pi[[u for u, _ in mapped]]
        weights = np.array([w for _, w in mapped], dtype=np.float64)
        if objective == "max":
            return (self.tm.t[:, images] * weights).max(axis=1)
        return self.tm.t[:, images] @ weights

    def mapping(self) -> Mapping:
        return Mapping(self.pi.copy())


def _heaviest_vertex(g_c: Graph) -> int:
    indptr, _, weights = g_c.csr()
    owner = np.repeat(np.arange(g_c.n), np.diff(indptr))
    degrees = np.bincount(owner, weights=weights, minlength=g_c.n)
    return _argmax(degrees, np.ones(g_c.n, dtype=bool))


def _most_central(tm: TimeMatrix) -> int:
    return _argmin(centrality_sums(tm), np.ones(tm.k, dtype=bool))


def _check_objective(objective: str) -> None:
    if objective not in OBJECTIVES:
        raise MappingError(f"objetivo desconocido {objective!r}; opciones: {', '.join(OBJECTIVES)}")


def _greedy(g_c: Graph, tm: TimeMatrix, first_p: Callable[[], int],
            pick_c: Callable[[GreedyState], int],
            pick_p: Callable[[GreedyState, int, int], int],
            trace: Optional[Trace]) -> Mapping:
    state = GreedyState(g_c, tm)
    v_c = _heaviest_vertex(g_c)
    v_p = first_p()
    while True:
        state.assign(v_c, v_p)
        if trace is not None:
            trace.append((v_c, v_p))
        if state.assigned_c.all():
            break
        previous_p = v_p
        v_c = pick_c(state)
        v_p = pick_p(state, v_c, previous_p)
    if trace is not None:
        logger.debug(f"Traza voraz: {trace}")
    return state.mapping()


def _by_sum_c(state: GreedyState) -> int:
    return _argmax(state.sum_c, state.free_c)


def _by_max_c(state: GreedyState) -> int:
    return _argmax(state.max_c, state.free_c)


def map_identity(k: int) -> Mapping:
    if k < 1:
        raise MappingError(f"k debe ser >= 1 (k={k})")
    return Mapping(np.arange(k))


def map_random(k: int, seed: Optional[int] = None) -> Mapping:
    """Permutación uniforme (Fisher-Yates del generador de numpy)."""
    if k < 1:
        raise MappingError(f"k debe ser >= 1 (k={k})")
    return Mapping(np.random.default_rng(seed).permutation(k))


def map_rcm(g_c: Graph, p: ProcessorGraph) -> Mapping:
    """El i-ésimo vértice del RCM de G_c va al i-ésimo nodo del RCM de G_p."""
    _check_sizes(g_c.n, p.k)
    order_c = np.asarray(reverse_cuthill_mckee_ordering(g_c), dtype=np.int64)
    order_p = np.asarray(reverse_cuthill_mckee_ordering(p.graph), dtype=np.int64)
    pi = np.empty(g_c.n, dtype=np.int64)
    pi[order_c] = order_p
    return Mapping(pi)


def map_drb(g_c: Graph, p: ProcessorGraph, seed: Optional[int] = None) -> Mapping:
    """Bisección recursiva dual: mitad 0 de G_c con mitad 0 de G_p, 1 con 1."""
    _check_sizes(g_c.n, p.k)
    rng = np.random.default_rng(seed) if seed is not None else None

    def next_seed() -> Optional[int]:
        return None if rng is None else int(rng.integers(2**31))

    pi = np.empty(g_c.n, dtype=np.int64)
    stack = [(list(range(g_c.n)), list(range(p.k)))]
    while stack:
        comm, procs = stack.pop()
        if len(comm) == 1:
            pi[comm[0]] = procs[0]
            continue
        size0 = (len(comm) + 1) // 2
        half_c = bisect(g_c.induced_subgraph(comm), seed=next_seed(), size0=size0, by_weight=False)
        half_p = bisect(p.graph.induced_subgraph(procs), seed=next_seed(), size0=size0, by_weight=False)
        for which in (1, 0):
            stack.append((
                [comm[i] for i in half_c.members(which)],
                [procs[i] for i in half_p.members(which)],
            ))
    return Mapping(pi)


def map_greedy_all(g_c: Graph, tm: TimeMatrix, trace: Optional[Trace] = None) -> Mapping:
    """GreedyAll: v_c por mayor sum_c, v_p por menor sum_p, elegidos por separado."""
    _check_sizes(g_c.n, tm.k)
    return _greedy(
        g_c, tm,
        first_p=lambda: _most_central(tm),
        pick_c=_by_sum_c,
        pick_p=lambda state, v_c, prev: _argmin(state.sum_p, state.free_p),
        trace=trace,
    )


def map_greedy_min(g_c: Graph, tm: TimeMatrix, seed: Optional[int] = None,
                   trace: Optional[Trace] = None,
                   start_node: Optional[int] = None) -> Mapping:
    """GreedyMin: arranque aleatorio y siempre el nodo libre más cercano al anterior."""
    _check_sizes(g_c.n, tm.k)
    if start_node is not None and not 0 <= start_node < tm.k:
        raise MappingError(f"nodo inicial {start_node} fuera de rango [0, {tm.k})")

    def first_p() -> int:
        if start_node is not None:
            return int(start_node)
        return int(np.random.default_rng(seed).integers(tm.k))

    return _greedy(
        g_c, tm,
        first_p=first_p,
        pick_c=_by_max_c,
        pick_p=lambda state, v_c, prev: _argmin(tm.t[prev], state.free_p),
        trace=trace,
    )


def _eq5_picker(objective: str) -> Callable[[GreedyState, int, int], int]:
    def pick(state: GreedyState, v_c: int, previous_p: int) -> int:
        cost = state.mapping_cost(v_c, objective)
        return _argmin_then(cost, state.sum_p, state.free_p)
    return pick


def map_greedy_all_c(g_c: Graph, tm: TimeMatrix, objective: str = "sum",
                     trace: Optional[Trace] = None) -> Mapping:
    """GreedyAllC: como GreedyAll, pero v_p minimiza el tiempo de comunicación agregado."""
    _check_sizes(g_c.n, tm.k)
    _check_objective(objective)
    return _greedy(
        g_c, tm,
        first_p=lambda: _most_central(tm),
        pick_c=_by_sum_c,
        pick_p=_eq5_picker(objective),
        trace=trace,
    )


def map_greedy_min_c(g_c: Graph, tm: TimeMatrix, objective: str = "sum",
                     trace: Optional[Trace] = None) -> Mapping:
    """GreedyMinC: regla de v_c de GreedyMin y regla de v_p de GreedyAllC, arranque central."""
    _check_sizes(g_c.n, tm.k)
    _check_objective(objective)
    return _greedy(
        g_c, tm,
        first_p=lambda: _most_central(tm),
        pick_c=_by_max_c,
        pick_p=_eq5_picker(objective),
        trace=trace,
    )


def run_mapper(name: str, g_c: Graph, p: ProcessorGraph,
               tm: Optional[TimeMatrix] = None, seed: Optional[int] = None,
               objective: str = "sum", trace: Optional[Trace] = None,
               start_node: Optional[int] = None) -> Mapping:
    """Despacha por nombre de algoritmo (ver ALGORITHMS)."""
    name = name.lower()
    if name not in ALGORITHMS:
        raise MappingError(f"algoritmo desconocido {name!r}; opciones: {', '.join(ALGORITHMS)}")
    if name == "initial":
        _check_sizes(g_c.n, p.k)
        return map_identity(p.k)
    if name == "random":
        _check_sizes(g_c.n, p.k)
        return map_random(p.k, seed)
    if name == "rcm":
        return map_rcm(g_c, p)
    if name == "drb":
        return map_drb(g_c, p, seed)

    tm = tm if tm is not None else all_pairs_time(p)
    if name == "greedyall":
        return map_greedy_all(g_c, tm, trace=trace)
    if name == "greedymin":
        return map_greedy_min(g_c, tm, seed, trace=trace, start_node=start_node)
    if name == "greedyallc":
        return map_greedy_all_c(g_c, tm, objective, trace=trace)
    return map_greedy_min_c(g_c, tm, objective, trace=trace)


def resolve_algorithms(names: Sequence[str]) -> List[str]:
    """Expande 'all' y valida una lista de selectores."""
    resolved: List[str] = []
    for name in names:
        for part in name.lower().split(","):
            part = part.strip()
            if not part:
                continue
            if part == "all":
                resolved.extend(a for a in ALGORITHMS if a not in resolved)
            elif part in ALGORITHMS:
                if part not in resolved:
                    resolved.append(part)
            else:
                raise MappingError(f"algoritmo desconocido {part!r}; opciones: {', '.join(ALGORITHMS)}")
    return resolved

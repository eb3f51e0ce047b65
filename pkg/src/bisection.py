"""
Bisección balanceada de grafos.

Crecimiento de región por BFS desde los dos extremos de un diámetro
aproximado, seguido de refinamiento de frontera tipo Fiduccia-Mattheyses.
El balance se mide en peso de vértice; con pesos unitarios equivale a
contar vértices. Es la pieza base del mapeo DRB y del particionador interno.
"""

import heapq
import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .graph_core import Graph
from .ordering import diameter_ends

logger = logging.getLogger(__name__)

MAX_PASSES = 10
# Movimientos consecutivos sin mejora antes de cortar una pasada
MAX_STALE_MOVES = 100
WEIGHT_EPS = 1e-9


class BisectionError(ValueError):
    """Entrada inválida para la bisección."""


@dataclass(frozen=True, eq=False)
class Bisection:
    """Resultado de una bisección: lado 0/1 por vértice y peso del corte."""
    side: np.ndarray
    cut_weight: float

    @property
    def sizes(self):
        ones = int(self.side.sum())
        return len(self.side) - ones, ones

    def members(self, which: int) -> List[int]:
        return [int(v) for v in np.flatnonzero(self.side == which)]


def cut_weight(g: Graph, side: np.ndarray) -> float:
    """Suma de pesos de las aristas que cruzan entre los dos lados."""
    total = 0.0
    for ref, w in g.iter_edges():
        if side[ref.u] != side[ref.v]:
            total += w
    return total


def _grow_region(g: Graph, weights: np.ndarray, start: int, target: float, fill: int) -> np.ndarray:
    """Marca con `fill` vértices en orden BFS desde start hasta llegar a target.

    Un vértice que haría pasar el peso de target se salta, pero sus vecinos
    se siguen recorriendo.
    """
    side = np.full(g.n, 1 - fill, dtype=np.int8)
    claimed = 0.0
    visited = np.zeros(g.n, dtype=bool)
    queue: List[int] = [start]
    visited[start] = True
    head = 0
    while claimed < target - WEIGHT_EPS:
        if head == len(queue):
            unvisited = np.flatnonzero(~visited)
            if len(unvisited) == 0:
                break
            # Grafo no conexo: reiniciar en el menor id sin visitar
            nxt = int(unvisited[0])
            visited[nxt] = True
            queue.append(nxt)
        u = queue[head]
        head += 1
        if claimed + weights[u] <= target + WEIGHT_EPS:
            side[u] = fill
            claimed += weights[u]
        for v, _ in g.neighbors(u):
            if not visited[v]:
                visited[v] = True
                queue.append(v)
    if claimed == 0.0:
        side[int(np.argmin(weights))] = fill
    return side


def _gains(g: Graph, side: np.ndarray) -> np.ndarray:
    gain = np.zeros(g.n, dtype=np.float64)
    for u in range(g.n):
        for v, w in g.neighbors(u):
            gain[u] += w if side[v] != side[u] else -w
    return gain


def _fm_pass(g: Graph, weights: np.ndarray, side: np.ndarray, target: float, slack: float) -> float:
    """Una pasada FM; modifica side en el sitio y devuelve la mejora obtenida.

    Durante la pasada el peso del lado 0 puede alejarse de target hasta
    max(peso máximo de vértice, slack); solo se aceptan prefijos con
    desvío <= slack.
    """
    gain = _gains(g, side)
    locked = np.zeros(g.n, dtype=bool)
    heaps = ([], [])
    for u in range(g.n):
        if any(side[v] != side[u] for v, _ in g.neighbors(u)):
            heapq.heappush(heaps[side[u]], (-gain[u], u))

    tolerance = max(float(weights.max()), slack) + WEIGHT_EPS
    current0 = float(weights[side == 0].sum())
    moves: List[int] = []
    cumulative = 0.0
    best_gain = 0.0
    best_len = 0
    stale = 0

    def top(which: int) -> Optional[tuple]:
        heap = heaps[which]
        while heap:
            neg, u = heap[0]
            if locked[u] or side[u] != which or -neg != gain[u]:
                heapq.heappop(heap)
                continue
            return heap[0]
        return None

    while stale < MAX_STALE_MOVES:
        candidates = []
        for which, sign in ((0, -1.0), (1, 1.0)):
            entry = top(which)
            if entry is not None and abs(current0 + sign * weights[entry[1]] - target) <= tolerance:
                candidates.append(entry)
        if not candidates:
            break
        _, u = min(candidates)
        heapq.heappop(heaps[side[u]])

        origin = side[u]
        side[u] = 1 - origin
        locked[u] = True
        current0 += weights[u] if origin == 1 else -weights[u]
        cumulative += gain[u]
        moves.append(u)
        gain[u] = -gain[u]
        for v, w in g.neighbors(u):
            if locked[v]:
                continue
            # v ahora comparte lado con u si side[v] == side[u]
            gain[v] += -2 * w if side[v] == side[u] else 2 * w
            heapq.heappush(heaps[side[v]], (-gain[v], v))

        if abs(current0 - target) <= slack + WEIGHT_EPS and cumulative > best_gain:
            best_gain = cumulative
            best_len = len(moves)
            stale = 0
        else:
            stale += 1

    for u in reversed(moves[best_len:]):
        side[u] = 1 - side[u]
    logger.debug(f"Pasada FM: {len(moves)} movimientos, mejora {best_gain}")
    return best_gain


def bisect(g: Graph, seed: Optional[int] = None, size0: Optional[float] = None,
           by_weight: bool = True) -> Bisection:
    """Bisección balanceada de g.

    Se prueban cuatro regiones iniciales (cada extremo del diámetro
    aproximado, creciendo el lado 0 o el lado 1) y se refina cada una con
    FM; gana el menor desvío de balance y luego el menor corte (empates:
    la primera probada).

    Args:
        g: Grafo con al menos 2 vértices
        seed: Semilla para el vértice de arranque del primer barrido BFS
        size0: Peso objetivo del lado 0 (por defecto la mitad, redondeada
            hacia arriba si el peso total es entero)
        by_weight: Si es False se balancea por número de vértices

    Returns:
        Bisection cuyo lado 0 pesa size0 cuando es alcanzable
    """
    n = g.n
    if n < 2:
        raise BisectionError(f"la bisección requiere n >= 2 (n={n})")
    weights = np.asarray(g.vertex_weights, dtype=np.float64) if by_weight else np.ones(n)
    total = float(weights.sum())
    if size0 is None:
        size0 = math.ceil(total / 2) if total.is_integer() else total / 2
    if not 0 < size0 < total:
        raise BisectionError(f"tamaño de lado inválido {size0} para un peso total {total}")

    start = 0 if seed is None else int(np.random.default_rng(seed).integers(n))
    first, origin = diameter_ends(g, start)

    best_side = None
    best_key = None
    for root in dict.fromkeys((origin, first)):
        for fill, target in ((0, size0), (1, total - size0)):
            side = _grow_region(g, weights, root, target, fill)
            slack = abs(float(weights[side == 0].sum()) - size0)
            for _ in range(MAX_PASSES):
                if _fm_pass(g, weights, side, size0, slack) <= 0:
                    break
            key = (abs(float(weights[side == 0].sum()) - size0), cut_weight(g, side))
            if best_key is None or key < best_key:
                best_key, best_side = key, side

    logger.debug(f"Bisección de {n} vértices: desvío {best_key[0]}, corte {best_key[1]}")
    return Bisection(side=best_side, cut_weight=best_key[1])

"""
Ordenamientos de vértices basados en BFS.

Contiene los extremos de un diámetro aproximado (doble barrido BFS),
que usan la bisección y el ordenamiento Reverse Cuthill-McKee del mapeo
RCM y del particionador por ordenamiento.
"""

from collections import deque
from typing import List, Tuple

import numpy as np

from .graph_core import Graph


def bfs_levels(g: Graph, source: int) -> np.ndarray:
    """Distancias en saltos desde source (-1 si no es alcanzable)."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v, _ in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _farthest(dist: np.ndarray) -> int:
    # argmax devuelve el primer máximo: desempate por id más bajo
    return int(np.argmax(dist))


def diameter_ends(g: Graph, start: int = 0) -> Tuple[int, int]:
    """Extremos (a, b) de un diámetro aproximado: a es el más lejano a start
    y b el más lejano a a."""
    first = _farthest(bfs_levels(g, start))
    return first, _farthest(bfs_levels(g, first))


def pseudo_peripheral_vertex(g: Graph, start: int = 0) -> int:
    """Aproxima un extremo de un diámetro con dos barridos BFS."""
    return diameter_ends(g, start)[1]


def components(g: Graph) -> List[List[int]]:
    """Componentes conexas, ordenadas por su id más bajo."""
    seen = np.zeros(g.n, dtype=bool)
    result = []
    for v in range(g.n):
        if seen[v]:
            continue
        dist = bfs_levels(g, v)
        members = np.flatnonzero(dist >= 0)
        seen[members] = True
        result.append([int(x) for x in members])
    return result


def _cuthill_mckee_component(g: Graph, start: int) -> List[int]:
    order = [start]
    visited = {start}
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        fresh = [v for v, _ in g.neighbors(u) if v not in visited]
        fresh.sort(key=lambda v: (g.degree(v), v))
        for v in fresh:
            visited.add(v)
            order.append(v)
    return order


def reverse_cuthill_mckee_ordering(g: Graph) -> List[int]:
    """RCM: Cuthill-McKee (vecinos por grado ascendente y luego id) de cada
    componente, invertido; componentes concatenadas por id más bajo."""
    order: List[int] = []
    for comp in components(g):
        start = pseudo_peripheral_vertex(g, comp[0])
        order.extend(reversed(_cuthill_mckee_component(g, start)))
    return order


"""
Métricas de calidad de un mapeo.

Dilatación por arista, dilatación máxima y media, congestión máxima
ponderada (enrutamiento uniforme sobre caminos mínimos en la métrica de
tiempo) y cocientes Q respecto del mapeo Initial.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .graph_core import EdgeRef, Graph
from .mappers import Mapping
from .topology import ProcessorGraph, ShortestPathRouting, TimeMatrix, all_pairs_time

logger = logging.getLogger(__name__)


class MetricsError(ValueError):
    """Métrica indefinida para las entradas dadas."""


@dataclass(frozen=True)
class MetricsReport:
    max_dilation: float
    avg_dilation: float
    max_congestion: float
    wall_time: float = 0.0


@dataclass(frozen=True)
class QReport:
    """Cocientes respecto de la línea base (< 1 significa mejor calidad)."""
    q_mc: float
    q_md: float
    q_ad: float


def _pi(pi) -> np.ndarray:
    return pi.pi if isinstance(pi, Mapping) else np.asarray(pi, dtype=np.int64)


def _comm_edges(g_c: Graph) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    indptr, indices, weights = g_c.csr()
    src = np.repeat(np.arange(g_c.n), np.diff(indptr))
    keep = src < indices
    return src[keep], indices[keep], weights[keep]


def _check(g_c: Graph, k: int, pi: np.ndarray) -> None:
    if g_c.n != k or len(pi) != k:
        raise MetricsError(f"tamaños incompatibles: |V_c|={g_c.n}, |V_p|={k}, |pi|={len(pi)}")


def _dilations(g_c: Graph, tm: TimeMatrix, pi: np.ndarray) -> np.ndarray:
    u, v, w = _comm_edges(g_c)
    return w * tm.t[pi[u], pi[v]]


def dilation_per_edge(g_c: Graph, tm: TimeMatrix, pi) -> Dict[EdgeRef, float]:
    """d(e) = ω_c(u,v)·t(Π(u), Π(v)) para cada arista de G_c."""
    pi = _pi(pi)
    _check(g_c, tm.k, pi)
    values = _dilations(g_c, tm, pi)
    return {ref: float(d) for (ref, _), d in zip(g_c.iter_edges(), values)}


def max_avg_dilation(g_c: Graph, tm: TimeMatrix, pi) -> Tuple[float, float]:
    """(mD, aD); sin aristas ambas valen 0."""
    pi = _pi(pi)
    _check(g_c, tm.k, pi)
    values = _dilations(g_c, tm, pi)
    if len(values) == 0:
        return 0.0, 0.0
    return float(values.max()), float(values.sum() / len(values))


def congestion_loads(g_c: Graph, p: ProcessorGraph, pi,
                     routing: Optional[ShortestPathRouting] = None) -> Dict[EdgeRef, float]:
    """Volumen enrutado por cada enlace de G_p, antes de dividir por su ancho de banda."""
    pi = _pi(pi)
    _check(g_c, p.k, pi)
    routing = routing if routing is not None else ShortestPathRouting(p)
    u, v, w = _comm_edges(g_c)
    loads = routing.route_volumes(pi[u], pi[v], w)
    return {ref: float(x) for ref, x in zip(routing.refs, loads)}


def max_congestion(g_c: Graph, p: ProcessorGraph, pi,
                   routing: Optional[ShortestPathRouting] = None) -> float:
    """mC: máximo sobre los enlaces de G_p de carga / ancho de banda."""
    pi = _pi(pi)
    _check(g_c, p.k, pi)
    if g_c.num_edges == 0:
        return 0.0
    routing = routing if routing is not None else ShortestPathRouting(p)
    u, v, w = _comm_edges(g_c)
    loads = routing.route_volumes(pi[u], pi[v], w)
    return float((loads / routing.bandwidths).max())


def evaluate(g_c: Graph, p: ProcessorGraph, pi, wall_time: float = 0.0,
             tm: Optional[TimeMatrix] = None,
             routing: Optional[ShortestPathRouting] = None) -> MetricsReport:
    if routing is not None:
        tm = routing.tm
    tm = tm if tm is not None else all_pairs_time(p)
    md, ad = max_avg_dilation(g_c, tm, pi)
    if g_c.num_edges and routing is None:
        routing = ShortestPathRouting(p, tm)
    mc = max_congestion(g_c, p, pi, routing)
    return MetricsReport(max_dilation=md, avg_dilation=ad, max_congestion=mc, wall_time=wall_time)


def q_ratios(report: MetricsReport, baseline: MetricsReport) -> QReport:
    """Cocientes elemento a elemento report / baseline."""
    pairs = {
        "mC": (report.max_congestion, baseline.max_congestion),
        "mD": (report.max_dilation, baseline.max_dilation),
        "aD": (report.avg_dilation, baseline.avg_dilation),
    }
    for name, (_, base) in pairs.items():
        if base <= 0:
            raise MetricsError(f"la línea base tiene {name} = {base}; el cociente no está definido")
    return QReport(
        q_mc=pairs["mC"][0] / pairs["mC"][1],
        q_md=pairs["mD"][0] / pairs["mD"][1],
        q_ad=pairs["aD"][0] / pairs["aD"][1],
    )

"""
Arnés de experimentos.

Ejecuta celdas (instancia x partición x topología x algoritmo x semilla),
agrega mínimo/media/máximo por instancia, medias geométricas por clase de
instancias y cocientes Q respecto de la línea base, y lee/escribe los CSV
de resultados.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.stats import gmean

from .bench_monitor import BenchMonitor
from .commgraph import (
    Partition,
    build_comm_graph,
    ordering_partition,
    partition_quality,
    read_partition,
    simple_partition,
)
from .graph_core import Graph, read_metis_file
from .mappers import ALGORITHMS, OBJECTIVES, run_mapper
from .metrics import MetricsReport, evaluate
from .topology import ProcessorGraph, ShortestPathRouting, all_pairs_time, parse_topology_spec

logger = logging.getLogger(__name__)

METRICS = ("t", "mC", "mD", "aD")
Q_METRICS = ("mC", "mD", "aD")
STATS = ("min", "mean", "max")
PARTITION_METRICS = ("Time", "Cut", "MCV")
PARTITIONERS = ("simple", "ordering")
GRAPH_SUFFIXES = (".graph", ".metis", ".chaco")
KEY_COLUMNS = ["class", "topology", "algorithm"]
FLOAT_FORMAT = "%.17g"


class HarnessError(ValueError):
    """Configuración de experimento inválida o resultados incompatibles."""


@dataclass
class ExperimentConfig:
    """Configuración de un barrido.

    Si hay archivos de partición se usan tal cual (una sola instancia);
    si no, cada semilla genera su propia partición con el particionador
    interno en k bloques.
    """
    graphs: List[Path]
    topologies: List[str]
    algorithms: List[str] = field(default_factory=lambda: list(ALGORITHMS))
    seeds: List[int] = field(default_factory=lambda: [0])
    partition_files: List[Path] = field(default_factory=list)
    k: Optional[int] = None
    epsilon: float = 0.0
    partitioner: str = "simple"
    bandwidth: float = 1.0
    objective: str = "sum"
    threads: int = 1
    instance_class: Optional[str] = None

    def __post_init__(self):
        self.graphs = [Path(g) for g in self.graphs]
        self.partition_files = [Path(p) for p in self.partition_files]
        if not self.graphs:
            raise HarnessError("no hay grafos de aplicación")
        if not self.topologies:
            raise HarnessError("no hay topologías")
        if not self.seeds:
            raise HarnessError("la lista de semillas está vacía")
        if not self.algorithms:
            raise HarnessError("no hay algoritmos")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise HarnessError(f"algoritmos desconocidos: {unknown}")
        if self.partition_files and len(self.graphs) != 1:
            raise HarnessError("los archivos de partición requieren exactamente un grafo")
        if not self.partition_files and self.k is None:
            raise HarnessError("indique archivos de partición o k para el particionador interno")
        if self.partitioner not in PARTITIONERS:
            raise HarnessError(f"particionador desconocido {self.partitioner!r}")
        if self.objective not in OBJECTIVES:
            raise HarnessError(f"objetivo desconocido {self.objective!r}")
        if self.threads < 1:
            raise HarnessError(f"threads debe ser >= 1 (recibido {self.threads})")


@dataclass
class PreparedTopology:
    """Grafo de procesadores con su precálculo (t, σ), hecho una sola vez."""
    spec: str
    processor: ProcessorGraph
    routing: ShortestPathRouting
    precompute_seconds: float


def split_seed(master: int) -> Tuple[int, int, int]:
    """Divide una semilla maestra en (partición, Random, GreedyMin)."""
    children = np.random.SeedSequence(master).spawn(3)
    return tuple(int(child.generate_state(1)[0]) for child in children)


def discover_graphs(paths: Sequence[Union[str, Path]]) -> List[Path]:
    """Expande directorios a sus archivos de grafo, en orden alfabético."""
    found: List[Path] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            found.extend(sorted(p for p in path.iterdir() if p.suffix in GRAPH_SUFFIXES))
        elif path.exists():
            found.append(path)
        else:
            raise HarnessError(f"no existe el grafo {path}")
    if not found:
        raise HarnessError(f"no se encontraron grafos en {[str(p) for p in paths]}")
    return found


def prepare_topology(spec: str, bandwidth: float = 1.0) -> PreparedTopology:
    started = time.perf_counter()
    processor = parse_topology_spec(spec, bandwidth)
    routing = ShortestPathRouting(processor, all_pairs_time(processor))
    elapsed = time.perf_counter() - started
    logger.info(f"Topología {spec}: {processor.k} nodos, precálculo en {elapsed:.3f}s")
    return PreparedTopology(spec, processor, routing, elapsed)


def run_cell(g_a: Graph, partition: Partition, topology: ProcessorGraph, algorithm: str,
             seed: int, routing: Optional[ShortestPathRouting] = None,
             objective: str = "sum") -> MetricsReport:
    """Construye G_c, mapea y evalúa una celda.

    El tiempo medido es solo el del mapeador: la matriz de tiempos y los
    conteos de caminos se calculan fuera (una vez por topología).
    """
    if partition.k != topology.k:
        raise HarnessError(f"k = {partition.k} no coincide con |V_p| = {topology.k} ({topology.label})")
    g_c = build_comm_graph(g_a, partition)
    routing = routing if routing is not None else ShortestPathRouting(topology)
    _, random_seed, greedy_seed = split_seed(seed)
    mapper_seed = greedy_seed if algorithm == "greedymin" else random_seed

    started = time.perf_counter()
    mapping = run_mapper(algorithm, g_c, topology, routing.tm, seed=mapper_seed, objective=objective)
    elapsed = time.perf_counter() - started

    return evaluate(g_c, topology, mapping, wall_time=elapsed, routing=routing)


def _instance_partitions(config: ExperimentConfig, g_a: Graph,
                         block_dims: Optional[Tuple[int, ...]] = None) -> List[Tuple[str, int, Partition, float]]:
    """(nombre, semilla maestra, partición, segundos) de cada réplica.

    block_dims numera los bloques del particionador simple sobre la malla
    de la primera topología del barrido.
    """
    replicas = []
    if config.partition_files:
        for path in config.partition_files:
            partition = read_partition(path, k=config.k, epsilon=config.epsilon)
            for seed in config.seeds:
                replicas.append((path.name, seed, partition, float("nan")))
        return replicas

    for seed in config.seeds:
        partition_seed, _, _ = split_seed(seed)
        started = time.perf_counter()
        if config.partitioner == "simple":
            partition = simple_partition(g_a, config.k, config.epsilon, seed=partition_seed,
                                         dims=block_dims)
        else:
            partition = ordering_partition(g_a, config.k, seed=partition_seed)
        elapsed = time.perf_counter() - started
        replicas.append((f"{config.partitioner}-{seed}", seed, partition, elapsed))
    return replicas


def run_benchmark(config: ExperimentConfig,
                  monitor: Optional[BenchMonitor] = None) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Ejecuta el barrido completo.

    Returns:
        (celdas, particiones): una fila por celda y una por partición usada
    """
    monitor = monitor if monitor is not None else BenchMonitor()
    topologies = [prepare_topology(spec, config.bandwidth) for spec in config.topologies]
    first = topologies[0].processor
    block_dims = first.dims if first.k == config.k else None

    jobs = []
    partition_rows = []
    for graph_path in config.graphs:
        g_a = read_metis_file(graph_path)
        instance = graph_path.stem
        instance_class = config.instance_class or graph_path.parent.name or "default"
        seen_partitions = set()
        for name, seed, partition, seconds in _instance_partitions(config, g_a, block_dims):
            for prepared in topologies:
                if partition.k != prepared.processor.k:
                    raise HarnessError(
                        f"{name}: k = {partition.k} no coincide con |V_p| = {prepared.processor.k} "
                        f"de {prepared.spec}")
            if name not in seen_partitions:
                seen_partitions.add(name)
                quality = partition_quality(g_a, partition, seconds)
                if quality.balance > partition.epsilon:
                    monitor.registrar_alerta(
                        'PARTICION_DESBALANCEADA',
                        f"{instance}/{name}: desbalance {quality.balance:.4f} > {partition.epsilon}",
                        'MEDIO', instancia=instance)
                partition_rows.append({
                    "class": instance_class,
                    "instance": instance,
                    "partitioner": "file" if config.partition_files else config.partitioner,
                    "partition": name,
                    "Time": quality.time,
                    "Cut": quality.edge_cut,
                    "MCV": quality.mcv,
                    "imbalance": quality.balance,
                })
            for prepared in topologies:
                for algorithm in config.algorithms:
                    jobs.append((instance_class, instance, name, seed, g_a, partition, prepared, algorithm))

    def work(job) -> Dict[str, object]:
        instance_class, instance, name, seed, g_a, partition, prepared, algorithm = job
        medicion = monitor.iniciar_medicion(instance, prepared.spec, algorithm, seed)
        try:
            report = run_cell(g_a, partition, prepared.processor, algorithm, seed,
                              prepared.routing, config.objective)
        except Exception as e:
            monitor.finalizar_medicion(medicion, estado='error', errores=[str(e)])
            raise
        monitor.finalizar_medicion(medicion)
        partition_seed, random_seed, greedy_seed = split_seed(seed)
        logger.debug(f"Celda {instance}/{name}/{prepared.spec}/{algorithm}/{seed} terminada")
        return {
            "class": instance_class,
            "instance": instance,
            "partition": name,
            "topology": prepared.spec,
            "algorithm": algorithm,
            "seed": seed,
            "partition_seed": partition_seed,
            "random_seed": random_seed,
            "greedy_seed": greedy_seed,
            "k": prepared.processor.k,
            "t": report.wall_time,
            "mC": report.max_congestion,
            "mD": report.max_dilation,
            "aD": report.avg_dilation,
        }

    logger.info(f"Ejecutando {len(jobs)} celdas con {config.threads} hilo(s)")
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        rows = list(pool.map(work, jobs))
    logger.info(f"Barrido terminado: {len(rows)} celdas")

    return pd.DataFrame(rows), pd.DataFrame(partition_rows)


def geometric_mean(values: Sequence[float]) -> float:
    """Media geométrica; exacta si todos los valores son iguales y 0 si alguno es 0."""
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        raise HarnessError("media geométrica de un conjunto vacío")
    if np.all(values == values[0]):
        return float(values[0])
    if np.any(values <= 0):
        return 0.0
    return float(gmean(values))


def _ordered(frame: pd.DataFrame, column: str, order: Sequence[str]) -> pd.DataFrame:
    rank = {name: i for i, name in enumerate(order)}
    return frame.assign(_rank=frame[column].map(lambda x: rank.get(x, len(rank)))) \
        .sort_values(["class", "topology", "_rank"], kind="stable").drop(columns="_rank")


def _min_mean_max(frame: pd.DataFrame, keys: List[str], metrics: Sequence[str]) -> pd.DataFrame:
    grouped = frame.groupby(keys, sort=False)
    out = grouped[list(metrics)].agg(["min", "mean", "max"])
    out.columns = [f"{metric}_{stat}" for metric, stat in out.columns]
    for metric in metrics:
        # la media en punto flotante puede salirse del rango [min, max]
        out[f"{metric}_mean"] = out[f"{metric}_mean"].clip(out[f"{metric}_min"], out[f"{metric}_max"])
    return out.reset_index()


def _geometric_by(frame: pd.DataFrame, keys: List[str], columns: Sequence[str]) -> pd.DataFrame:
    out = frame.groupby(keys, sort=False)[list(columns)].agg(geometric_mean).reset_index()
    return out


def aggregate_frame(cells: pd.DataFrame, baseline: Optional[str] = "initial") -> pd.DataFrame:
    """Agrega celdas: min/media/max por instancia, media geométrica por clase y Q.

    Con baseline=None no se calculan cocientes Q.
    """
    if cells.empty:
        raise HarnessError("no hay celdas para agregar")
    per_instance = _min_mean_max(cells, ["class", "instance", "topology", "algorithm"], METRICS)
    value_columns = [f"{m}_{s}" for m in METRICS for s in STATS]
    rows = _geometric_by(per_instance, KEY_COLUMNS, value_columns)
    for metric in METRICS:
        rows[f"{metric}_mean"] = rows[f"{metric}_mean"].clip(rows[f"{metric}_min"], rows[f"{metric}_max"])

    if baseline is not None:
        base = rows[rows["algorithm"] == baseline].set_index(["class", "topology"])
        for key, _ in rows.groupby(["class", "topology"], sort=False):
            if key not in base.index:
                raise HarnessError(f"falta la línea base {baseline!r} para {key}")
        lookup = rows.set_index(["class", "topology"]).index
        for metric in Q_METRICS:
            for stat in STATS:
                column = f"{metric}_{stat}"
                reference = base.loc[lookup, column].to_numpy()
                values = rows[column].to_numpy()
                with np.errstate(divide="ignore", invalid="ignore"):
                    ratio = np.where(reference > 0, values / np.where(reference > 0, reference, 1.0), np.nan)
                if np.any(reference <= 0):
                    logger.warning(f"Línea base con {column} = 0: Q{column} queda indefinido")
                rows[f"Q{column}"] = ratio

    return _ordered(rows, "algorithm", ALGORITHMS).reset_index(drop=True)


def aggregate_partitions(partitions: pd.DataFrame) -> pd.DataFrame:
    """Time/Cut/MCV x min/media/max por instancia y medias geométricas por clase y particionador."""
    if partitions.empty:
        raise HarnessError("no hay particiones para agregar")
    per_instance = _min_mean_max(partitions, ["class", "instance", "partitioner"], PARTITION_METRICS)
    columns = [f"{m}_{s}" for m in PARTITION_METRICS for s in STATS]
    return _geometric_by(per_instance, ["class", "partitioner"], columns)


def compare_partitioners(rows_a: pd.DataFrame, rows_b: pd.DataFrame) -> pd.DataFrame:
    """Cocientes A/B de los doce agregados, por (clase, topología, algoritmo)."""
    value_columns = [f"{m}_{s}" for m in METRICS for s in STATS]
    a = rows_a.set_index(KEY_COLUMNS)
    b = rows_b.set_index(KEY_COLUMNS)
    for key in a.index:
        if key not in b.index:
            raise HarnessError(f"clave {key} presente en A y ausente en B")
    for key in b.index:
        if key not in a.index:
            raise HarnessError(f"clave {key} presente en B y ausente en A")
    missing = [c for c in value_columns if c not in a.columns or c not in b.columns]
    if missing:
        raise HarnessError(f"faltan columnas: {missing}")
    numerator = a[value_columns]
    denominator = b.loc[a.index, value_columns]
    with np.errstate(divide="ignore", invalid="ignore"):
        quotient = numerator.to_numpy() / denominator.to_numpy()
    out = pd.DataFrame(quotient, index=a.index, columns=value_columns)
    return out.reset_index()


def write_csv(frame: pd.DataFrame, path: Union[str, Path], float_format: str = FLOAT_FORMAT) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=float_format)
    logger.info(f"CSV guardado en {path} ({len(frame)} filas)")


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")

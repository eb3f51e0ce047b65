"""
Interfaz de línea de comandos del arnés de mapeo topológico.

Subcomandos: map (una configuración), bench (barrido completo), topo-info
(estadísticas de la matriz de tiempos), partition (particionador interno)
y compare (cocientes entre dos agregados).
"""

import time
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional

import click
import numpy as np
import pandas as pd
import typer
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .bench_monitor import BenchMonitor
from .commgraph import ordering_partition, partition_quality, simple_partition, write_partition_file
from .config import configure_logging, load_settings
from .graph_core import read_metis_file
from .harness import (
    PARTITIONERS,
    ExperimentConfig,
    aggregate_frame,
    aggregate_partitions,
    compare_partitioners,
    discover_graphs,
    prepare_topology,
    read_csv,
    run_benchmark,
    write_csv,
)
from .mappers import ALGORITHMS, OBJECTIVES, MappingError, resolve_algorithms
from .topology import TopologyError, parse_topology_spec, topology_summary

app = typer.Typer(help="Mapeo topológico de procesos sobre mallas y toros")
console = Console()


@contextmanager
def _domain_errors():
    """Convierte errores de dominio y de E/S en un mensaje y código de salida 1."""
    try:
        yield
    except (ValueError, OSError, KeyError) as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(code=1)


def _check_topologies(values: List[str]) -> List[str]:
    for spec in values:
        try:
            parse_topology_spec(spec)
        except TopologyError as e:
            raise typer.BadParameter(f"{spec!r}: {e}", param_hint="'--topology'")
    return values


def _check_algorithms(values: List[str], flag: str) -> List[str]:
    try:
        return resolve_algorithms(values)
    except MappingError as e:
        raise typer.BadParameter(str(e), param_hint=f"'{flag}'")


def _check_partitioner(value: str) -> str:
    if value not in PARTITIONERS:
        raise typer.BadParameter(f"{value!r}; opciones: {', '.join(PARTITIONERS)}")
    return value


def _check_objective(value: str) -> str:
    if value not in OBJECTIVES:
        raise typer.BadParameter(f"{value!r}; opciones: {', '.join(OBJECTIVES)}")
    return value


def _check_positive(value: Optional[float]) -> Optional[float]:
    if value is not None and not value > 0:
        raise typer.BadParameter(f"debe ser > 0 (recibido {value})")
    return value


@app.callback()
def main(log_level: Optional[str] = typer.Option(None, help="Nivel de logging (por defecto TOPOMAP_LOG_LEVEL)")):
    """Mapeo topológico de procesos sobre mallas y toros."""
    with _domain_errors():
        settings = load_settings()
    configure_logging(log_level or settings.log_level)


def _show_cells(cells: pd.DataFrame, title: str):
    table = Table(title=title)
    for column, style in (("instance", "cyan"), ("topology", "magenta"), ("algorithm", "green"),
                          ("seed", "blue"), ("t", "yellow"), ("mC", "red"), ("mD", "red"), ("aD", "red")):
        table.add_column(column, style=style)
    for row in cells.itertuples(index=False):
        table.add_row(
            str(row.instance), str(row.topology), str(row.algorithm), str(row.seed),
            f"{row.t:.4f}", f"{row.mC:.4g}", f"{row.mD:.4g}", f"{row.aD:.4g}",
        )
    console.print(table)


def _show_precompute(config: ExperimentConfig):
    table = Table(title="Precálculo por topología")
    table.add_column("Topología", style="cyan")
    table.add_column("Nodos", style="magenta")
    table.add_column("Segundos", style="green")
    for spec in config.topologies:
        prepared = prepare_topology(spec, config.bandwidth)
        table.add_row(spec, str(prepared.processor.k), f"{prepared.precompute_seconds:.4f}")
    console.print(table)


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}_{suffix}{path.suffix or '.csv'}")


@app.command("map")
def map_command(
    graph: Path = typer.Option(..., "--graph", help="Grafo de aplicación (METIS)"),
    topology: List[str] = typer.Option(..., "--topology", callback=_check_topologies,
                                       help="Topología, p. ej. torus2d:16x16 (repetible)"),
    out: Path = typer.Option(..., "--out", help="CSV con una fila por celda"),
    partition: Optional[List[Path]] = typer.Option(None, "--partition", help="Archivo de partición (repetible)"),
    k: Optional[int] = typer.Option(None, "--k", help="Bloques del particionador interno"),
    epsilon: float = typer.Option(0.0, "--epsilon", help="Desbalance permitido"),
    partitioner: str = typer.Option("simple", "--partitioner", callback=_check_partitioner,
                                    help="Particionador interno: simple | ordering"),
    algo: str = typer.Option("greedyallc", "--algo", help=f"Algoritmo: {' | '.join(ALGORITHMS)}"),
    seeds: int = typer.Option(1, "--seeds", min=1, help="Número de semillas maestras (0..N-1)"),
    bandwidth: Optional[float] = typer.Option(None, "--bandwidth", callback=_check_positive,
                                              help="Ancho de banda de cada enlace"),
    objective: str = typer.Option("sum", "--objective", callback=_check_objective,
                                  help="Objetivo de las variantes C: sum | max"),
    threads: Optional[int] = typer.Option(None, "--threads", min=1, help="Celdas en paralelo"),
    report_precompute: bool = typer.Option(False, "--report-precompute",
                                           help="Mostrar el tiempo de precálculo por topología"),
):
    """
    Mapea una instancia sobre una o más topologías y guarda las métricas por celda.
    """
    algorithms = _check_algorithms([algo], "--algo")
    with _domain_errors():
        settings = load_settings()
        config = ExperimentConfig(
            graphs=[graph],
            topologies=topology,
            algorithms=algorithms,
            seeds=list(range(seeds)),
            partition_files=partition or [],
            k=k,
            epsilon=epsilon,
            partitioner=partitioner,
            bandwidth=bandwidth or settings.default_bandwidth,
            objective=objective,
            threads=threads or settings.threads,
        )
        if report_precompute:
            _show_precompute(config)
        cells, _ = run_benchmark(config)
        write_csv(cells, out, settings.float_format)
    _show_cells(cells, "Resultados por celda")
    console.print(f"[green]CSV guardado en {out}[/green]")


@app.command()
def bench(
    graphs: List[Path] = typer.Option(..., "--graphs", help="Grafos o directorios de grafos (repetible)"),
    topology: List[str] = typer.Option(..., "--topology", callback=_check_topologies,
                                       help="Topología (repetible)"),
    k: Optional[int] = typer.Option(None, "--k", help="Bloques del particionador interno"),
    partition: Optional[List[Path]] = typer.Option(None, "--partition", help="Archivo de partición (repetible)"),
    epsilon: float = typer.Option(0.0, "--epsilon", help="Desbalance permitido"),
    partitioner: str = typer.Option("simple", "--partitioner", callback=_check_partitioner,
                                    help="Particionador interno: simple | ordering"),
    seeds: int = typer.Option(20, "--seeds", min=1, help="Número de semillas maestras (0..N-1)"),
    algos: List[str] = typer.Option(["all"], "--algos", help="Algoritmos separados por coma o 'all'"),
    baseline: str = typer.Option("initial", "--baseline", help="Algoritmo de referencia para los Q"),
    bandwidth: Optional[float] = typer.Option(None, "--bandwidth", callback=_check_positive,
                                              help="Ancho de banda de cada enlace"),
    objective: str = typer.Option("sum", "--objective", callback=_check_objective,
                                  help="Objetivo de las variantes C: sum | max"),
    threads: Optional[int] = typer.Option(None, "--threads", min=1, help="Celdas en paralelo"),
    class_name: Optional[str] = typer.Option(None, "--class-name",
                                             help="Clase de instancias (por defecto, el directorio)"),
    out: Path = typer.Option(Path("aggregate.csv"), "--out", help="CSV agregado"),
    dashboard: Optional[Path] = typer.Option(None, "--dashboard", help="JSON con el resumen del monitor"),
    report_precompute: bool = typer.Option(False, "--report-precompute",
                                           help="Mostrar el tiempo de precálculo por topología"),
):
    """
    Barrido completo: celdas, agregados por clase y cocientes Q.
    """
    algorithms = _check_algorithms(algos, "--algos")
    if baseline not in ALGORITHMS:
        raise typer.BadParameter(f"{baseline!r} no es un algoritmo", param_hint="'--baseline'")
    with _domain_errors():
        settings = load_settings()
        config = ExperimentConfig(
            graphs=discover_graphs(graphs),
            topologies=topology,
            algorithms=algorithms,
            seeds=list(range(seeds)),
            partition_files=partition or [],
            k=k,
            epsilon=epsilon,
            partitioner=partitioner,
            bandwidth=bandwidth or settings.default_bandwidth,
            objective=objective,
            threads=threads or settings.threads,
            instance_class=class_name,
        )
        if report_precompute:
            _show_precompute(config)
        monitor = BenchMonitor()
        cells, partitions = run_benchmark(config, monitor)
        rows = aggregate_frame(cells, baseline if baseline in algorithms else None)
        if baseline not in algorithms:
            console.print(f"[yellow]La línea base {baseline} no se ejecutó: sin cocientes Q[/yellow]")
        write_csv(cells, _sibling(out, "cells"), settings.float_format)
        write_csv(partitions, _sibling(out, "partitions"), settings.float_format)
        write_csv(aggregate_partitions(partitions), _sibling(out, "partition_summary"), settings.float_format)
        write_csv(rows, out, settings.float_format)
        if dashboard is not None:
            monitor.guardar_dashboard(str(dashboard))

    table = Table(title="Medias geométricas por clase")
    columns = ["class", "topology", "algorithm", "t_mean", "mC_mean", "mD_mean", "aD_mean"]
    columns += [c for c in ("QmC_mean", "QmD_mean", "QaD_mean") if c in rows.columns]
    for column in columns:
        table.add_column(column)
    for row in rows[columns].itertuples(index=False):
        table.add_row(*[f"{v:.4g}" if isinstance(v, float) else str(v) for v in row])
    console.print(table)
    alerts = monitor.obtener_dashboard()['alertas']
    if alerts:
        console.print(f"[yellow]{len(alerts)} alerta(s) durante el barrido[/yellow]")
    console.print(f"[green]Agregado guardado en {out}[/green]")


@app.command("topo-info")
def topo_info(
    topology: List[str] = typer.Option(..., "--topology", callback=_check_topologies,
                                       help="Topología (repetible)"),
    bandwidth: Optional[float] = typer.Option(None, "--bandwidth", callback=_check_positive,
                                              help="Ancho de banda de cada enlace"),
    matrix_out: Optional[Path] = typer.Option(None, "--matrix-out",
                                              help="Guardar la matriz t (solo con una topología)"),
):
    """
    Muestra estadísticas de la matriz de tiempos y el costo del precálculo.
    """
    with _domain_errors():
        settings = load_settings()
        bandwidth = bandwidth or settings.default_bandwidth
        if matrix_out is not None and len(topology) != 1:
            raise ValueError("--matrix-out requiere exactamente una topología")
        for spec in topology:
            prepared = prepare_topology(spec, bandwidth)
            summary = topology_summary(prepared.processor, prepared.routing.tm)
            table = Table(title=f"Topología {spec}")
            table.add_column("Métrica", style="cyan")
            table.add_column("Valor", style="green")
            for name, value in summary.items():
                table.add_row(name, f"{value:.6g}" if isinstance(value, float) else str(value))
            table.add_row("precalculo_segundos", f"{prepared.precompute_seconds:.4f}")
            console.print(table)
            if matrix_out is not None:
                np.savetxt(matrix_out, prepared.routing.tm.t, fmt=settings.float_format, delimiter=",")
                console.print(f"[green]Matriz t guardada en {matrix_out}[/green]")


@app.command("partition")
def partition_command(
    graph: Path = typer.Option(..., "--graph", help="Grafo de aplicación (METIS)"),
    k: int = typer.Option(..., "--k", min=1, help="Número de bloques"),
    out: Path = typer.Option(..., "--out", help="Archivo de partición de salida"),
    epsilon: float = typer.Option(0.0, "--epsilon", help="Desbalance permitido"),
    seed: int = typer.Option(0, "--seed", help="Semilla"),
    partitioner: str = typer.Option("simple", "--partitioner", callback=_check_partitioner,
                                    help="simple | ordering"),
    topology: Optional[str] = typer.Option(None, "--topology",
                                           help="Malla destino para numerar los bloques (p. ej. torus2d:16x16)"),
):
    """
    Particiona un grafo con el particionador interno y guarda la partición.
    """
    with _domain_errors():
        g_a = read_metis_file(graph)
        started = time.perf_counter()
        if partitioner == "simple":
            dims = parse_topology_spec(topology).dims if topology else None
            result = simple_partition(g_a, k, epsilon, seed=seed, dims=dims)
        else:
            result = ordering_partition(g_a, k, seed=seed)
        quality = partition_quality(g_a, result, time.perf_counter() - started)
        write_partition_file(result, out)

    panel = (f"Bloques: {result.k}\nCorte: {quality.edge_cut:g}\nMCV: {quality.mcv}\n"
             f"Desbalance: {quality.balance:.4f}\nTiempo: {quality.time:.3f}s")
    console.print(Panel(panel, title=f"Partición de {graph.name}"))


@app.command()
def compare(
    a: Path = typer.Option(..., "--a", help="CSV agregado A (numerador)"),
    b: Path = typer.Option(..., "--b", help="CSV agregado B (denominador)"),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV con los cocientes"),
):
    """
    Cocientes A/B de los doce agregados (p. ej. dos particionadores distintos).
    """
    with _domain_errors():
        settings = load_settings()
        quotients = compare_partitioners(read_csv(a), read_csv(b))
        if out is not None:
            write_csv(quotients, out, settings.float_format)

    table = Table(title=f"{a.name} / {b.name}")
    columns = ["class", "topology", "algorithm", "t_mean", "mC_mean", "mD_mean", "aD_mean"]
    for column in columns:
        table.add_column(column)
    for row in quotients[columns].itertuples(index=False):
        table.add_row(*[f"{v:.4g}" if isinstance(v, float) else str(v) for v in row])
    console.print(table)


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Ejecuta la CLI y devuelve el código de salida en lugar de terminar el proceso."""
    try:
        result = app(args=argv, prog_name="topomap", standalone_mode=False)
    except click.exceptions.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    app()

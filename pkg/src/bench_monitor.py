#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Monitoreo de corridas del arnés

Registra la duración y el estado de cada celda (instancia x topología x
algoritmo x semilla), acumula estadísticas por algoritmo y genera alertas
(tasa de error alta, celdas lentas, particiones desbalanceadas). Es seguro
usarlo desde varios hilos a la vez.
"""

import json
import logging
import threading
import time
from collections import defaultdict, deque
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


@dataclass
class MedicionCelda:
    """Medición de una celda terminada."""
    timestamp: datetime
    instancia: str
    topologia: str
    algoritmo: str
    semilla: int
    duracion_segundos: float
    estado: str  # 'exito', 'error'
    errores: List[str] = field(default_factory=list)


@dataclass
class EstadisticasAlgoritmo:
    """Estadísticas acumuladas por algoritmo."""
    algoritmo: str
    celdas: int = 0
    exitos: int = 0
    errores: int = 0
    tiempo_total_segundos: float = 0.0
    tasa_exito: float = 0.0
    tiempo_promedio_segundos: float = 0.0

    def actualizar_tasas(self):
        """Actualiza las tasas calculadas."""
        if self.celdas > 0:
            self.tasa_exito = (self.exitos / self.celdas) * 100
            self.tiempo_promedio_segundos = self.tiempo_total_segundos / self.celdas


class BenchMonitor:
    """Monitor de celdas del benchmark."""

    def __init__(self, tiempo_celda_maximo: float = 30.0, tasa_error_maxima: float = 10.0,
                 celdas_minimas_para_tasa: int = 10):
        self.metricas_recientes = deque(maxlen=10000)
        self.estadisticas_algoritmos: Dict[str, EstadisticasAlgoritmo] = {}
        self.alertas: List[Dict[str, Any]] = []
        self.inicio_monitoreo = datetime.now()
        self._pendientes: Dict[int, Dict[str, Any]] = {}
        self._siguiente_id = 0
        self._lock = threading.Lock()

        # Umbrales para alertas
        self.umbrales_alertas = {
            'tasa_error_maxima': tasa_error_maxima,  # %
            'tiempo_celda_maximo': tiempo_celda_maximo,  # segundos
            'celdas_minimas_para_tasa': celdas_minimas_para_tasa,
        }

    def iniciar_medicion(self, instancia: str, topologia: str, algoritmo: str, semilla: int) -> int:
        """Inicia la medición de una celda y devuelve su id."""
        with self._lock:
            medicion_id = self._siguiente_id
            self._siguiente_id += 1
            self._pendientes[medicion_id] = {
                'inicio': time.perf_counter(),
                'instancia': instancia,
                'topologia': topologia,
                'algoritmo': algoritmo,
                'semilla': semilla,
            }
        return medicion_id

    def finalizar_medicion(self, medicion_id: int, estado: str = 'exito',
                           errores: Optional[List[str]] = None) -> MedicionCelda:
        """Cierra una medición iniciada y actualiza estadísticas y alertas."""
        with self._lock:
            pendiente = self._pendientes.pop(medicion_id, None)
            if pendiente is None:
                raise KeyError(f"medición desconocida: {medicion_id}")
            medicion = MedicionCelda(
                timestamp=datetime.now(),
                instancia=pendiente['instancia'],
                topologia=pendiente['topologia'],
                algoritmo=pendiente['algoritmo'],
                semilla=pendiente['semilla'],
                duracion_segundos=time.perf_counter() - pendiente['inicio'],
                estado=estado,
                errores=list(errores or []),
            )
            self.metricas_recientes.append(medicion)
            self._actualizar_estadisticas_algoritmo(medicion)
            self._verificar_alertas(medicion)
        return medicion

    def _actualizar_estadisticas_algoritmo(self, medicion: MedicionCelda):
        stats = self.estadisticas_algoritmos.setdefault(
            medicion.algoritmo, EstadisticasAlgoritmo(algoritmo=medicion.algoritmo))
        stats.celdas += 1
        stats.tiempo_total_segundos += medicion.duracion_segundos
        if medicion.estado == 'exito':
            stats.exitos += 1
        else:
            stats.errores += 1
        stats.actualizar_tasas()

    def _agregar_alerta(self, tipo: str, descripcion: str, nivel: str, **extra):
        alerta = {
            'timestamp': datetime.now(),
            'tipo': tipo,
            'descripcion': descripcion,
            'nivel': nivel,
            **extra,
        }
        self.alertas.append(alerta)
        # Mantener solo últimas 100 alertas
        if len(self.alertas) > 100:
            self.alertas = self.alertas[-100:]
        logger.warning(f"Alerta {tipo}: {descripcion}")

    def _verificar_alertas(self, medicion: MedicionCelda):
        stats = self.estadisticas_algoritmos[medicion.algoritmo]
        if stats.celdas >= self.umbrales_alertas['celdas_minimas_para_tasa']:
            tasa_error = 100.0 - stats.tasa_exito
            if tasa_error > self.umbrales_alertas['tasa_error_maxima']:
                self._agregar_alerta(
                    'TASA_ERROR_ALTA', f"{medicion.algoritmo}: {tasa_error:.1f}% de celdas fallidas "
                    f"(> {self.umbrales_alertas['tasa_error_maxima']}%)", 'ALTO',
                    algoritmo=medicion.algoritmo)

        if medicion.duracion_segundos > self.umbrales_alertas['tiempo_celda_maximo']:
            self._agregar_alerta(
                'CELDA_LENTA', f"{medicion.algoritmo} sobre {medicion.instancia}/{medicion.topologia} "
                f"tardó {medicion.duracion_segundos:.1f}s (> {self.umbrales_alertas['tiempo_celda_maximo']}s)",
                'MEDIO', algoritmo=medicion.algoritmo)

    def registrar_alerta(self, tipo: str, descripcion: str, nivel: str = 'MEDIO', **extra):
        """Registra una alerta externa (por ejemplo, partición desbalanceada)."""
        with self._lock:
            self._agregar_alerta(tipo, descripcion, nivel, **extra)

    def obtener_dashboard(self) -> Dict[str, Any]:
        """Resumen del estado actual."""
        with self._lock:
            total_celdas = sum(s.celdas for s in self.estadisticas_algoritmos.values())
            total_exitos = sum(s.exitos for s in self.estadisticas_algoritmos.values())
            estados = defaultdict(int)
            for m in self.metricas_recientes:
                estados[m.estado] += 1
            return {
                'timestamp': datetime.now().isoformat(),
                'tiempo_actividad_segundos': (datetime.now() - self.inicio_monitoreo).total_seconds(),
                'resumen_general': {
                    'total_celdas': total_celdas,
                    'tasa_exito_global': round(total_exitos / total_celdas * 100, 2) if total_celdas else 0.0,
                    'pendientes': len(self._pendientes),
                    'estados': dict(estados),
                },
                'algoritmos': {
                    nombre: {
                        'celdas': s.celdas,
                        'tasa_exito': round(s.tasa_exito, 2),
                        'tiempo_promedio_segundos': s.tiempo_promedio_segundos,
                        'tiempo_total_segundos': s.tiempo_total_segundos,
                    }
                    for nombre, s in self.estadisticas_algoritmos.items()
                },
                'alertas': list(self.alertas),
            }

    def guardar_dashboard(self, output_path: str) -> Optional[str]:
        """Guarda el dashboard actual como JSON."""
        try:
            dashboard = self.obtener_dashboard()
            Path(output_path).parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, 'w', encoding='utf-8') as f:
                json.dump(dashboard, f, ensure_ascii=False, indent=2, default=str)
            return output_path
        except OSError as e:
            logger.error(f"Error guardando dashboard: {e}")
            return None

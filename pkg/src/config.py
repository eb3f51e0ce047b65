#!/usr/bin/env python3
"""
Configuración del arnés de experimentos
=======================================

Lee la configuración desde variables de entorno (y un archivo .env si
existe) y la expone como dataclass. Las opciones de línea de comandos
tienen prioridad sobre estos valores.

Uso:
    from src.config import load_settings, configure_logging
"""

import logging
import os
from dataclasses import dataclass

try:
    from dotenv import load_dotenv
except ImportError:
    print("WARNING: python-dotenv no está instalado. Se usan solo variables de entorno.")
    load_dotenv = lambda: None

load_dotenv()

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

# =====================================================
# Clases de configuración
# =====================================================

@dataclass
class HarnessSettings:
    """Configuración del arnés"""
    threads: int = 1
    log_level: str = 'INFO'
    default_bandwidth: float = 1.0
    # Dígitos significativos de los flotantes en CSV (round-trip exacto)
    float_digits: int = 17

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError(f"TOPOMAP_THREADS debe ser >= 1 (recibido {self.threads})")
        if not self.default_bandwidth > 0:
            raise ValueError(f"TOPOMAP_BANDWIDTH debe ser > 0 (recibido {self.default_bandwidth})")
        if logging.getLevelName(self.log_level.upper()) == f"Level {self.log_level.upper()}":
            raise ValueError(f"TOPOMAP_LOG_LEVEL desconocido: {self.log_level}")
        self.log_level = self.log_level.upper()

    @property
    def float_format(self) -> str:
        return f"%.{self.float_digits}g"

# =====================================================
# Carga de configuración
# =====================================================

def _read(name: str, default: str, cast):
    raw = os.getenv(name, default)
    try:
        return cast(raw)
    except ValueError:
        raise ValueError(f"{name} tiene un valor inválido: {raw!r}") from None


def load_settings() -> HarnessSettings:
    """Carga la configuración desde variables de entorno"""
    return HarnessSettings(
        threads=_read('TOPOMAP_THREADS', '1', int),
        log_level=os.getenv('TOPOMAP_LOG_LEVEL', 'INFO'),
        default_bandwidth=_read('TOPOMAP_BANDWIDTH', '1.0', float),
    )


def configure_logging(level: str = 'INFO') -> None:
    """Configura el logging raíz con el formato del proyecto"""
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT)
    logging.getLogger().setLevel(getattr(logging, level.upper(), logging.INFO))

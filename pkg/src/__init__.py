"""
Topomap - Mapeo topológico de procesos sobre mallas y toros

Este paquete contiene la representación de grafos, la generación de
grafos de procesadores, los algoritmos de mapeo, las métricas de calidad
y el arnés de experimentos con su interfaz de línea de comandos.
"""

__version__ = "0.1.0"
__author__ = "Topomap Team"

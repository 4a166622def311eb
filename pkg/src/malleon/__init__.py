"""Discrete-event simulation of batch scheduling for rigid and malleable jobs."""

from .engine import SimConfig, Simulator, run
from .workload import Workload, esp_workload, power_workload

__version__ = "0.1.0"

__all__ = ["SimConfig", "Simulator", "Workload", "esp_workload", "power_workload", "run"]

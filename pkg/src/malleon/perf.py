"""Synthetic performance and power model.

Stands in for measured MPI-to-compute time ratios and node power. A job's
progress law is ``rate(n) = n / (1 + mtct(n))`` node-seconds of useful work
per second, and its total work is fixed so that it runs for exactly
``static_exec_time`` at ``nodes_requested``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

from .jobs import Job

P_IDLE = 71.0  # watts drawn by an idle node


def _unit_noise(*key) -> float:
    # uniform in [-1, 1], a pure function of the key
    return random.Random(":".join(str(k) for k in key)).uniform(-1.0, 1.0)


def mtct(job: Job, n: int, seed: int = 0, progress: Optional[float] = None) -> float:
    p = job.perf
    value = p.mtct_base + p.mtct_slope * (n - 1)
    if p.model_id == "amr" and progress is not None:
        # refinement phases make communication cost oscillate over the run
        phase = math.sin(2.0 * math.pi * p.phase_count * min(max(progress, 0.0), 1.0))
        value *= 1.0 + p.phase_amplitude * phase
    elif p.model_id not in ("linear", "amr"):
        raise ValueError(f"unknown perf model {p.model_id!r}")
    if p.noise_amplitude:
        value *= 1.0 + p.noise_amplitude * _unit_noise(seed, job.id, n, "mtct")
    return max(value, 0.0)


def effective_rate(job: Job, n: int, seed: int = 0, progress: Optional[float] = None) -> float:
    return n / (1.0 + mtct(job, n, seed, progress))


def work_total(job: Job, seed: int = 0) -> float:
    return job.static_exec_time * effective_rate(job, job.nodes_requested, seed, 0.0)


def power_draw(job: Job, n: int, seed: int = 0) -> float:
    """Total watts drawn by ``job`` on ``n`` nodes."""
    watts = n * job.perf.power_nominal_per_node
    if job.perf.noise_amplitude:
        watts *= 1.0 + job.perf.noise_amplitude * _unit_noise(seed, job.id, n, "power")
    return min(max(watts, n * job.pmin_per_node), n * job.pmax_per_node)


def system_power(job_power: float, idle_nodes: int, p_idle: float = P_IDLE) -> float:
    return job_power + idle_nodes * p_idle


@dataclass(frozen=True)
class PerfSample:
    job_id: str
    mtct: float
    power_per_node: float
    sample_time: float

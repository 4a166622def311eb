"""Workload generation and the workload file format.

``esp_workload`` builds the modified ESP mix (230 jobs, 14 types) and
``power_workload`` the 20-job Pi/heat mix used for corridor experiments.
Workload files are JSON documents holding job specs and the corridor
schedule.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .jobs import ConfigError, Job, JobKind, PerfModelSpec, valid_node_set


@dataclass
class Workload:
    jobs: list[Job]
    system_nodes: int
    corridor_schedule: list[tuple[float, float, float]] = field(default_factory=list)
    name: str = "workload"

    def __post_init__(self):
        times = [j.submit_time for j in self.jobs]
        if times != sorted(times):
            raise ConfigError("jobs must be listed in nondecreasing submit_time order")
        ids = [j.id for j in self.jobs]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate job ids")
        for t, lo, hi in self.corridor_schedule:
            if not lo < hi:
                raise ConfigError(f"corridor at t={t}: lower {lo} must be < upper {hi}")

    @property
    def submit_schedule(self) -> list[tuple[str, float]]:
        return [(j.id, j.submit_time) for j in self.jobs]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "system_nodes": self.system_nodes,
            "corridor_schedule": [list(c) for c in self.corridor_schedule],
            "jobs": [j.spec_dict() for j in self.jobs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Workload":
        unknown = set(d) - {"name", "system_nodes", "corridor_schedule", "jobs"}
        if unknown:
            raise ConfigError(f"workload: unknown keys {sorted(unknown)}")
        if "jobs" not in d or "system_nodes" not in d:
            raise ConfigError("workload needs 'jobs' and 'system_nodes'")
        return cls(
            jobs=[Job.from_spec(j) for j in d["jobs"]],
            system_nodes=int(d["system_nodes"]),
            corridor_schedule=[tuple(float(x) for x in c) for c in d.get("corridor_schedule", [])],
            name=d.get("name", "workload"),
        )

    def fresh_jobs(self) -> list[Job]:
        """Unstarted copies, so one workload can drive many runs."""
        return [Job.from_spec(j.spec_dict()) for j in self.jobs]

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "Workload":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None


# type: (fraction of system, count, static time [s], constraint)
ESP_TYPES = {
    "A": (0.03125, 75, 267, None),
    "B": (0.06250, 9, 322, "pof2"),
    "C": (0.50000, 3, 534, None),
    "D": (0.25000, 3, 616, "even"),
    "E": (0.50000, 3, 315, None),
    "F": (0.06250, 9, 1846, "pof2"),
    "G": (0.12500, 6, 1334, "even"),
    "H": (0.15625, 6, 1067, "odd"),
    "I": (0.03125, 24, 1432, None),
    "J": (0.06250, 24, 725, "pof2"),
    "K": (0.09375, 15, 487, None),
    "L": (0.12500, 36, 366, "even"),
    "M": (0.25000, 15, 187, None),
    "Z": (1.00000, 2, 100, None),
}

ESP_INTERARRIVAL = 30.0


def esp_perf_model(job_type: str, nodes: int, static_time: float) -> PerfModelSpec:
    """Default MTCT curve for an ESP job type.

    Communication share falls with problem size: a job type with more
    node-seconds of work gets a smaller base ratio and a flatter slope.
    """
    size = nodes * static_time
    base = 0.04 + 6.0 / (size ** 0.5)
    slope = 1.5 / (size ** 0.5)
    return PerfModelSpec(mtct_base=round(base, 6), mtct_slope=round(slope, 6), power_nominal_per_node=200.0)


def esp_workload(system_nodes: int = 32, malleable_fraction: float = 1.0, seed: int = 0) -> Workload:
    if not 0.0 <= malleable_fraction <= 1.0:
        raise ConfigError("malleable_fraction must lie in [0, 1]")
    if system_nodes < 1:
        raise ConfigError("system_nodes must be >= 1")
    specs = []
    for t, (frac, count, runtime, constraint) in ESP_TYPES.items():
        nodes = max(1, int(round(frac * system_nodes)))
        for k in range(count):
            specs.append((f"{t}{k + 1:02d}", t, nodes, float(runtime), constraint or "none"))

    # submission order and malleable selection come from separate streams so
    # the order does not change with the malleable fraction
    order_rng = random.Random(f"esp-order:{seed}")
    order_rng.shuffle(specs)
    pick_rng = random.Random(f"esp-malleable:{seed}")
    n_malleable = int(round(malleable_fraction * len(specs)))
    malleable_ids = set(pick_rng.sample(sorted(s[0] for s in specs), n_malleable))

    jobs = []
    for i, (jid, t, nodes, runtime, constraint) in enumerate(specs):
        kw = {}
        if jid in malleable_ids:
            vs = valid_node_set(constraint, 1, system_nodes)
            lo, hi = (vs[0], vs[-1]) if vs else (1, system_nodes)
            kw = dict(kind=JobKind.MALLEABLE, min_nodes=min(lo, nodes), max_nodes=max(hi, nodes))
        jobs.append(Job(
            id=jid,
            job_type=t,
            nodes_requested=nodes,
            static_exec_time=runtime,
            submit_time=i * ESP_INTERARRIVAL,
            constraint=constraint,
            perf=esp_perf_model(t, nodes, runtime),
            **kw,
        ))
    return Workload(jobs, system_nodes, name=f"esp-n{system_nodes}-m{malleable_fraction:g}-s{seed}")


POWER_NODES = 14
PI_WATTS = 170.0
HEAT_WATTS = 250.0
DEFAULT_CORRIDORS = ((1700.0, 2500.0), (1000.0, 1700.0), (2500.0, 3500.0))


def power_workload(
    seed: int = 0,
    switch_times: Optional[Sequence[float]] = None,
    malleable: bool = True,
    runtime_range: tuple[float, float] = (180.0, 300.0),
) -> Workload:
    """20 alternating Pi (170 W/node) and heat (250 W/node) jobs on 14 nodes.

    Without explicit ``switch_times`` the corridor starts at t=0 and changes
    at 1/3 and 2/3 of the makespan that rigid backfilling achieves on the
    same jobs.
    """
    if switch_times is None:
        switch_times = baseline_switch_times(seed, runtime_range)
    if len(switch_times) != len(DEFAULT_CORRIDORS):
        raise ConfigError(f"need {len(DEFAULT_CORRIDORS)} corridor switch times")
    rng = random.Random(f"power:{seed}")
    jobs = []
    for i in range(20):
        heat = i % 2 == 1
        watts = HEAT_WATTS if heat else PI_WATTS
        perf = PerfModelSpec(
            mtct_base=0.15 if heat else 0.02,
            mtct_slope=0.01 if heat else 0.002,
            power_nominal_per_node=watts,
        )
        kw = dict(kind=JobKind.MALLEABLE, min_nodes=1, max_nodes=POWER_NODES) if malleable else {}
        jobs.append(Job(
            id=f"{'heat' if heat else 'pi'}{i + 1:02d}",
            job_type="heat" if heat else "pi",
            nodes_requested=i % 4 + 1,
            static_exec_time=float(round(rng.uniform(*runtime_range))),
            submit_time=2.0 * i,
            pmin_per_node=watts,
            pmax_per_node=watts,
            perf=perf,
            **kw,
        ))
    corridor = [(float(t), lo, hi) for t, (lo, hi) in zip(switch_times, DEFAULT_CORRIDORS)]
    return Workload(jobs, POWER_NODES, corridor, name=f"power-s{seed}")


def baseline_switch_times(seed: int = 0, runtime_range=(180.0, 300.0)) -> tuple[float, float, float]:
    from .engine import SimConfig, run
    from .metrics import compute

    rigid = power_workload(seed, switch_times=(0.0, 0.0, 0.0), malleable=False, runtime_range=runtime_range)
    rigid.corridor_schedule = []
    makespan = compute(run(SimConfig(POWER_NODES, "backfill"), rigid)).makespan
    return (0.0, float(round(makespan / 3)), float(round(2 * makespan / 3)))

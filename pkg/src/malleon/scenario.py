"""Scenario files (TOML).

Example::

    [simulation]
    strategy = "perf-aware"     # backfill | fpsma | perf-aware | power-aware | all
    nodes = 32
    tick = 30.0
    seed = 7

    [workload]
    kind = "esp"                # esp | power | file | inline
    malleable = 1.0

    [output]
    dir = "out"
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .adaptation import LatencyModel
from .engine import SimConfig
from .jobs import ConfigError, Job, PerfModelSpec
from .strategies import STRATEGIES
from .workload import Workload, esp_workload, power_workload

SECTIONS = {
    "simulation": {"strategy", "nodes", "tick", "seed", "time_limit", "lp_mode", "lp_combination"},
    "workload": {"kind", "malleable", "seed", "file", "switch_times", "jobs", "rigid"},
    "latency": {"intercept", "expand_max", "shrink_max", "ref_nodes"},
    "perf": set(PerfModelSpec.__dataclass_fields__),
    "corridor": {"schedule"},
    "output": {"dir", "name"},
}


class SchemaError(ConfigError):
    pass


@dataclass
class Scenario:
    strategies: list[str]
    nodes: Optional[int]
    tick: float = 30.0
    seed: int = 0
    time_limit: Optional[float] = None
    strategy_options: dict = field(default_factory=dict)
    workload: dict = field(default_factory=lambda: {"kind": "esp"})
    latency: LatencyModel = LatencyModel()
    perf: dict = field(default_factory=dict)
    corridor: Optional[list] = None
    out_dir: str = "out"
    name: str = "scenario"
    base_dir: Path = Path(".")

    def build_workload(self) -> Workload:
        w = self.workload
        kind = w.get("kind", "esp")
        seed = int(w.get("seed", self.seed))
        if kind == "esp":
            wl = esp_workload(self.nodes or 32, float(w.get("malleable", 1.0)), seed)
        elif kind == "power":
            st = w.get("switch_times")
            wl = power_workload(seed, switch_times=st, malleable=not w.get("rigid", False))
        elif kind == "file":
            if "file" not in w:
                raise SchemaError("workload.file is required for kind = 'file'")
            path = Path(w["file"])
            wl = Workload.load(path if path.is_absolute() else self.base_dir / path)
        elif kind == "inline":
            if "jobs" not in w:
                raise SchemaError("workload.jobs is required for kind = 'inline'")
            jobs = [Job.from_spec(j) for j in w["jobs"]]
            wl = Workload(sorted(jobs, key=lambda j: j.submit_time), self.nodes or max(j.nodes_requested for j in jobs))
        else:
            raise SchemaError(f"workload.kind must be esp, power, file or inline, not {kind!r}")
        if self.perf:
            for job in wl.jobs:
                job.perf = replace(job.perf, **self.perf)
        if self.corridor is not None:
            wl.corridor_schedule = [tuple(float(x) for x in c) for c in self.corridor]
            Workload(wl.jobs, wl.system_nodes, wl.corridor_schedule)  # validate
        return wl

    def config(self, strategy: str, workload: Workload) -> SimConfig:
        return SimConfig(
            total_nodes=self.nodes or workload.system_nodes,
            strategy=strategy,
            scheduler_tick=self.tick,
            rng_seed=self.seed,
            time_limit=self.time_limit,
            strategy_options=dict(self.strategy_options) if strategy == "power-aware" else {},
            latency=self.latency,
        )


def _check_keys(section: str, table: dict) -> None:
    unknown = set(table) - SECTIONS[section]
    if unknown:
        raise SchemaError(f"[{section}]: unknown keys {sorted(unknown)}")


def parse(data: dict, base_dir: Path = Path("."), name: str = "scenario") -> Scenario:
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise SchemaError(f"unknown sections {sorted(unknown)}")
    for section, table in data.items():
        if not isinstance(table, dict):
            raise SchemaError(f"[{section}] must be a table")
        _check_keys(section, table)
    sim = data.get("simulation", {})
    strategy = sim.get("strategy", "backfill")
    if strategy == "all":
        strategies = list(STRATEGIES)
    elif strategy in STRATEGIES:
        strategies = [strategy]
    else:
        raise SchemaError(f"simulation.strategy: unknown strategy {strategy!r}")
    options = {}
    if "lp_mode" in sim:
        options["lp_mode"] = sim["lp_mode"]
    if "lp_combination" in sim:
        options["combination"] = int(sim["lp_combination"])
    try:
        sc = Scenario(
            strategies=strategies,
            nodes=int(sim["nodes"]) if "nodes" in sim else None,
            tick=float(sim.get("tick", 30.0)),
            seed=int(sim.get("seed", 0)),
            time_limit=float(sim["time_limit"]) if "time_limit" in sim else None,
            strategy_options=options,
            workload=dict(data.get("workload", {"kind": "esp"})),
            latency=LatencyModel(**data.get("latency", {})),
            perf=dict(data.get("perf", {})),
            corridor=data.get("corridor", {}).get("schedule"),
            out_dir=data.get("output", {}).get("dir", "out"),
            name=data.get("output", {}).get("name", name),
            base_dir=base_dir,
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from None
    if sc.tick <= 0:
        raise SchemaError("simulation.tick must be > 0")
    if sc.nodes is not None and sc.nodes < 1:
        raise SchemaError("simulation.nodes must be >= 1")
    return sc


def load(path) -> Scenario:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"scenario file {path} not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return parse(data, path.parent, path.stem)

"""Canned experiment setups: the ESP strategy comparison and the three
power-corridor scenarios."""

from __future__ import annotations

from .engine import SimConfig, run
from .metrics import compute
from .workload import POWER_NODES, baseline_switch_times, esp_workload, power_workload

ESP_STRATEGIES = ("backfill", "fpsma", "perf-aware")

# scenario -> (strategy, options, malleable jobs)
POWER_SCENARIOS = {
    1: ("backfill", {}, False),
    2: ("power-aware", {"lp_mode": "running-only"}, True),
    3: ("power-aware", {"lp_mode": "with-waiting"}, True),
}


def esp_comparison(malleable_fraction=1.0, seed=0, system_nodes=32, tick=30.0, strategies=ESP_STRATEGIES):
    """strategy -> (trace, report) on one shared ESP workload."""
    workload = esp_workload(system_nodes, malleable_fraction, seed)
    out = {}
    for name in strategies:
        trace = run(SimConfig(system_nodes, name, scheduler_tick=tick, rng_seed=seed), workload)
        out[name] = (trace, compute(trace))
    return out


def power_scenarios(seed=0, switch_times=None, tick=30.0, scenarios=(1, 2, 3)):
    """scenario number -> (trace, report)."""
    if switch_times is None:
        switch_times = baseline_switch_times(seed)
    out = {}
    for k in scenarios:
        strategy, options, malleable = POWER_SCENARIOS[k]
        workload = power_workload(seed, switch_times=switch_times, malleable=malleable)
        cfg = SimConfig(POWER_NODES, strategy, scheduler_tick=tick, rng_seed=seed, strategy_options=options)
        trace = run(cfg, workload)
        out[k] = (trace, compute(trace))
    return out

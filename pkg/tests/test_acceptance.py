"""Acceptance criteria, one pass/fail line each (see the summary section)."""

import random
import time
from collections import Counter

import pytest

from malleon.adaptation import latency
from malleon.audit import audit
from malleon.cli import main
from malleon.engine import SimConfig, run
from malleon.experiments import esp_comparison, power_scenarios
from malleon.jobs import CONSTRAINTS, expand_target, shrink_target, valid_node_set
from malleon.metrics import allocation_steps, busy_node_seconds, busy_node_seconds_trapezoid, compute
from malleon.power_lp import check_solution, solve
from malleon.workload import Workload

from conftest import enumerate_lp, make_job, random_lp_instance
from test_workload import TABLE

ESP_SEED = 0
CROSSOVER_SEEDS = (0, 1, 2, 3, 4)
POWER_SEED = 0


@pytest.fixture(scope="module")
def esp_full():
    t0 = time.perf_counter()
    runs = esp_comparison(1.0, ESP_SEED)
    return runs, time.perf_counter() - t0


@pytest.fixture(scope="module")
def esp_crossover():
    return {seed: esp_comparison(0.1, seed) for seed in CROSSOVER_SEEDS}


@pytest.fixture(scope="module")
def power_runs():
    t0 = time.perf_counter()
    runs = power_scenarios(POWER_SEED)
    return runs, time.perf_counter() - t0


def test_criterion_01_workload_fidelity(tmp_path, criterion):
    t0 = time.perf_counter()
    rc = main(["gen", "esp", "--nodes", "32", "-o", str(tmp_path / "esp.json")])
    wl = Workload.load(tmp_path / "esp.json")
    elapsed = time.perf_counter() - t0
    counts = Counter(j.job_type for j in wl.jobs)
    rows_ok = all(
        (j.nodes_requested, j.static_exec_time, j.constraint) == TABLE[j.job_type][:1] + TABLE[j.job_type][2:]
        for j in wl.jobs
    )
    ok = rc == 0 and len(wl.jobs) == 230 and counts == {t: v[1] for t, v in TABLE.items()} and rows_ok \
        and elapsed < 1.0
    criterion(1, ok, f"{len(wl.jobs)} jobs, per-type counts/sizes/runtimes/constraints match, {elapsed:.2f} s")


def test_criterion_02_esp_direction(esp_full, criterion):
    runs, elapsed = esp_full
    r = {k: rep for k, (_, rep) in runs.items()}
    pa, fp, bf = r["perf-aware"], r["fpsma"], r["backfill"]
    gain = (bf.makespan - pa.makespan) / bf.makespan
    ordered = all(
        getattr(pa, m) < getattr(fp, m) < getattr(bf, m) for m in ("makespan", "avg_response", "avg_waiting")
    )
    ok = ordered and gain >= 0.10 and elapsed < 60.0 and all(x.complete for x in r.values())
    criterion(2, ok, (
        f"makespan {pa.makespan:.0f} < {fp.makespan:.0f} < {bf.makespan:.0f} s, gain {gain:.1%}; "
        f"response {pa.avg_response:.0f}/{fp.avg_response:.0f}/{bf.avg_response:.0f}; "
        f"waiting {pa.avg_waiting:.0f}/{fp.avg_waiting:.0f}/{bf.avg_waiting:.0f}; {elapsed:.1f} s"
    ))


def test_criterion_03_crossover(esp_crossover, criterion):
    parts, ok = [], True
    for seed, runs in esp_crossover.items():
        m = {k: rep.makespan for k, (_, rep) in runs.items()}
        good = m["backfill"] <= m["perf-aware"] and m["backfill"] <= m["fpsma"]
        ok &= good
        parts.append(f"s{seed} {m['backfill']:.0f}/{m['fpsma']:.0f}/{m['perf-aware']:.0f}")
    criterion(3, ok and len(esp_crossover) >= 3,
              "10% malleable, backfill/fpsma/perf-aware makespan: " + ", ".join(parts))


def test_criterion_04_power_corridor(power_runs, criterion):
    runs, elapsed = power_runs
    v = {k: rep.corridor_violations for k, (_, rep) in runs.items()}
    ok = v[3] <= v[2] <= v[1] and v[3] == 0 and v[1] >= 3 and elapsed < 30.0
    ok &= all(rep.complete for _, rep in runs.values())
    raw = {k: rep.corridor_excursions for k, (_, rep) in runs.items()}
    criterion(4, ok, (
        f"violations s1={v[1]} s2={v[2]} s3={v[3]} (raw excursions {raw[1]}/{raw[2]}/{raw[3]}, "
        f"window {runs[1][1].restoration_window} s); {elapsed:.1f} s"
    ))


def test_criterion_05_lp_solver(criterion):
    rng = random.Random(500)
    t0 = time.perf_counter()
    mismatches = feasible = 0
    for _ in range(500):
        inst = random_lp_instance(rng, max_jobs=4, max_nodes=16)
        sol = solve(inst)
        ref = enumerate_lp(inst)
        if (sol is None) != (ref is None):
            mismatches += 1
            continue
        if sol is not None:
            feasible += 1
            if sol.objective != ref[0] * inst.p_idle or check_solution(inst, sol):
                mismatches += 1
    elapsed = time.perf_counter() - t0
    criterion(5, mismatches == 0 and elapsed < 30.0,
              f"500 instances ({feasible} feasible), {mismatches} mismatches, {elapsed:.2f} s")


def test_criterion_06_constraint_arithmetic(criterion):
    example = shrink_target(8, 6, valid_node_set("even", 2, 32))
    rng = random.Random(6)
    bad = 0
    for _ in range(10_000):
        c = rng.choice(CONSTRAINTS)
        lo = rng.randint(1, 32)
        hi = rng.randint(lo, 64)
        vs = valid_node_set(c, lo, hi)
        cur = rng.randint(1, 64)
        k = rng.randint(0, 64)
        s = shrink_target(cur, k, vs)
        e = expand_target(cur, k, vs)
        if s is not None and not (s in vs and lo <= s <= hi and s <= cur - k):
            bad += 1
        if e is not None and not (e in vs and lo <= e <= hi and cur < e <= cur + k):
            bad += 1
    criterion(6, example == 2 and bad == 0, f"shrink_target(8, 6, even) = {example}; 10000 cases, {bad} bad")


def test_criterion_07_protocol_invariants(esp_full, esp_crossover, power_runs, criterion):
    traces = [t for t, _ in esp_full[0].values()]
    traces += [t for runs in esp_crossover.values() for t, _ in runs.values()]
    traces += [t for t, _ in power_runs[0].values()]
    problems = [p for t in traces for p in audit(t)]
    adaptations = sum(1 for t in traces for _, a in t.actions() if a["a"] == "adapt_begin")
    criterion(7, not problems, f"{len(traces)} traces, {adaptations} reallocations, {len(problems)} audit problems")


def test_criterion_08_metric_formulas(esp_full, power_runs, criterion):
    one = compute(run(SimConfig(32), Workload([make_job("a", nodes=32, runtime=100.0, base=0.0)], 32)))
    two = compute(run(SimConfig(32), Workload([
        make_job("a", nodes=32, runtime=100.0, base=0.0), make_job("b", nodes=32, runtime=100.0, base=0.0),
    ], 32)))
    three = compute(run(SimConfig(4, scheduler_tick=1000.0), Workload([
        make_job("A", nodes=4, runtime=100.0, submit=0.0, base=0.0),
        make_job("B", nodes=2, runtime=50.0, submit=10.0, base=0.0),
        make_job("C", nodes=2, runtime=20.0, submit=20.0, base=0.0),
    ], 4)))
    exact = (
        (one.makespan, one.avg_utilization, one.avg_waiting, one.avg_response) == (100.0, 1.0, 0.0, 100.0)
        and (two.makespan, two.avg_waiting, two.avg_response) == (200.0, 50.0, 150.0)
        and (three.makespan, three.avg_utilization) == (150.0, 540.0 / 600.0)
        and three.avg_waiting == 170.0 / 3 and three.avg_response == 340.0 / 3
    )
    worst = 0.0
    traces = [t for t, _ in esp_full[0].values()] + [t for t, _ in power_runs[0].values()]
    for t in traces:
        rep = compute(t)
        t0 = min(r.submit for r in rep.per_job)
        steps = allocation_steps(t)
        a = busy_node_seconds(steps, t0, t0 + rep.makespan)
        b = busy_node_seconds_trapezoid(steps, t0, t0 + rep.makespan)
        worst = max(worst, abs(a - b) / a)
    criterion(8, exact and worst <= 1e-9, f"1/2/3-job traces exact: {exact}; utilization rel diff {worst:.1e}")


def test_criterion_09_determinism(tmp_path, criterion):
    scen = tmp_path / "esp.toml"
    scen.write_text('[simulation]\nstrategy = "all"\nseed = 3\n[workload]\nkind = "esp"\nmalleable = 0.5\n')
    main(["run", str(scen), "--out", str(tmp_path / "a")])
    main(["run", str(scen), "--out", str(tmp_path / "b"), "--jobs", "2"])
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    p1, _ = power_scenarios(POWER_SEED, scenarios=(3,))[3]
    p2, _ = power_scenarios(POWER_SEED, scenarios=(3,))[3]
    same &= p1.dumps() == p2.dumps()
    criterion(9, same and len(files) == 16, f"{len(files)} output files and a power trace byte-identical across runs")


def test_criterion_10_latency_endpoints(criterion):
    e, s = latency("expand", 32), latency("shrink", 32)
    criterion(10, e == 3.1 and s == 1.8, f"latency(expand, 32) = {e} s, latency(shrink, 32) = {s} s")

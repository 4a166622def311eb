from hypothesis import given, settings, strategies as st

from malleon.audit import audit
from malleon.engine import SimConfig, run
from malleon.jobs import CONSTRAINTS, expand_target, shrink_target, valid_node_set
from malleon.metrics import allocation_steps, busy_node_seconds, busy_node_seconds_trapezoid, compute
from malleon.workload import Workload

from conftest import make_job


@st.composite
def node_sets(draw):
    c = draw(st.sampled_from(CONSTRAINTS))
    lo = draw(st.integers(1, 40))
    hi = draw(st.integers(lo, 64))
    return c, lo, hi, valid_node_set(c, lo, hi)


@settings(max_examples=400, deadline=None)
@given(node_sets(), st.integers(1, 64), st.integers(0, 64))
def test_targets_stay_valid(ns, current, k):
    _, lo, hi, vs = ns
    s = shrink_target(current, k, vs)
    if s is not None:
        assert s in vs and lo <= s <= current - k
    e = expand_target(current, k, vs)
    if e is not None:
        assert e in vs and current < e <= min(hi, current + k)


@st.composite
def small_workloads(draw):
    total = draw(st.integers(2, 8))
    n = draw(st.integers(1, 5))
    jobs = []
    t = 0.0
    for i in range(n):
        t += draw(st.integers(0, 40))
        nodes = draw(st.integers(1, total))
        mall = draw(st.booleans())
        c = draw(st.sampled_from(["none", "even", "pof2"])) if mall else "none"
        vs = valid_node_set(c, 1, total)
        if mall and nodes not in vs:
            nodes = vs[-1]
        jobs.append(make_job(
            f"j{i}", nodes=nodes, runtime=float(draw(st.integers(5, 200))), submit=t,
            base=draw(st.floats(0.0, 0.5)), slope=draw(st.floats(0.0, 0.05)),
            malleable=mall, lo=1, hi=total, constraint=c,
        ))
    return Workload(jobs, total)


@settings(max_examples=60, deadline=None)
@given(small_workloads(), st.sampled_from(["backfill", "fpsma", "perf-aware", "power-aware"]))
def test_random_runs_complete_and_audit_clean(wl, strategy):
    trace = run(SimConfig(wl.system_nodes, strategy, scheduler_tick=10.0), wl)
    assert trace.final["complete"]
    assert audit(trace) == []
    rep = compute(trace)
    assert 0.0 <= rep.avg_utilization <= 1.0 + 1e-12
    steps = allocation_steps(trace)
    a = busy_node_seconds(steps, 0.0, rep.makespan + wl.jobs[0].submit_time)
    b = busy_node_seconds_trapezoid(steps, 0.0, rep.makespan + wl.jobs[0].submit_time)
    assert abs(a - b) <= 1e-9 * max(a, 1.0)


@settings(max_examples=25, deadline=None)
@given(small_workloads())
def test_runs_are_deterministic(wl):
    cfg = SimConfig(wl.system_nodes, "perf-aware", scheduler_tick=10.0)
    assert run(cfg, wl).dumps() == run(cfg, wl).dumps()

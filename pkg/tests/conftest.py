import pytest

from malleon.jobs import Job, JobKind, PerfModelSpec


def make_job(id="j", nodes=1, runtime=100.0, submit=0.0, malleable=False, lo=None, hi=None,
             constraint="none", base=0.1, slope=0.0, watts=200.0, **kw):
    if malleable:
        kw.update(kind=JobKind.MALLEABLE, min_nodes=lo or 1, max_nodes=hi or 32)
    return Job(
        id=id, nodes_requested=nodes, static_exec_time=runtime, submit_time=submit,
        constraint=constraint, perf=PerfModelSpec(mtct_base=base, mtct_slope=slope, power_nominal_per_node=watts),
        **kw,
    )


@pytest.fixture
def job_factory():
    return make_job


def random_lp_instance(rng, max_jobs=4, max_nodes=16):
    """Random small instance with a corridor drawn near reachable power."""
    from malleon.jobs import CONSTRAINTS, valid_node_set
    from malleon.power_lp import LPInstance, RunningJob, WaitingJob

    n = rng.randint(2, max_nodes)
    running = []
    for i in range(rng.randint(0, max_jobs)):
        c = rng.choice(CONSTRAINTS)
        lo = rng.randint(1, max(1, n // 2))
        vs = valid_node_set(c, lo, rng.randint(lo, n))
        if not vs:
            vs = (lo,)
        pmin = float(rng.randint(50, 250))
        running.append(RunningJob(f"r{i}", vs, pmin, pmin + rng.choice([0.0, float(rng.randint(0, 80))])))
    waiting = []
    if rng.random() < 0.5:
        pmin = float(rng.randint(50, 250))
        waiting.append(WaitingJob("w", rng.randint(1, max(1, n // 3)), pmin, pmin + float(rng.randint(0, 50))))
    p_idle = float(rng.choice([0, 40, 71, 100]))
    # centre the corridor on the power band of a random assignment
    counts = [rng.choice(r.valid_set) for r in running]
    k_idle = n - sum(counts) - sum(w.nodes for w in waiting)
    k_idle = min(max(k_idle, 0), n - 1)
    low = sum(k * r.pmin for k, r in zip(counts, running)) + sum(w.nodes * w.pmin for w in waiting)
    high = sum(k * r.pmax for k, r in zip(counts, running)) + sum(w.nodes * w.pmax for w in waiting)
    low, high = low + k_idle * p_idle, high + k_idle * p_idle
    width = max(high - low, 1.0) + float(rng.choice([0, 0, 20, 100, 400]))
    lower = max(0.0, low - rng.uniform(0, width - (high - low)))
    return LPInstance(tuple(running), tuple(waiting), n, p_idle, lower, lower + width)


def enumerate_lp(instance):
    """(k_idle, counts) minimising idle nodes, by full enumeration; or None."""
    import itertools

    m = sum(w.nodes for w in instance.waiting)
    best = None
    for counts in itertools.product(*(r.valid_set for r in instance.running)):
        k_idle = instance.total_nodes - m - sum(counts)
        if k_idle < 0 or k_idle >= instance.total_nodes:
            continue
        low = sum(k * r.pmin for k, r in zip(counts, instance.running)) + k_idle * instance.p_idle
        high = sum(k * r.pmax for k, r in zip(counts, instance.running)) + k_idle * instance.p_idle
        low += sum(w.nodes * w.pmin for w in instance.waiting)
        high += sum(w.nodes * w.pmax for w in instance.waiting)
        if instance.lower <= low and high <= instance.upper:
            if best is None or (k_idle, counts) < best:
                best = (k_idle, counts)
    return best


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records a pass/fail line, then asserts."""

    def record(n, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

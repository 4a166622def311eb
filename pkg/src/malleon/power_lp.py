"""Integer node redistribution under a power corridor.

Chooses a node count for every running job (from its valid set, never zero)
plus a fixed count for an optional waiting job, so that the pessimistic and
optimistic system power both stay inside ``[lower, upper]`` and the idle
power ``k_idle * p_idle`` is minimal. Idle power enters both bounds.

The search is exact: a depth-first enumeration over jobs in priority order
that prunes on node-count and power partial sums. ``brute_force_solve`` is a
plain cross-product enumeration kept as a test oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

_EPS = 1e-9


@dataclass(frozen=True)
class RunningJob:
    job_id: str
    valid_set: tuple[int, ...]
    pmin: float
    pmax: float


@dataclass(frozen=True)
class WaitingJob:
    job_id: str
    nodes: int
    pmin: float
    pmax: float


@dataclass(frozen=True)
class LPInstance:
    running: tuple[RunningJob, ...]
    waiting: tuple[WaitingJob, ...]
    total_nodes: int
    p_idle: float
    lower: float
    upper: float

    def __post_init__(self):
        if self.total_nodes < 1:
            raise ValueError("total_nodes must be >= 1")
        if not self.lower < self.upper:
            raise ValueError("corridor needs lower < upper")
        powers = [self.p_idle] + [p for r in self.running for p in (r.pmin, r.pmax)]
        powers += [p for w in self.waiting for p in (w.pmin, w.pmax)]
        if min(powers) < 0:
            raise ValueError("per-node powers must be non-negative")
        for r in self.running:
            if not r.valid_set or min(r.valid_set) < 1:
                raise ValueError(f"running job {r.job_id}: valid set must be non-empty and >= 1")

    def without_waiting(self) -> "LPInstance":
        return LPInstance(self.running, (), self.total_nodes, self.p_idle, self.lower, self.upper)


@dataclass
class LPSolution:
    assignment: dict[str, int]
    k_idle: int
    objective: float
    explored: int = 0
    waiting: tuple[str, ...] = field(default_factory=tuple)


def power_bounds(instance: LPInstance, counts: Sequence[int], k_idle: int) -> tuple[float, float]:
    """(pessimistic-low, optimistic-high) system power for an assignment."""
    low = sum(k * r.pmin for k, r in zip(counts, instance.running))
    high = sum(k * r.pmax for k, r in zip(counts, instance.running))
    low += k_idle * instance.p_idle + sum(w.nodes * w.pmin for w in instance.waiting)
    high += k_idle * instance.p_idle + sum(w.nodes * w.pmax for w in instance.waiting)
    return low, high


def check_solution(instance: LPInstance, solution: LPSolution) -> list[str]:
    """Every violated constraint, as text. Empty means the solution is valid."""
    problems = []
    counts = []
    for r in instance.running:
        k = solution.assignment.get(r.job_id)
        if k is None:
            problems.append(f"{r.job_id}: no assignment")
            k = 0
        elif k < 1:
            problems.append(f"{r.job_id}: k={k} < 1")
        elif k not in r.valid_set:
            problems.append(f"{r.job_id}: k={k} not in valid set")
        counts.append(k)
    extra = set(solution.assignment) - {r.job_id for r in instance.running}
    if extra:
        problems.append(f"assignment for unknown jobs {sorted(extra)}")
    m = sum(w.nodes for w in instance.waiting)
    if sum(counts) + m + solution.k_idle != instance.total_nodes:
        problems.append("node counts do not add up to total_nodes")
    if not 0 <= solution.k_idle < instance.total_nodes:
        problems.append(f"k_idle={solution.k_idle} outside [0, N)")
    low, high = power_bounds(instance, counts, solution.k_idle)
    if not instance.lower <= low:
        problems.append(f"lower bound: {low} < {instance.lower}")
    if not instance.upper >= high:
        problems.append(f"upper bound: {high} > {instance.upper}")
    if abs(solution.objective - solution.k_idle * instance.p_idle) > _EPS:
        problems.append("objective does not equal k_idle * p_idle")
    return problems


def _make_solution(instance, counts, k_idle, explored):
    return LPSolution(
        assignment={r.job_id: k for r, k in zip(instance.running, counts)},
        k_idle=k_idle,
        objective=k_idle * instance.p_idle,
        explored=explored,
        waiting=tuple(w.job_id for w in instance.waiting),
    )


def solve(instance: LPInstance) -> Optional[LPSolution]:
    """Minimum-idle feasible assignment, or None if the corridor is unreachable.

    Ties on the objective go to the lexicographically smallest assignment
    in running-job order.
    """
    jobs = instance.running
    n_jobs = len(jobs)
    m = sum(w.nodes for w in instance.waiting)
    budget = instance.total_nodes - m
    if budget < 0:
        return None
    p_idle = instance.p_idle
    dlow = [r.pmin for r in jobs]
    dhigh = [r.pmax for r in jobs]
    wait_low = sum(w.nodes * w.pmin for w in instance.waiting)
    wait_high = sum(w.nodes * w.pmax for w in instance.waiting)
    values = [sorted(r.valid_set) for r in jobs]

    # suffix bounds over jobs i.. for pruning
    min_cnt = [0] * (n_jobs + 1)
    max_cnt = [0] * (n_jobs + 1)
    max_low = [0.0] * (n_jobs + 1)
    min_high = [0.0] * (n_jobs + 1)
    for i in range(n_jobs - 1, -1, -1):
        min_cnt[i] = min_cnt[i + 1] + values[i][0]
        max_cnt[i] = max_cnt[i + 1] + values[i][-1]
        max_low[i] = max_low[i + 1] + max(k * dlow[i] for k in values[i])
        min_high[i] = min_high[i + 1] + min(k * dhigh[i] for k in values[i])

    explored = 0
    counts = [0] * n_jobs

    def dfs(i, remaining, low, high):
        # remaining: nodes that still have to be handed to jobs i..
        nonlocal explored
        explored += 1
        if i == n_jobs:
            if remaining:
                return False
            # pruning runs with slack; the leaf checks the exact inequalities
            low_w, high_w = power_bounds(instance, counts, k_idle_now)
            return instance.lower <= low_w and high_w <= instance.upper
        for k in values[i]:
            rest = remaining - k
            if rest < min_cnt[i + 1]:
                break
            if rest > max_cnt[i + 1]:
                continue
            nlow = low + k * dlow[i]
            nhigh = high + k * dhigh[i]
            if nlow + max_low[i + 1] < instance.lower - _EPS:
                continue
            if nhigh + min_high[i + 1] > instance.upper + _EPS:
                continue
            counts[i] = k
            if dfs(i + 1, rest, nlow, nhigh):
                return True
        return False

    # k_idle = 0 first: the first hit is optimal, and the DFS order makes it
    # the lexicographically smallest among equals
    k_idle_now = 0
    for k_idle in range(0, instance.total_nodes):
        k_idle_now = k_idle
        used = budget - k_idle
        if used < 0:
            break
        if m + used < 1:
            # k_idle < N forbids an all-idle system
            continue
        if not min_cnt[0] <= used <= max_cnt[0]:
            continue
        idle_w = k_idle * p_idle
        if dfs(0, used, idle_w + wait_low, idle_w + wait_high):
            return _make_solution(instance, list(counts), k_idle, explored)
    return None


def solve_without_waiting(instance: LPInstance) -> Optional[LPSolution]:
    """Redistribute running jobs only; waiting-job terms are dropped."""
    return solve(instance.without_waiting())


def brute_force_solve(instance: LPInstance) -> Optional[LPSolution]:
    """Enumerate the full cross product of valid sets (test oracle)."""
    m = sum(w.nodes for w in instance.waiting)
    best = None
    explored = 0
    for counts in itertools.product(*(sorted(r.valid_set) for r in instance.running)):
        explored += 1
        k_idle = instance.total_nodes - m - sum(counts)
        if not 0 <= k_idle < instance.total_nodes:
            continue
        low, high = power_bounds(instance, counts, k_idle)
        if instance.lower <= low and high <= instance.upper:
            key = (k_idle, counts)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    return _make_solution(instance, list(best[1]), best[0], explored)

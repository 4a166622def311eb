"""Expand/shrink reallocation as a timed state machine.

A reallocation moves a RUNNING job to ADAPTING. Nodes being added are
claimed at once; nodes being removed stay with the job until the
adaptation completes. The launcher node (first allocated) never moves.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cluster import ClusterState
from .jobs import Job, JobState
from .timebase import to_ms


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class LatencyModel:
    intercept: float = 0.2
    expand_max: float = 3.1
    shrink_max: float = 1.8
    ref_nodes: int = 32

    def latency(self, op: str, n_target: int) -> float:
        if n_target < 1:
            raise ValueError("n_target must be >= 1")
        top = {"expand": self.expand_max, "shrink": self.shrink_max}[op]
        frac = (n_target - 1) / (self.ref_nodes - 1) if self.ref_nodes > 1 else 1.0
        # convex combination keeps both endpoints exact
        return max((1.0 - frac) * self.intercept + frac * top, self.intercept)


DEFAULT_LATENCY = LatencyModel()


def latency(op: str, n_target: int) -> float:
    return DEFAULT_LATENCY.latency(op, n_target)


@dataclass
class Reallocation:
    job_id: str
    op: str
    from_nodes: tuple[int, ...]
    to_nodes: tuple[int, ...]
    issue_time: int  # ms
    complete_time: int  # ms

    def to_dict(self) -> dict:
        return {
            "job": self.job_id,
            "op": self.op,
            "from": list(self.from_nodes),
            "to": list(self.to_nodes),
            "issue_ms": self.issue_time,
            "complete_ms": self.complete_time,
        }


def classify(from_nodes, to_nodes) -> str:
    a, b = set(from_nodes), set(to_nodes)
    if a == b:
        raise ProtocolError("reallocation does not change the allocation")
    if a < b:
        return "expand"
    if b < a:
        return "shrink"
    raise ProtocolError("mixed expand/shrink reallocation")


def begin_adaptation(
    cluster: ClusterState,
    job: Job,
    target_nodes,
    now: int,
    latency_model: LatencyModel = DEFAULT_LATENCY,
) -> Reallocation:
    if job.state is not JobState.RUNNING:
        raise ProtocolError(f"job {job.id} is {job.state.value}, not RUNNING")
    current = tuple(job.allocated_nodes)
    target = tuple(target_nodes)
    op = classify(current, target)
    if current[0] not in target:
        raise ProtocolError(f"job {job.id}: launcher node {current[0]} cannot be migrated")
    if len(target) not in job.valid_set:
        raise ProtocolError(f"job {job.id}: size {len(target)} not in valid node set")
    if op == "expand":
        cluster.claim(job, [n for n in target if n not in current])
    ordered = current + tuple(n for n in target if n not in current) if op == "expand" else \
        tuple(n for n in current if n in target)
    delay = to_ms(latency_model.latency(op, len(target)))
    job.set_state(JobState.ADAPTING)
    return Reallocation(job.id, op, current, ordered, now, now + delay)


def complete_adaptation(cluster: ClusterState, job: Job, realloc: Reallocation, now: int) -> None:
    if job.state is not JobState.ADAPTING or realloc.job_id != job.id:
        raise ProtocolError(f"completion for job {job.id} without a matching adaptation")
    if now != realloc.complete_time:
        raise ProtocolError(f"job {job.id}: adaptation completes at {realloc.complete_time}, not {now}")
    if realloc.op == "shrink":
        cluster.release(job, [n for n in realloc.from_nodes if n not in realloc.to_nodes])
    job.allocated_nodes = list(realloc.to_nodes)
    job.adaptations += 1
    job.set_state(JobState.RUNNING)

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..cluster import ClusterState
from ..jobs import Job, JobQueues, JobState
from ..perf import mtct


@dataclass(frozen=True)
class Launch:
    job_id: str
    nodes: int


@dataclass(frozen=True)
class Resize:
    """Request to move a running malleable job to ``target`` nodes."""

    job_id: str
    target: int


@dataclass
class ScheduleDecision:
    launches: list[Launch] = field(default_factory=list)
    resizes: list[Resize] = field(default_factory=list)
    note: Optional[dict] = None

    def __bool__(self):
        return bool(self.launches or self.resizes)


@dataclass
class SchedulerView:
    """Read-only snapshot handed to a strategy for one scheduling pass."""

    now: int  # ms
    queues: JobQueues
    cluster: ClusterState
    expected_end: Callable[[Job], Optional[int]]
    # ms a pending job would run for at nodes_requested
    estimate_runtime: Callable[[Job], int]
    corridor: Optional[tuple[float, float]] = None
    seed: int = 0

    def mtct(self, job: Job) -> float:
        progress = 1.0 - job.work_remaining / job.work_total if job.work_total else 0.0
        return mtct(job, job.size, self.seed, progress)

    def reconfigurable(self) -> list[Job]:
        return [j for j in self.cluster.running_malleable() if j.state is JobState.RUNNING]


class Strategy:
    name = "base"

    def schedule(self, view: SchedulerView) -> ScheduleDecision:
        raise NotImplementedError


def start_in_order(waiting: list[Job], free: int) -> tuple[list[Launch], int, int]:
    """FCFS: launch jobs in priority order until one does not fit.

    Returns (launches, index of the first blocked job, free nodes left).
    """
    launches = []
    i = 0
    while i < len(waiting) and waiting[i].nodes_requested <= free:
        launches.append(Launch(waiting[i].id, waiting[i].nodes_requested))
        free -= waiting[i].nodes_requested
        i += 1
    return launches, i, free

"""Node inventory and ownership."""

from __future__ import annotations

from .jobs import Job, JobState
from .perf import P_IDLE, power_draw


class AllocationError(RuntimeError):
    pass


class ClusterState:
    """Which job owns which node.

    ``reserved`` counts idle nodes promised to launches that wait for
    in-flight shrinks; strategies must treat them as unavailable.
    """

    def __init__(self, total_nodes: int, p_idle: float = P_IDLE, seed: int = 0):
        if total_nodes < 1:
            raise ValueError("total_nodes must be >= 1")
        self.total_nodes = total_nodes
        self.p_idle = p_idle
        self.seed = seed
        self.owner: dict[int, str] = {}
        self.jobs: dict[str, Job] = {}
        self.reserved = 0

    def idle_nodes(self) -> list[int]:
        return [n for n in range(self.total_nodes) if n not in self.owner]

    @property
    def idle_count(self) -> int:
        return self.total_nodes - len(self.owner)

    @property
    def free_count(self) -> int:
        return max(self.idle_count - self.reserved, 0)

    @property
    def allocated_count(self) -> int:
        return len(self.owner)

    def running(self) -> list[Job]:
        """Running and adapting jobs in priority order."""
        return sorted(self.jobs.values(), key=lambda j: j.priority)

    def running_malleable(self) -> list[Job]:
        return [j for j in self.running() if j.malleable]

    def any_adapting(self) -> bool:
        return any(j.state is JobState.ADAPTING for j in self.jobs.values())

    def claim(self, job: Job, nodes) -> None:
        for n in nodes:
            if n in self.owner:
                raise AllocationError(f"node {n} already owned by {self.owner[n]}, wanted by {job.id}")
            if not 0 <= n < self.total_nodes:
                raise AllocationError(f"node {n} does not exist")
        for n in nodes:
            self.owner[n] = job.id
        self.jobs[job.id] = job

    def release(self, job: Job, nodes) -> None:
        for n in nodes:
            if self.owner.get(n) != job.id:
                raise AllocationError(f"job {job.id} releasing node {n} it does not own")
            del self.owner[n]

    def held_by(self, job_id: str) -> list[int]:
        return sorted(n for n, j in self.owner.items() if j == job_id)

    def job_power(self) -> float:
        # adapting jobs draw power on every node they currently hold
        return sum(power_draw(j, len(self.held_by(j.id)), self.seed) for j in self.running())

    def power(self) -> float:
        return self.job_power() + self.idle_count * self.p_idle

    def snapshot(self) -> dict:
        return {
            "idle": self.idle_count,
            "reserved": self.reserved,
            "alloc": {j.id: len(self.held_by(j.id)) for j in self.running()},
            "power": round(self.power(), 6),
        }

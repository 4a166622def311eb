"""FCFS scheduling with mandatory shrinks and opportunistic expansion.

``PerfAware`` orders reconfiguration candidates by their MPI-to-compute
time ratio: the least efficient jobs are shrunk first and the most
efficient are expanded first. ``Fpsma`` keeps the same control flow but
favours previously started jobs: newest-started are shrunk first,
oldest-started are expanded first.
"""

from __future__ import annotations

from ..jobs import Job, expand_target, shrink_target
from .base import Launch, Resize, ScheduleDecision, SchedulerView, Strategy, start_in_order


def plan_shrinks(candidates: list[Job], deficit: int) -> list[Resize]:
    """Sequential greedy cover of ``deficit`` nodes; empty unless fully covered."""
    resizes = []
    for job in candidates:
        if deficit <= 0:
            break
        target = shrink_target(job.size, deficit, job.valid_set)
        if target is None:
            # cannot cover the whole remainder alone; give what it can
            smaller = [v for v in job.valid_set if v < job.size]
            if not smaller:
                continue
            target = min(smaller)
        resizes.append(Resize(job.id, target))
        deficit -= job.size - target
    return resizes if deficit <= 0 else []


def plan_expansions(candidates: list[Job], pool: int) -> list[Resize]:
    resizes = []
    for job in candidates:
        if pool <= 0:
            break
        target = expand_target(job.size, pool, job.valid_set)
        if target is None:
            continue
        resizes.append(Resize(job.id, target))
        pool -= target - job.size
    return resizes


class PerfAware(Strategy):
    name = "perf-aware"

    def shrink_order(self, view: SchedulerView, jobs: list[Job]) -> list[Job]:
        return sorted(jobs, key=lambda j: (-view.mtct(j), j.priority))

    def expand_order(self, view: SchedulerView, jobs: list[Job]) -> list[Job]:
        return sorted(jobs, key=lambda j: (view.mtct(j), j.priority))

    def schedule(self, view: SchedulerView) -> ScheduleDecision:
        waiting = view.queues.waiting()
        launches, blocked, free = start_in_order(waiting, view.cluster.free_count)
        head = waiting[blocked] if blocked < len(waiting) else None
        if head is None and free == 0:
            return ScheduleDecision(launches)
        # reconfiguration waits until every adaptation has finished
        if view.cluster.any_adapting():
            return ScheduleDecision(launches)
        candidates = view.reconfigurable()
        if not candidates:
            return ScheduleDecision(launches)

        resizes = []
        pool = free
        if head is not None:
            shrinks = plan_shrinks(self.shrink_order(view, candidates), head.nodes_requested - free)
            if shrinks:
                sizes = {j.id: j.size for j in candidates}
                freed = sum(sizes[r.job_id] - r.target for r in shrinks)
                resizes.extend(shrinks)
                launches.append(Launch(head.id, head.nodes_requested))
                # nodes left over once the head job holds its share
                pool = min(free, free + freed - head.nodes_requested)
                shrunk = {r.job_id for r in shrinks}
                candidates = [j for j in candidates if j.id not in shrunk]
        if pool > 0:
            resizes.extend(plan_expansions(self.expand_order(view, candidates), pool))
        return ScheduleDecision(launches, resizes)


class Fpsma(PerfAware):
    name = "fpsma"

    def shrink_order(self, view, jobs):
        return sorted(jobs, key=lambda j: (-j.start_time, -j.priority))

    def expand_order(self, view, jobs):
        return sorted(jobs, key=lambda j: (j.start_time, j.priority))


"""EASY backfilling with no reconfiguration."""

from __future__ import annotations

from .base import Launch, ScheduleDecision, SchedulerView, Strategy, start_in_order


def shadow_time(view: SchedulerView, needed: int, free: int, starting=()) -> tuple[int, int]:
    """Earliest time ``needed`` nodes are free and the surplus nodes then.

    Uses the known completion time of each running job; ``starting`` holds
    jobs launched earlier in the same pass.
    """
    ends = [(view.expected_end(j), j.priority, j.size) for j in view.cluster.running()]
    ends += [(view.now + view.estimate_runtime(j), j.priority, j.nodes_requested) for j in starting]
    ends.sort(key=lambda e: (e[0], e[1]))
    avail = free
    shadow = None
    for end, _, size in ends:
        if shadow is not None and end > shadow:
            break
        avail += size
        if shadow is None and avail >= needed:
            shadow = end
    if shadow is not None:
        # every job ending at the shadow time frees its nodes then
        return shadow, avail - needed
    raise RuntimeError(f"{needed} nodes can never become free")


class EasyBackfill(Strategy):
    name = "backfill"

    def schedule(self, view: SchedulerView) -> ScheduleDecision:
        waiting = view.queues.waiting()
        launches, blocked, free = start_in_order(waiting, view.cluster.free_count)
        if blocked == len(waiting):
            return ScheduleDecision(launches)
        head = waiting[blocked]
        shadow, extra = shadow_time(view, head.nodes_requested, free, waiting[:blocked])
        note = {"head": head.id, "shadow_ms": shadow}
        for job in waiting[blocked + 1:]:
            n = job.nodes_requested
            if n > free:
                continue
            if view.now + view.estimate_runtime(job) <= shadow:
                free -= n
            elif n <= extra:
                extra -= n
                free -= n
            else:
                continue
            launches.append(Launch(job.id, n))
        return ScheduleDecision(launches, note=note)

"""Power-corridor scheduling with LP-driven node redistribution."""

from __future__ import annotations

import itertools

from ..jobs import Job
from ..power_lp import LPInstance, RunningJob, WaitingJob, solve
from .base import Launch, Resize, ScheduleDecision, SchedulerView, Strategy

LP_MODES = ("with-waiting", "running-only")


def running_terms(view: SchedulerView) -> list[tuple[Job, RunningJob]]:
    out = []
    for job in view.cluster.running():
        vs = job.valid_set if job.malleable else (job.size,)
        out.append((job, RunningJob(job.id, tuple(vs), job.pmin_per_node, job.pmax_per_node)))
    return out


class PowerAware(Strategy):
    """Keep total power inside ``[lower, upper]``.

    When the corridor is broken and no job is adapting, the running jobs and
    one waiting job (in priority order) are fed to the LP; the first feasible
    redistribution is applied and that waiting job is started. If no waiting
    job works, running jobs alone are tried. With ``lp_mode="running-only"``
    only running jobs are ever redistributed.
    Otherwise waiting jobs are admitted in priority order while their
    declared maximum power keeps the projection under the upper bound.
    """

    name = "power-aware"

    def __init__(self, lp_mode: str = "with-waiting", combination: int = 1):
        if lp_mode not in LP_MODES:
            raise ValueError(f"unknown lp_mode {lp_mode!r}")
        if combination not in (1, 2):
            raise ValueError("combination length must be 1 or 2")
        self.lp_mode = lp_mode
        self.combination = combination

    def schedule(self, view: SchedulerView) -> ScheduleDecision:
        cluster = view.cluster
        power = cluster.power()
        waiting = view.queues.waiting()
        lower, upper = view.corridor if view.corridor else (float("-inf"), float("inf"))
        broken = not lower <= power <= upper
        note = {"power": round(power, 6), "broken": broken}

        if broken and not cluster.any_adapting() and cluster.reserved == 0:
            decision = self._redistribute(view, waiting, lower, upper)
            if decision is not None:
                decision.note = {**note, **decision.note}
                return decision

        if broken and power > upper:
            return ScheduleDecision(note=note)
        # admission by declared power, strict priority order
        launches = []
        free = cluster.free_count
        projected = power
        for job in waiting:
            n = job.nodes_requested
            step = n * (job.pmax_per_node - cluster.p_idle)
            if n > free or projected + step > upper:
                break
            launches.append(Launch(job.id, n))
            free -= n
            projected += step
        return ScheduleDecision(launches, note=note)

    def _redistribute(self, view, waiting, lower, upper):
        terms = running_terms(view)
        running = tuple(r for _, r in terms)
        cluster = view.cluster
        if self.lp_mode == "running-only":
            groups = [()]
        else:
            groups = [(j,) for j in waiting]
            if self.combination == 2:
                groups += list(itertools.combinations(waiting, 2))
            # no waiting job fits: running jobs alone may still restore it
            groups.append(())
        for group in groups:
            if not running and not group:
                continue
            inst = LPInstance(
                running=running,
                waiting=tuple(WaitingJob(j.id, j.nodes_requested, j.pmin_per_node, j.pmax_per_node) for j in group),
                total_nodes=cluster.total_nodes,
                p_idle=cluster.p_idle,
                lower=lower,
                upper=upper,
            )
            sol = solve(inst)
            if sol is None:
                continue
            resizes = [
                Resize(job.id, sol.assignment[job.id])
                for job, _ in terms
                if sol.assignment[job.id] != job.size
            ]
            launches = [Launch(j.id, j.nodes_requested) for j in group]
            return ScheduleDecision(
                launches,
                resizes,
                note={"lp": {"waiting": list(sol.waiting), "k_idle": sol.k_idle, "explored": sol.explored}},
            )
        return None

"""Deterministic discrete-event loop.

The engine owns the virtual clock (integer milliseconds), the event queue
and all mutable state. Strategies only see a snapshot and return a
decision; the engine validates and applies it, then records what happened
in the trace.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Optional

from . import perf
from .adaptation import DEFAULT_LATENCY, LatencyModel, Reallocation, begin_adaptation, complete_adaptation
from .cluster import ClusterState
from .jobs import Job, JobQueues, JobState
from .strategies import SchedulerView, make_strategy
from .timebase import ceil_ms, to_ms, to_s
from .trace import SimTrace
from .workload import Workload

log = logging.getLogger(__name__)

SUBMIT = "JobSubmitted"
TICK = "SchedulerTick"
COMPLETE = "JobCompleted"
ADAPTED = "AdaptationCompleted"
CORRIDOR = "CorridorChanged"


class SimulationError(RuntimeError):
    pass


class UnschedulableJob(SimulationError):
    pass


@dataclass
class SimConfig:
    total_nodes: int
    strategy: str = "backfill"
    scheduler_tick: float = 30.0
    rng_seed: int = 0
    time_limit: Optional[float] = None  # None: run until all jobs are done
    strategy_options: dict = field(default_factory=dict)
    latency: LatencyModel = DEFAULT_LATENCY
    p_idle: float = perf.P_IDLE

    def __post_init__(self):
        if self.scheduler_tick <= 0:
            raise ValueError("scheduler_tick must be > 0")
        if self.total_nodes < 1:
            raise ValueError("total_nodes must be >= 1")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {
            "total_nodes": self.total_nodes,
            "strategy": self.strategy,
            "scheduler_tick": self.scheduler_tick,
            "rng_seed": self.rng_seed,
            "time_limit": self.time_limit,
            "strategy_options": dict(sorted(self.strategy_options.items())),
            "latency": {
                "intercept": self.latency.intercept,
                "expand_max": self.latency.expand_max,
                "shrink_max": self.latency.shrink_max,
                "ref_nodes": self.latency.ref_nodes,
            },
            "p_idle": self.p_idle,
        }


@dataclass(order=True)
class Event:
    time: int  # ms
    seq: int
    kind: str = field(compare=False)
    job_id: Optional[str] = field(default=None, compare=False)
    data: Optional[tuple] = field(default=None, compare=False)


class EventQueue:
    def __init__(self):
        self._heap: list[Event] = []
        self._seq = 0
        self.clock = 0

    def schedule(self, time: int, kind: str, job_id=None, data=None) -> Event:
        if time < self.clock:
            raise SimulationError(f"event {kind} at {time} ms is before the clock ({self.clock} ms)")
        ev = Event(time, self._seq, kind, job_id, data)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def pop(self) -> Event:
        ev = heapq.heappop(self._heap)
        self.clock = ev.time
        return ev

    def peek(self) -> Optional[Event]:
        return self._heap[0] if self._heap else None

    def __len__(self):
        return len(self._heap)


@dataclass
class _Consumer:
    """A launch or expansion waiting for nodes that shrinks will release."""

    kind: str  # "launch" | "expand"
    job: Job
    nodes: int  # launch: size; expand: target size
    need: int  # idle nodes required
    decided: int  # ms


class Simulator:
    def __init__(self, config: SimConfig, workload: Workload):
        self.config = config
        self.workload = workload
        self.strategy = make_strategy(config.strategy, **config.strategy_options)
        self.jobs = {j.id: j for j in workload.fresh_jobs()}
        self._check_schedulable()
        self.queue = EventQueue()
        self.cluster = ClusterState(config.total_nodes, config.p_idle, config.rng_seed)
        self.queues = JobQueues()
        self.corridor: Optional[tuple[float, float]] = None
        self.rates: dict[str, float] = {}
        self.last_update: dict[str, int] = {}
        self.completion: dict[str, Event] = {}
        self.adaptations: dict[str, Reallocation] = {}
        self.pending: list[_Consumer] = []
        self.done = 0
        self.trace = SimTrace()
        self.tick_ms = to_ms(config.scheduler_tick)
        self.stalled = False
        self._actions: list[dict] = []

    def _check_schedulable(self):
        for job in self.jobs.values():
            if job.nodes_requested > self.config.total_nodes:
                raise UnschedulableJob(
                    f"job {job.id} requests {job.nodes_requested} nodes, system has {self.config.total_nodes}"
                )

    # -- work accounting -------------------------------------------------
    def _accrue(self, job: Job, now: int) -> None:
        rate = self.rates.get(job.id, 0.0)
        dt = now - self.last_update.get(job.id, now)
        if rate and dt:
            job.work_remaining = max(job.work_remaining - rate * to_s(dt), 0.0)
        self.last_update[job.id] = now

    def _set_rate(self, job: Job, now: int) -> None:
        """Re-evaluate the job's progress rate and reschedule its completion."""
        self._accrue(job, now)
        progress = 1.0 - job.work_remaining / job.work_total
        rate = perf.effective_rate(job, job.size, self.config.rng_seed, progress)
        self.rates[job.id] = rate
        old = self.completion.pop(job.id, None)
        if old is not None:
            old.data = ("stale",)
        self.completion[job.id] = self.queue.schedule(
            now + ceil_ms(job.work_remaining / rate), COMPLETE, job.id
        )

    def _pause(self, job: Job, now: int) -> None:
        self._accrue(job, now)
        self.rates[job.id] = 0.0
        old = self.completion.pop(job.id, None)
        if old is not None:
            old.data = ("stale",)

    def expected_end(self, job: Job) -> Optional[int]:
        ev = self.completion.get(job.id)
        return ev.time if ev is not None else None

    def estimate_runtime(self, job: Job) -> int:
        rate = perf.effective_rate(job, job.nodes_requested, self.config.rng_seed, 0.0)
        return ceil_ms(perf.work_total(job, self.config.rng_seed) / rate)

    # -- state changes ---------------------------------------------------
    def _launch(self, job: Job, n: int, now: int) -> None:
        nodes = self.cluster.idle_nodes()[:n]
        if len(nodes) < n:
            raise SimulationError(f"launch of {job.id} needs {n} nodes, {len(nodes)} idle")
        self.cluster.claim(job, nodes)
        job.allocated_nodes = nodes
        job.set_state(JobState.RUNNING)
        job.start_time = to_s(now)
        job.work_total = perf.work_total(job, self.config.rng_seed)
        job.work_remaining = job.work_total
        self.last_update[job.id] = now
        self._set_rate(job, now)
        self._actions.append({"a": "launch", "job": job.id, "nodes": nodes})

    def _begin(self, job: Job, target: int, now: int, decided: int) -> None:
        current = job.allocated_nodes
        if target < len(current):
            new = current[:target]
        else:
            new = current + self.cluster.idle_nodes()[: target - len(current)]
        self._pause(job, now)
        realloc = begin_adaptation(self.cluster, job, new, now, self.config.latency)
        self.adaptations[job.id] = realloc
        self.queue.schedule(realloc.complete_time, ADAPTED, job.id)
        self._actions.append({"a": "adapt_begin", "decided_ms": decided, **realloc.to_dict()})

    def _serve_pending(self, now: int) -> None:
        while self.pending and self.cluster.idle_count >= self.pending[0].need:
            c = self.pending.pop(0)
            self.cluster.reserved -= c.need
            if c.kind == "launch":
                self._launch(c.job, c.nodes, now)
            else:
                self._begin(c.job, c.nodes, now, c.decided)

    def _apply(self, decision, now: int) -> None:
        launches, resizes = decision.launches, decision.resizes
        if resizes and self.cluster.any_adapting():
            raise SimulationError("strategy issued a reallocation while a job is adapting")
        if resizes or launches:
            self._actions.append({
                "a": "decide",
                "launches": [[l.job_id, l.nodes] for l in launches],
                "resizes": [[r.job_id, r.target] for r in resizes],
            })
        seen = set()
        shrinks, expands = [], []
        for r in resizes:
            job = self.cluster.jobs.get(r.job_id)
            if job is None or job.state is not JobState.RUNNING or not job.malleable:
                raise SimulationError(f"resize of {r.job_id}: not a running malleable job")
            if r.job_id in seen:
                raise SimulationError(f"two resizes for {r.job_id} in one decision")
            seen.add(r.job_id)
            if r.target < job.size:
                shrinks.append((job, r.target))
            elif r.target > job.size:
                expands.append((job, r.target))
        released = sum(j.size - t for j, t in shrinks)
        demand = sum(t - j.size for j, t in expands) + sum(l.nodes for l in launches)
        if demand > self.cluster.free_count + released:
            raise SimulationError(
                f"decision needs {demand} nodes, only {self.cluster.free_count} free + {released} released"
            )
        for job, target in shrinks:
            self._begin(job, target, now, now)
        consumers = [_Consumer("expand", j, t, t - j.size, now) for j, t in expands]
        for l in launches:
            job = self.jobs[l.job_id]
            if job.state is not JobState.PENDING or l.nodes != job.nodes_requested:
                raise SimulationError(f"bad launch of {l.job_id}")
            self.queues.remove(job)
            consumers.append(_Consumer("launch", job, l.nodes, l.nodes, now))
        for c in consumers:
            if self.cluster.free_count >= c.need:
                if c.kind == "launch":
                    self._launch(c.job, c.nodes, now)
                else:
                    self._begin(c.job, c.nodes, now, now)
            else:
                self.pending.append(c)
                self.cluster.reserved += c.need

    # -- main loop -------------------------------------------------------
    def _view(self, now: int) -> SchedulerView:
        return SchedulerView(
            now=now,
            queues=self.queues,
            cluster=self.cluster,
            expected_end=self.expected_end,
            estimate_runtime=self.estimate_runtime,
            corridor=self.corridor,
            seed=self.config.rng_seed,
        )

    def _dispatch(self, ev: Event) -> bool:
        """Handle one event. Returns False for stale events."""
        now = ev.time
        if ev.kind == COMPLETE:
            if ev.data == ("stale",):
                return False
            job = self.jobs[ev.job_id]
            if job.state is not JobState.RUNNING:
                raise SimulationError(f"completion of {job.id} while {job.state.value}")
            self._accrue(job, now)
            job.work_remaining = 0.0
            self.cluster.release(job, job.allocated_nodes)
            del self.cluster.jobs[job.id]
            self.completion.pop(job.id, None)
            self.rates.pop(job.id, None)
            job.set_state(JobState.COMPLETED)
            job.end_time = to_s(now)
            self.done += 1
            self._actions.append({"a": "complete", "job": job.id, "nodes": job.allocated_nodes})
        elif ev.kind == ADAPTED:
            job = self.jobs[ev.job_id]
            realloc = self.adaptations.pop(job.id)
            complete_adaptation(self.cluster, job, realloc, now)
            self._actions.append({"a": "adapt_done", "job": job.id, "nodes": list(realloc.to_nodes)})
            self._set_rate(job, now)
        elif ev.kind == SUBMIT:
            job = self.jobs[ev.job_id]
            self.queues.submit(job)
        elif ev.kind == CORRIDOR:
            self.corridor = (ev.data[0], ev.data[1])
        elif ev.kind == TICK:
            if not self._finished():
                self.queue.schedule(now + self.tick_ms, TICK)
        self._serve_pending(now)
        for job in self.cluster.running():
            self._accrue(job, now)
        decision = self.strategy.schedule(self._view(now))
        self._apply(decision, now)
        return decision

    def _finished(self) -> bool:
        return self.done == len(self.jobs)

    def run(self) -> SimTrace:
        cfg = self.config
        self.trace.header(cfg.to_dict(), self.workload)
        for t, lo, hi in self.workload.corridor_schedule:
            self.queue.schedule(to_ms(t), CORRIDOR, data=(lo, hi))
        for job in sorted(self.jobs.values(), key=lambda j: j.submit_time):
            self.queue.schedule(to_ms(job.submit_time), SUBMIT, job.id)
        self.queue.schedule(self.tick_ms, TICK)
        limit = to_ms(cfg.time_limit) if cfg.time_limit is not None else None
        idle_ticks = 0

        while self.queue and not self._finished():
            ev = self.queue.peek()
            if limit is not None and ev.time > limit:
                break
            ev = self.queue.pop()
            self._actions = []
            decision = self._dispatch(ev)
            if decision is False:
                continue
            self.trace.event(ev, self._actions, decision, self.cluster.snapshot(), self.corridor)
            idle_ticks = self._stall_check(ev, decision, idle_ticks)
            if self.stalled:
                log.warning("simulation stalled at %.3f s with %d jobs waiting", to_s(ev.time), len(self.queues))
                break
        self.trace.summary(self.jobs.values(), complete=self._finished(), stalled=self.stalled)
        return self.trace

    def _stall_check(self, ev: Event, decision, idle_ticks: int) -> int:
        # nothing running, nothing pending but ticks, and a tick changed nothing
        if ev.kind != TICK or decision or self.cluster.jobs or self.pending:
            return 0
        if any(e.kind != TICK for e in self.queue._heap):
            return 0
        idle_ticks += 1
        if idle_ticks >= 2:
            self.stalled = True
        return idle_ticks


def run(config: SimConfig, workload: Workload) -> SimTrace:
    if not workload.jobs:
        raise SimulationError("workload has no jobs")
    return Simulator(config, workload).run()

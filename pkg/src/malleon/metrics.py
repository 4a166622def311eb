"""Evaluation metrics computed from a trace."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from .timebase import to_s


@dataclass
class JobRecord:
    job: str
    submit: float
    start: Optional[float]
    end: Optional[float]
    adaptations: int

    @property
    def waiting(self) -> Optional[float]:
        return None if self.start is None else self.start - self.submit

    @property
    def response(self) -> Optional[float]:
        return None if self.end is None else self.end - self.submit


@dataclass
class MetricsReport:
    makespan: float
    avg_utilization: float
    avg_response: float
    avg_waiting: float
    corridor_violations: int
    corridor_excursions: int
    restoration_window: float
    power_timeline: list[tuple[float, float, Optional[float], Optional[float]]] = field(repr=False)
    per_job: list[JobRecord] = field(repr=False)
    complete: bool = True
    strategy: str = ""
    workload_hash: str = ""
    total_adaptations: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["power_timeline"] = [list(p) for p in self.power_timeline]
        d["per_job"] = [
            {**asdict(r), "waiting": r.waiting, "response": r.response} for r in self.per_job
        ]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def text(self) -> str:
        rows = [
            ("strategy", self.strategy),
            ("workload", self.workload_hash),
            ("complete", str(self.complete)),
            ("makespan [s]", f"{self.makespan:.3f}"),
            ("avg utilization", f"{self.avg_utilization:.4f}"),
            ("avg response [s]", f"{self.avg_response:.3f}"),
            ("avg waiting [s]", f"{self.avg_waiting:.3f}"),
            ("corridor violations", str(self.corridor_violations)),
            ("corridor excursions", str(self.corridor_excursions)),
            ("adaptations", str(self.total_adaptations)),
        ]
        width = max(len(k) for k, _ in rows)
        return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)

    def power_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "watts", "lower", "upper"])
        for t, p, lo, hi in self.power_timeline:
            w.writerow([f"{t:.3f}", f"{p:.3f}", "" if lo is None else f"{lo:g}", "" if hi is None else f"{hi:g}"])
        return buf.getvalue()


def active_corridor(schedule: Sequence, t: float):
    current = None
    for start, lo, hi in schedule:
        if start <= t:
            current = (lo, hi)
    return current


def count_corridor_violations(power_timeline, corridor_schedule, grace: float = 0.0) -> int:
    """Number of excursions of total power outside the active corridor.

    ``power_timeline`` is a list of ``(time, watts)`` samples (extra fields
    ignored); each sample holds until the next one. An excursion is a
    maximal run of outside samples with no corridor change inside it, and is
    counted when it lasts longer than ``grace`` seconds.
    """
    count = 0
    run_start = None
    run_corridor = None
    samples = list(power_timeline)
    for sample in samples:
        t, watts = sample[0], sample[1]
        corridor = active_corridor(corridor_schedule, t)
        outside = corridor is not None and not corridor[0] <= watts <= corridor[1]
        if run_start is not None and (not outside or corridor != run_corridor):
            if t - run_start > grace:
                count += 1
            run_start = None
        if outside and run_start is None:
            run_start, run_corridor = t, corridor
    if run_start is not None and samples and samples[-1][0] - run_start > grace:
        count += 1
    return count


def allocation_steps(trace) -> list[tuple[float, int]]:
    """(time, allocated nodes) after each dispatched event."""
    n = trace.total_nodes
    steps = []
    for rec in trace.events:
        t = to_s(rec["t"])
        alloc = n - rec["snapshot"]["idle"]
        if steps and steps[-1][0] == t:
            steps[-1] = (t, alloc)
        else:
            steps.append((t, alloc))
    return steps


def busy_node_seconds(steps, t0: float, t1: float) -> float:
    """Closed form: sum of interval length times allocated count."""
    total = 0.0
    for (t, a), nxt in zip(steps, steps[1:] + [(t1, 0)]):
        lo, hi = max(t, t0), min(nxt[0], t1)
        if hi > lo:
            total += (hi - lo) * a
    return total


def busy_node_seconds_trapezoid(steps, t0: float, t1: float) -> float:
    """Trapezoid rule over the step function written as a polyline."""
    xs, ys = [], []
    for (t, a), nxt in zip(steps, steps[1:] + [(t1, 0)]):
        lo, hi = max(t, t0), min(nxt[0], t1)
        if hi > lo:
            xs += [lo, hi]
            ys += [a, a]
    return sum((xs[i + 1] - xs[i]) * (ys[i] + ys[i + 1]) / 2.0 for i in range(len(xs) - 1))


def compute(trace, restoration_window: Optional[float] = None) -> MetricsReport:
    """Aggregate metrics for one trace.

    Corridor excursions shorter than ``restoration_window`` seconds count as
    the scheduler restoring the corridor, not as violations. The default
    window is the longest adaptation latency of the run's latency model.
    """
    final = trace.final
    per_job = [
        JobRecord(r["job"], r["submit"], r["start"], r["end"], r["adaptations"]) for r in final["jobs"]
    ]
    complete = bool(final.get("complete")) and all(r.end is not None for r in per_job)
    ended = [r for r in per_job if r.end is not None]
    started = [r for r in per_job if r.start is not None]
    first_submit = min(r.submit for r in per_job)
    last_end = max((r.end for r in ended), default=first_submit)
    makespan = last_end - first_submit
    steps = allocation_steps(trace)
    busy = busy_node_seconds(steps, first_submit, last_end)
    util = busy / (trace.total_nodes * makespan) if makespan > 0 else 0.0

    timeline = []
    for rec in trace.events:
        c = rec.get("corridor")
        point = (to_s(rec["t"]), rec["snapshot"]["power"], c[0] if c else None, c[1] if c else None)
        if timeline and timeline[-1][0] == point[0]:
            timeline[-1] = point
        else:
            timeline.append(point)
    schedule = trace.head["workload"].get("corridor_schedule", [])
    if restoration_window is None:
        lat = trace.head["config"]["latency"]
        restoration_window = max(lat["expand_max"], lat["shrink_max"])
    window = restoration_window

    return MetricsReport(
        makespan=makespan,
        avg_utilization=util,
        avg_response=sum(r.response for r in ended) / len(ended) if ended else 0.0,
        avg_waiting=sum(r.waiting for r in started) / len(started) if started else 0.0,
        corridor_violations=count_corridor_violations(timeline, schedule, window),
        corridor_excursions=count_corridor_violations(timeline, schedule, 0.0),
        restoration_window=window,
        power_timeline=timeline,
        per_job=per_job,
        complete=complete,
        strategy=trace.head["config"]["strategy"],
        workload_hash=trace.head["workload_hash"],
        total_adaptations=sum(r.adaptations for r in per_job),
    )

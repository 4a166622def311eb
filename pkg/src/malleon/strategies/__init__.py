"""Scheduling strategies, looked up by id."""

from .backfill import EasyBackfill
from .base import Launch, Resize, ScheduleDecision, SchedulerView, Strategy
from .malleable import Fpsma, PerfAware
from .power import PowerAware

STRATEGIES = {
    "backfill": EasyBackfill,
    "fpsma": Fpsma,
    "perf-aware": PerfAware,
    "power-aware": PowerAware,
}


class UnknownStrategy(KeyError):
    pass


def make_strategy(name: str, **options) -> Strategy:
    try:
        cls = STRATEGIES[name]
    except KeyError:
        raise UnknownStrategy(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}") from None
    return cls(**options) if options else cls()


__all__ = [
    "STRATEGIES", "EasyBackfill", "Fpsma", "Launch", "PerfAware", "PowerAware", "Resize",
    "ScheduleDecision", "SchedulerView", "Strategy", "UnknownStrategy", "make_strategy",
]

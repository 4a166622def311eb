"""Jobs, queues and node-count constraint arithmetic."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional


class ConfigError(ValueError):
    """A job or workload definition that can never be run."""


class JobKind(str, enum.Enum):
    RIGID = "rigid"
    MALLEABLE = "malleable"


class JobState(str, enum.Enum):
    PENDING = "PENDING"
    RUNNING = "RUNNING"
    ADAPTING = "ADAPTING"
    COMPLETED = "COMPLETED"


_TRANSITIONS = {
    JobState.PENDING: {JobState.RUNNING},
    JobState.RUNNING: {JobState.ADAPTING, JobState.COMPLETED},
    JobState.ADAPTING: {JobState.RUNNING},
    JobState.COMPLETED: set(),
}

CONSTRAINTS = ("pof2", "even", "odd", "ncube", "none")


def _is_cube(n: int) -> bool:
    c = round(n ** (1.0 / 3.0))
    return any((c + d) ** 3 == n for d in (-1, 0, 1) if c + d >= 1)


def _satisfies(constraint: str, n: int) -> bool:
    if constraint == "pof2":
        return n & (n - 1) == 0
    if constraint == "even":
        return n % 2 == 0
    if constraint == "odd":
        return n % 2 == 1
    if constraint == "ncube":
        return _is_cube(n)
    return True


def valid_node_set(constraint: Optional[str], min_nodes: int, max_nodes: int) -> tuple[int, ...]:
    """All node counts in ``[min_nodes, max_nodes]`` allowed by ``constraint``.

    ``None`` and ``"none"`` allow every count. Raises ConfigError for an
    inverted range or an unknown constraint name.
    """
    constraint = constraint or "none"
    if constraint not in CONSTRAINTS:
        raise ConfigError(f"unknown node constraint {constraint!r}")
    if min_nodes < 1 or min_nodes > max_nodes:
        raise ConfigError(f"invalid node range [{min_nodes}, {max_nodes}]")
    return tuple(n for n in range(min_nodes, max_nodes + 1) if _satisfies(constraint, n))


def shrink_target(current: int, needed: int, valid_set) -> Optional[int]:
    """Largest valid size leaving at least ``needed`` nodes free, or None."""
    best = None
    for v in valid_set:
        if v <= current - needed and (best is None or v > best):
            best = v
    return best


def expand_target(current: int, idle: int, valid_set) -> Optional[int]:
    """Largest valid size above ``current`` whose increment fits in ``idle``."""
    best = None
    for v in valid_set:
        if current < v <= current + idle and (best is None or v > best):
            best = v
    return best


@dataclass
class PerfModelSpec:
    mtct_base: float = 0.1
    mtct_slope: float = 0.0
    power_nominal_per_node: float = 200.0
    noise_amplitude: float = 0.0
    model_id: str = "linear"
    # only used by phase-varying models
    phase_amplitude: float = 0.0
    phase_count: int = 4


@dataclass
class Job:
    id: str
    nodes_requested: int
    static_exec_time: float
    submit_time: float = 0.0
    kind: JobKind = JobKind.RIGID
    min_nodes: Optional[int] = None
    max_nodes: Optional[int] = None
    constraint: str = "none"
    pmin_per_node: float = 0.0
    pmax_per_node: float = 1.0e9
    perf: PerfModelSpec = field(default_factory=PerfModelSpec)
    job_type: str = ""

    state: JobState = JobState.PENDING
    priority: Optional[int] = None
    allocated_nodes: list[int] = field(default_factory=list)
    work_total: float = 0.0
    work_remaining: float = 0.0
    start_time: Optional[float] = None
    end_time: Optional[float] = None
    adaptations: int = 0

    def __post_init__(self):
        self.kind = JobKind(self.kind)
        self.state = JobState(self.state)
        if self.nodes_requested < 1:
            raise ConfigError(f"job {self.id}: nodes_requested must be >= 1")
        if self.static_exec_time <= 0:
            raise ConfigError(f"job {self.id}: static_exec_time must be > 0")
        if self.pmin_per_node > self.pmax_per_node:
            raise ConfigError(f"job {self.id}: pmin_per_node > pmax_per_node")
        if self.kind is JobKind.MALLEABLE:
            if self.min_nodes is None or self.max_nodes is None:
                raise ConfigError(f"job {self.id}: malleable job needs min/max nodes")
            try:
                vs = self.valid_set
            except ConfigError as exc:
                raise ConfigError(f"job {self.id}: {exc}") from None
            if not vs:
                raise ConfigError(
                    f"job {self.id}: no node count in [{self.min_nodes}, {self.max_nodes}] "
                    f"satisfies {self.constraint!r}"
                )
            if not (self.min_nodes <= self.nodes_requested <= self.max_nodes):
                raise ConfigError(f"job {self.id}: nodes_requested outside [min, max]")

    @property
    def malleable(self) -> bool:
        return self.kind is JobKind.MALLEABLE

    @property
    def valid_set(self) -> tuple[int, ...]:
        if not self.malleable:
            return (self.nodes_requested,)
        return valid_node_set(self.constraint, self.min_nodes, self.max_nodes)

    @property
    def size(self) -> int:
        return len(self.allocated_nodes)

    @property
    def launcher(self) -> Optional[int]:
        return self.allocated_nodes[0] if self.allocated_nodes else None

    def set_state(self, new: JobState) -> None:
        if new not in _TRANSITIONS[self.state]:
            raise RuntimeError(f"job {self.id}: illegal transition {self.state.value} -> {new.value}")
        self.state = new

    def spec_dict(self) -> dict:
        """Submission-time fields only (what a workload file stores)."""
        d = {
            "id": self.id,
            "kind": self.kind.value,
            "nodes": self.nodes_requested,
            "static_exec_time": self.static_exec_time,
            "submit_time": self.submit_time,
            "constraint": self.constraint,
            "pmin_per_node": self.pmin_per_node,
            "pmax_per_node": self.pmax_per_node,
            "perf": {
                "mtct_base": self.perf.mtct_base,
                "mtct_slope": self.perf.mtct_slope,
                "power_nominal_per_node": self.perf.power_nominal_per_node,
                "noise_amplitude": self.perf.noise_amplitude,
                "model_id": self.perf.model_id,
                "phase_amplitude": self.perf.phase_amplitude,
                "phase_count": self.perf.phase_count,
            },
        }
        if self.job_type:
            d["type"] = self.job_type
        if self.malleable:
            d["min_nodes"] = self.min_nodes
            d["max_nodes"] = self.max_nodes
        return d

    @classmethod
    def from_spec(cls, d: dict) -> "Job":
        known = {
            "id", "kind", "nodes", "static_exec_time", "submit_time", "constraint",
            "pmin_per_node", "pmax_per_node", "perf", "type", "min_nodes", "max_nodes",
        }
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"job {d.get('id')!r}: unknown keys {sorted(unknown)}")
        perf = d.get("perf", {})
        unknown = set(perf) - set(PerfModelSpec.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"job {d.get('id')!r}: unknown perf keys {sorted(unknown)}")
        try:
            return cls(
                id=str(d["id"]),
                kind=JobKind(d.get("kind", "rigid")),
                nodes_requested=int(d["nodes"]),
                static_exec_time=float(d["static_exec_time"]),
                submit_time=float(d.get("submit_time", 0.0)),
                constraint=d.get("constraint", "none"),
                min_nodes=d.get("min_nodes"),
                max_nodes=d.get("max_nodes"),
                pmin_per_node=float(d.get("pmin_per_node", 0.0)),
                pmax_per_node=float(d.get("pmax_per_node", 1.0e9)),
                perf=PerfModelSpec(**perf),
                job_type=d.get("type", ""),
            )
        except KeyError as exc:
            raise ConfigError(f"job {d.get('id')!r}: missing field {exc.args[0]!r}") from None


class JobQueues:
    """Pending jobs in two priority-ordered queues (rigid and elastic).

    Priority is the arrival rank, 1 for the first submitted job.
    """

    def __init__(self):
        self.rigid: list[Job] = []
        self.elastic: list[Job] = []
        self._next_priority = 1

    def submit(self, job: Job) -> None:
        if job.state is not JobState.PENDING:
            raise ConfigError(f"job {job.id}: only PENDING jobs can be submitted")
        # re-validates bounds and the node set
        job.valid_set
        job.priority = self._next_priority
        self._next_priority += 1
        (self.elastic if job.malleable else self.rigid).append(job)

    def remove(self, job: Job) -> None:
        (self.elastic if job.malleable else self.rigid).remove(job)

    def waiting(self) -> list[Job]:
        """Both queues merged in priority order."""
        return sorted(self.rigid + self.elastic, key=lambda j: j.priority)

    def __len__(self):
        return len(self.rigid) + len(self.elastic)

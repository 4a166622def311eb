"""Simulation traces as line-delimited JSON.

A trace is a header record, one record per dispatched event and a summary
record. Every state change appears as an ordered ``actions`` entry, so the
trace alone is enough to recompute metrics or audit the protocol.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class SimTrace:
    def __init__(self, records: list[dict] | None = None):
        self.records: list[dict] = records or []

    def header(self, config: dict, workload) -> None:
        self.records.append({
            "type": "header",
            "config": config,
            "workload": workload.to_dict(),
            "workload_hash": workload.digest(),
        })

    def event(self, ev, actions, decision, snapshot, corridor) -> None:
        rec = {
            "type": "event",
            "t": ev.time,
            "seq": ev.seq,
            "kind": ev.kind,
            "snapshot": snapshot,
            "corridor": list(corridor) if corridor else None,
        }
        if ev.job_id is not None:
            rec["job"] = ev.job_id
        if actions:
            rec["actions"] = actions
        if decision is not None and decision.note:
            rec["note"] = decision.note
        self.records.append(rec)

    def summary(self, jobs: Iterable, complete: bool, stalled: bool) -> None:
        rows = []
        for j in sorted(jobs, key=lambda j: (j.priority is None, j.priority, j.id)):
            rows.append({
                "job": j.id,
                "priority": j.priority,
                "nodes": j.nodes_requested,
                "submit": j.submit_time,
                "start": j.start_time,
                "end": j.end_time,
                "adaptations": j.adaptations,
                "state": j.state.value,
            })
        self.records.append({"type": "summary", "complete": complete, "stalled": stalled, "jobs": rows})

    # -- access ----------------------------------------------------------
    @property
    def head(self) -> dict:
        return self.records[0]

    @property
    def events(self) -> list[dict]:
        return [r for r in self.records if r["type"] == "event"]

    @property
    def final(self) -> dict:
        return self.records[-1]

    @property
    def total_nodes(self) -> int:
        return self.head["config"]["total_nodes"]

    def actions(self):
        """(time_ms, action) pairs in dispatch order."""
        for rec in self.events:
            for a in rec.get("actions", ()):
                yield rec["t"], a

    # -- io --------------------------------------------------------------
    def dumps(self) -> str:
        return "".join(_dumps(r) + "\n" for r in self.records)

    def write(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def read(cls, path) -> "SimTrace":
        with open(path) as fh:
            return cls([json.loads(line) for line in fh if line.strip()])

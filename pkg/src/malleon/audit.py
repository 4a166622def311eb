"""Replay a trace and check the reallocation protocol.

Checks, per action: no node owned twice, reallocations pure expand or pure
shrink, launcher node kept, no decision with resizes while a job adapts,
completions only for non-adapting jobs, adaptation windows matching their
scheduled completion, and sizes inside each job's valid node set.
"""

from __future__ import annotations

from .jobs import Job


def audit(trace) -> list[str]:
    specs = {j.id: j for j in (Job.from_spec(d) for d in trace.head["workload"]["jobs"])}
    total = trace.total_nodes
    owner: dict[int, str] = {}
    alloc: dict[str, list[int]] = {}
    adapting: dict[str, dict] = {}
    problems = []

    def bad(t, msg):
        problems.append(f"t={t}ms: {msg}")

    for rec in trace.events:
        t = rec["t"]
        for a in rec.get("actions", ()):
            kind = a["a"]
            if kind == "launch":
                job = a["job"]
                if job in alloc:
                    bad(t, f"{job} launched twice")
                for n in a["nodes"]:
                    if n in owner:
                        bad(t, f"node {n} double-allocated ({owner[n]}, {job})")
                    owner[n] = job
                alloc[job] = list(a["nodes"])
                if len(a["nodes"]) != specs[job].nodes_requested:
                    bad(t, f"{job} launched on {len(a['nodes'])} nodes, requested {specs[job].nodes_requested}")
            elif kind == "decide":
                if a["resizes"] and adapting:
                    bad(t, f"reallocation decided while {sorted(adapting)} adapting")
            elif kind == "adapt_begin":
                job = a["job"]
                src, dst = a["from"], a["to"]
                if job in adapting:
                    bad(t, f"{job} adaptation begun while already adapting")
                if src != alloc.get(job):
                    bad(t, f"{job} adaptation starts from {src}, holds {alloc.get(job)}")
                s, d = set(src), set(dst)
                if not (s < d or d < s):
                    bad(t, f"{job} mixed or empty reallocation {src} -> {dst}")
                if (a["op"] == "expand") != (s < d):
                    bad(t, f"{job} reallocation labelled {a['op']}")
                if not src or src[0] not in d:
                    bad(t, f"{job} launcher node migrated")
                if len(dst) not in specs[job].valid_set:
                    bad(t, f"{job} target size {len(dst)} outside valid set")
                for n in d - s:
                    if n in owner:
                        bad(t, f"node {n} double-allocated ({owner[n]}, {job})")
                    owner[n] = job
                adapting[job] = a
            elif kind == "adapt_done":
                job = a["job"]
                begun = adapting.pop(job, None)
                if begun is None:
                    bad(t, f"{job} adaptation completed without a begin")
                    continue
                if begun["complete_ms"] != t:
                    bad(t, f"{job} adaptation completed at {t}, scheduled {begun['complete_ms']}")
                for n in set(begun["from"]) - set(begun["to"]):
                    owner.pop(n, None)
                alloc[job] = list(begun["to"])
            elif kind == "complete":
                job = a["job"]
                if job in adapting:
                    bad(t, f"{job} completed while adapting")
                for n in alloc.pop(job, []):
                    if owner.get(n) != job:
                        bad(t, f"{job} released node {n} it did not own")
                    owner.pop(n, None)
            for n in owner:
                if not 0 <= n < total:
                    bad(t, f"node {n} does not exist")
        if rec["snapshot"]["idle"] != total - len(owner):
            bad(t, f"snapshot idle {rec['snapshot']['idle']} != {total - len(owner)}")
        for job, nodes in alloc.items():
            spec = specs[job]
            if not spec.malleable and len(nodes) != spec.nodes_requested:
                bad(t, f"rigid job {job} resized to {len(nodes)}")
    return problems

"""Command-line entry point.

    malleon run SCENARIO.toml [--strategy S|all] [--seed N] [--malleable F]
                              [--nodes N] [--tick S] [--out DIR] [--jobs K]
    malleon compare REPORT.json REPORT.json [...] [--csv PATH]
    malleon gen {esp,power} [--nodes N] [--malleable F] [--seed N] -o PATH

Exit codes: 0 ok, 2 bad input, 3 unschedulable job, 4 reports from
different workloads.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import scenario as scenario_mod
from .engine import SimulationError, UnschedulableJob, run
from .jobs import ConfigError
from .metrics import compute
from .strategies import STRATEGIES
from .workload import esp_workload, power_workload

log = logging.getLogger("malleon")

EXIT_OK, EXIT_INPUT, EXIT_UNSCHEDULABLE, EXIT_MISMATCH = 0, 2, 3, 4

COMPARE_METRICS = ("makespan", "avg_utilization", "avg_response", "avg_waiting")


def _setup_logging() -> None:
    level = os.environ.get("MALLEON_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _simulate(args):
    config, workload = args
    trace = run(config, workload)
    return trace.dumps(), compute(trace)


def cmd_run(ns) -> int:
    sc = scenario_mod.load(ns.scenario)
    if ns.strategy == "all":
        sc.strategies = list(STRATEGIES)
    elif ns.strategy:
        if ns.strategy not in STRATEGIES:
            raise scenario_mod.SchemaError(f"--strategy: unknown strategy {ns.strategy!r}")
        sc.strategies = [ns.strategy]
    if ns.seed is not None:
        sc.seed = ns.seed
        sc.workload["seed"] = ns.seed
    if ns.malleable is not None:
        sc.workload["malleable"] = ns.malleable
    if ns.nodes is not None:
        sc.nodes = ns.nodes
    if ns.tick is not None:
        if ns.tick <= 0:
            raise scenario_mod.SchemaError("--tick must be > 0")
        sc.tick = ns.tick
    out_dir = Path(ns.out or (sc.base_dir / sc.out_dir))

    workload = sc.build_workload()
    configs = [sc.config(s, workload) for s in sc.strategies]
    for cfg in configs:
        too_big = [j.id for j in workload.jobs if j.nodes_requested > cfg.total_nodes]
        if too_big:
            raise UnschedulableJob(f"job {too_big[0]} requests more than {cfg.total_nodes} nodes")

    log.info("running %d strategies on %s (%s)", len(configs), workload.name, workload.digest())
    tasks = [(cfg, workload) for cfg in configs]
    if ns.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            results = list(pool.map(_simulate, tasks))
    else:
        results = [_simulate(t) for t in tasks]

    # write only after every run succeeded
    out_dir.mkdir(parents=True, exist_ok=True)
    for strategy, (trace_text, report) in zip(sc.strategies, results):
        stem = out_dir / f"{sc.name}-{strategy}"
        Path(f"{stem}.trace.jsonl").write_text(trace_text)
        Path(f"{stem}.report.json").write_text(report.to_json())
        Path(f"{stem}.report.txt").write_text(report.text())
        Path(f"{stem}.power.csv").write_text(report.power_csv())
        print(f"{strategy}: makespan {report.makespan:.1f} s, violations {report.corridor_violations} -> {stem}.*")
    return EXIT_OK


def compare_rows(reports: list[dict]) -> list[dict]:
    """One row per report; deltas relative to the first report as (b - a) / b."""
    base = reports[0]
    rows = []
    for r in reports:
        row = {"strategy": r["strategy"]}
        for m in COMPARE_METRICS:
            b, a = base[m], r[m]
            row[m] = a
            row[f"{m}_delta"] = (b - a) / b if b else 0.0
        rows.append(row)
    return rows


def cmd_compare(ns) -> int:
    if len(ns.reports) < 2:
        raise scenario_mod.SchemaError("compare needs at least two reports")
    reports = []
    for p in ns.reports:
        try:
            reports.append(json.loads(Path(p).read_text()))
        except FileNotFoundError:
            raise scenario_mod.SchemaError(f"report {p} not found") from None
        except json.JSONDecodeError as exc:
            raise scenario_mod.SchemaError(f"{p}: not valid JSON ({exc})") from None
        missing = [k for k in ("workload_hash", "strategy", *COMPARE_METRICS) if k not in reports[-1]]
        if missing:
            raise scenario_mod.SchemaError(f"{p}: missing fields {missing}")
    hashes = {r["workload_hash"] for r in reports}
    if len(hashes) > 1:
        print(f"error: reports come from different workloads: {sorted(hashes)}", file=sys.stderr)
        return EXIT_MISMATCH
    rows = compare_rows(reports)

    header = ["strategy"] + [f"{m}" for m in COMPARE_METRICS] + [f"{m}_delta" for m in COMPARE_METRICS]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([row["strategy"]] + [f"{row[h]:.6f}" for h in header[1:]])
    if ns.csv:
        Path(ns.csv).write_text(buf.getvalue())

    print(f"{'strategy':<14}" + "".join(f"{m:>18}{'delta':>9}" for m in COMPARE_METRICS))
    for row in rows:
        cells = "".join(f"{row[m]:>18.3f}{row[m + '_delta']:>+9.1%}" for m in COMPARE_METRICS)
        print(f"{row['strategy']:<14}{cells}")
    return EXIT_OK


def cmd_gen(ns) -> int:
    if ns.kind == "esp":
        wl = esp_workload(ns.nodes or 32, ns.malleable if ns.malleable is not None else 1.0, ns.seed)
    else:
        if ns.nodes is not None:
            raise scenario_mod.SchemaError("--nodes does not apply to the power workload")
        wl = power_workload(ns.seed, malleable=(ns.malleable is None or ns.malleable > 0))
    wl.save(ns.output)
    print(f"{len(wl.jobs)} jobs -> {ns.output} ({wl.digest()})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="malleon", description="Malleable job scheduling simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("scenario")
    r.add_argument("--strategy", help="strategy name or 'all'")
    r.add_argument("--seed", type=int)
    r.add_argument("--malleable", type=float, help="fraction of malleable jobs (ESP workloads)")
    r.add_argument("--nodes", type=int)
    r.add_argument("--tick", type=float, help="scheduler tick in seconds")
    r.add_argument("--out", help="output directory")
    r.add_argument("--jobs", type=int, default=1, help="parallel runs for --strategy all")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="compare metric reports")
    c.add_argument("reports", nargs="+")
    c.add_argument("--csv", help="write the comparison as CSV")
    c.set_defaults(func=cmd_compare)

    g = sub.add_parser("gen", help="generate a workload file")
    g.add_argument("kind", choices=("esp", "power"))
    g.add_argument("--nodes", type=int)
    g.add_argument("--malleable", type=float)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    _setup_logging()
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except UnschedulableJob as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSCHEDULABLE
    except (ConfigError, ValueError, SimulationError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

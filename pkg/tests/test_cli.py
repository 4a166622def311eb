import json

import pytest

from malleon.cli import compare_rows, main

ESP_TOML = """
[simulation]
strategy = "perf-aware"
nodes = 16
seed = 1

[workload]
kind = "esp"
malleable = 1.0

[output]
name = "esp"
"""


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "esp.toml"
    path.write_text(ESP_TOML)
    return path


def test_run_writes_outputs(scenario, tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(scenario), "--strategy", "perf-aware", "--malleable", "1.0",
                 "--seed", "7", "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["esp-perf-aware.power.csv", "esp-perf-aware.report.json",
                     "esp-perf-aware.report.txt", "esp-perf-aware.trace.jsonl"]
    report = json.loads((out / "esp-perf-aware.report.json").read_text())
    assert report["complete"] and report["strategy"] == "perf-aware"


def test_run_all_shares_workload(scenario, tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(scenario), "--strategy", "all", "--out", str(out)]) == 0
    reports = [json.loads(p.read_text()) for p in sorted(out.glob("*.report.json"))]
    assert len(reports) == 4
    assert len({r["workload_hash"] for r in reports}) == 1


def test_parallel_fan_out_is_identical(scenario, tmp_path):
    main(["run", str(scenario), "--strategy", "all", "--out", str(tmp_path / "a")])
    main(["run", str(scenario), "--strategy", "all", "--out", str(tmp_path / "b"), "--jobs", "2"])
    for p in sorted((tmp_path / "a").iterdir()):
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


def test_missing_scenario(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(tmp_path / "nope.toml"), "--out", str(out)]) == 2
    assert not out.exists()


@pytest.mark.parametrize("text, field", [
    ("[simulation]\nstrategey = 'backfill'\n", "strategey"),
    ("[simulaton]\n", "simulaton"),
    ("[simulation]\nstrategy = 'magic'\n", "magic"),
    ("[workload]\nkind = 'esp'\nmaleable = 0.5\n", "maleable"),
    ("[simulation]\ntick = -1.0\n", "tick"),
    ("[workload]\nkind = 'file'\n", "workload.file"),
    ("[simulation\n", "esp.toml"),
])
def test_schema_errors(tmp_path, capsys, text, field):
    path = tmp_path / "esp.toml"
    path.write_text(text)
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out)]) == 2
    assert field in capsys.readouterr().err
    assert not out.exists()


def test_unschedulable(tmp_path, capsys):
    path = tmp_path / "s.toml"
    path.write_text("""
[simulation]
nodes = 2

[workload]
kind = "inline"
jobs = [{id = "huge", nodes = 4, static_exec_time = 10.0}]
""")
    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == 3
    assert "huge" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_inline_workload_with_perf_defaults_and_corridor(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text("""
[simulation]
nodes = 4
strategy = "power-aware"

[workload]
kind = "inline"
jobs = [
  {id = "a", nodes = 2, static_exec_time = 10.0, kind = "malleable", min_nodes = 1, max_nodes = 4},
  {id = "b", nodes = 1, static_exec_time = 5.0, submit_time = 1.0},
]

[perf]
power_nominal_per_node = 150.0

[corridor]
schedule = [[0.0, 100.0, 700.0]]

[output]
dir = "res"
""")
    assert main(["run", str(path)]) == 0
    trace = (tmp_path / "res" / "s-power-aware.trace.jsonl").read_text().splitlines()
    header = json.loads(trace[0])
    assert header["workload"]["corridor_schedule"] == [[0.0, 100.0, 700.0]]
    assert {j["perf"]["power_nominal_per_node"] for j in header["workload"]["jobs"]} == {150.0}


def test_file_workload(tmp_path):
    assert main(["gen", "power", "-o", str(tmp_path / "w.json"), "--seed", "2"]) == 0
    path = tmp_path / "s.toml"
    path.write_text('[simulation]\nstrategy = "power-aware"\n[workload]\nkind = "file"\nfile = "w.json"\n')
    assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 0


def test_gen_esp(tmp_path):
    assert main(["gen", "esp", "--nodes", "32", "-o", str(tmp_path / "w.json")]) == 0
    data = json.loads((tmp_path / "w.json").read_text())
    assert len(data["jobs"]) == 230 and data["system_nodes"] == 32


def tiny_report(strategy, makespan, util, resp, wait, h="h1"):
    return {"strategy": strategy, "workload_hash": h, "makespan": makespan, "avg_utilization": util,
            "avg_response": resp, "avg_waiting": wait}


def test_compare_deltas_by_hand(tmp_path, capsys):
    b = tmp_path / "b.json"
    a = tmp_path / "a.json"
    b.write_text(json.dumps(tiny_report("backfill", 200.0, 0.5, 100.0, 40.0)))
    a.write_text(json.dumps(tiny_report("perf-aware", 150.0, 0.8, 75.0, 10.0)))
    csv_path = tmp_path / "c.csv"
    assert main(["compare", str(b), str(a), "--csv", str(csv_path)]) == 0
    rows = compare_rows([json.loads(b.read_text()), json.loads(a.read_text())])
    # (b - a) / b
    assert rows[1]["makespan_delta"] == 0.25
    assert rows[1]["avg_utilization_delta"] == pytest.approx(-0.6)
    assert rows[1]["avg_response_delta"] == 0.25
    assert rows[1]["avg_waiting_delta"] == 0.75
    lines = csv_path.read_text().splitlines()
    assert lines[2].startswith("perf-aware,150.000000,0.800000,75.000000,10.000000,0.250000,-0.600000")
    assert "+25.0%" in capsys.readouterr().out


def test_compare_errors(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text(json.dumps(tiny_report("x", 1.0, 1.0, 1.0, 1.0)))
    b.write_text(json.dumps(tiny_report("y", 1.0, 1.0, 1.0, 1.0, h="h2")))
    assert main(["compare", str(a)]) == 2
    assert main(["compare", str(a), str(b)]) == 4
    assert main(["compare", str(a), str(tmp_path / "missing.json")]) == 2

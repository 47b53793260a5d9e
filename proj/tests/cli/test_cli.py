import json
import os
import pathlib
import subprocess

import pytest

UTM = os.environ.get("UTM_CLI", "utm")
SCENARIOS = pathlib.Path(os.environ["UTM_SCENARIO_DIR"])


def utm(*args, cwd=None):
    return subprocess.run([UTM, *map(str, args)], capture_output=True, text=True, cwd=cwd)


@pytest.fixture(scope="module")
def demo_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    r = utm("run", "--scenario", SCENARIOS / "demo.scenario.json", "--out", out, "--quiet")
    assert r.returncode == 0, r.stderr
    return out


def test_run_writes_all_outputs(demo_run):
    names = sorted(p.name for p in demo_run.iterdir())
    assert names == [
        "demo.chain.jsonl",
        "demo.events.jsonl",
        "demo.metrics.json",
        "demo.state.json",
        "demo.trace.csv",
    ]
    metrics = json.loads((demo_run / "demo.metrics.json").read_text())
    assert metrics["schema"]["name"] == "utm.metrics"
    assert metrics["operations"]["requestMissionQuote"]["stateWrites"] == 0
    trace = (demo_run / "demo.trace.csv").read_text().splitlines()
    assert trace[0] == "tick,droneId,cell,broadcast"
    tick, drone, cell, hexmsg = trace[1].split(",")
    assert len(hexmsg) == 128 and int(tick) >= 0
    chain = (demo_run / "demo.chain.jsonl").read_text().splitlines()
    assert json.loads(chain[0])["schema"]["name"] == "utm.chain"
    assert len(chain) - 1 == metrics["blocks"]
    events = (demo_run / "demo.events.jsonl").read_text().splitlines()
    assert json.loads(events[0])["schema"]["name"] == "utm.events"
    assert {"block", "txId", "name", "data"} <= json.loads(events[1]).keys()
    state = json.loads((demo_run / "demo.state.json").read_text())
    assert state["schema"]["name"] == "utm.state" and state["visibility"] == "shareable"


def test_rerun_is_byte_identical(demo_run, tmp_path):
    r = utm("run", SCENARIOS / "demo.scenario.json", "--out", tmp_path, "-q")
    assert r.returncode == 0
    for name in ("demo.metrics.json", "demo.chain.jsonl", "demo.trace.csv"):
        assert (tmp_path / name).read_bytes() == (demo_run / name).read_bytes()


def test_seed_override_changes_nonces(demo_run, tmp_path):
    r = utm("run", SCENARIOS / "demo.scenario.json", "--out", tmp_path, "--seed", 99, "-q")
    assert r.returncode == 0
    a = json.loads((demo_run / "demo.metrics.json").read_text())
    b = json.loads((tmp_path / "demo.metrics.json").read_text())
    assert a["headHash"] != b["headHash"]


def test_run_prints_summary(tmp_path):
    r = utm("run", SCENARIOS / "compliant.scenario.json", "--out", tmp_path)
    assert r.returncode == 0 and "750" in r.stdout


def test_malformed_scenario_exits_2(tmp_path):
    bad = tmp_path / "bad.scenario.json"
    bad.write_text('{"name": "x", "drones": [')
    r = utm("run", bad, "--out", tmp_path)
    assert r.returncode == 2 and r.stderr


def test_invalid_scenario_exits_2(tmp_path):
    s = json.loads((SCENARIOS / "compliant.scenario.json").read_text())
    s["tickSeconds"] = 0
    p = tmp_path / "zero.scenario.json"
    p.write_text(json.dumps(s))
    assert utm("run", p, "--out", tmp_path).returncode == 2


def test_missing_scenario_exits_2(tmp_path):
    assert utm("run", tmp_path / "nope.scenario.json").returncode == 2


def test_verify_clean_chain(demo_run):
    r = utm("verify", demo_run / "demo.chain.jsonl")
    assert r.returncode == 0 and "ok" in r.stdout


@pytest.mark.parametrize("target", [1, 4, 9])
def test_verify_detects_flipped_digit(demo_run, tmp_path, target):
    lines = (demo_run / "demo.chain.jsonl").read_text().splitlines()
    line = lines[target + 1]
    at = line.index('"hash":"0x') + 10
    flipped = "1" if line[at] != "1" else "2"
    lines[target + 1] = line[:at] + flipped + line[at + 1:]
    p = tmp_path / "t.chain.jsonl"
    p.write_text("\n".join(lines) + "\n")
    r = utm("verify", "--chain", p)
    assert r.returncode == 4
    assert f"block {target}" in r.stderr


def test_verify_detects_payload_edit(demo_run, tmp_path):
    lines = (demo_run / "demo.chain.jsonl").read_text().splitlines()
    lines[3] = lines[3].replace('"value":"0"', '"value":"1"', 1)
    p = tmp_path / "t.chain.jsonl"
    p.write_text("\n".join(lines) + "\n")
    r = utm("verify", p)
    assert r.returncode == 4 and "block 2" in r.stderr


def test_verify_empty_chain_exits_2(tmp_path):
    p = tmp_path / "empty.chain.jsonl"
    p.write_text("")
    assert utm("verify", p).returncode == 2


@pytest.mark.parametrize("name", ["register", "subscribe", "quote", "plan", "report", "complete", "full"])
def test_demos(name):
    r = utm("demo", name)
    assert r.returncode == 0
    assert "status" in r.stdout and "state writes" in r.stdout


def test_unknown_demo_exits_2():
    assert utm("demo", "bogus").returncode == 2


def test_no_subcommand_exits_2():
    assert utm().returncode == 2


@pytest.mark.parametrize("query", ["summary", "accounts", "drones", "plans", "reputations", "subscriptions", "config"])
def test_inspect(demo_run, query):
    r = utm("inspect", demo_run / "demo.state.json", query)
    assert r.returncode == 0 and r.stdout.strip()


def test_inspect_hides_identity(demo_run):
    r = utm("inspect", demo_run / "demo.state.json", "drones")
    assert "NID-" not in r.stdout


def test_inspect_bad_query_exits_2(demo_run):
    assert utm("inspect", demo_run / "demo.state.json", "weather").returncode == 2


def test_plot_data(tmp_path):
    assert utm("plot-data", "--out", tmp_path).returncode == 0
    surface = (tmp_path / "reputation_surface.csv").read_text().splitlines()
    assert surface[0] == "r,p,R" and len(surface) == 1 + 51 * 51
    fees = (tmp_path / "fee_congestion.csv").read_text().splitlines()
    assert fees[0].startswith("activeMissions")


def test_generate_then_run(tmp_path):
    p = tmp_path / "gen.scenario.json"
    assert utm("generate", "--drones", 5, "--reporters", 10, "--seed", 3, "--out", p).returncode == 0
    assert utm("run", p, "--out", tmp_path, "-q").returncode == 0

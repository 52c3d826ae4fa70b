import json
import subprocess
import sys

import pytest

from driftcause import io
from driftcause.cli import main


def run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def test_explain_bundled_stream(capsys):
    status, out, err = run(capsys, "explain", "bundled:sprinkler_stream.csv")
    assert status == 0
    assert out == "C = {sprinkler}\nP = {rain}\nA = {rain}\n"
    assert err == ""


def test_missing_input_is_data_error(capsys, tmp_path):
    status, out, err = run(capsys, "explain", str(tmp_path / "nope.csv"))
    assert status == 2
    assert out == "" and "nope.csv" in err


def test_verify_bundled_net(capsys):
    status, out, _ = run(capsys, "verify-thm3", "bundled:sprinkler.net")
    assert status == 0
    last = out.strip().splitlines()[-1]
    assert last.startswith("max TV") and float(last.split()[2]) < 1e-9
    assert "witness sprinkler" in out


def test_verify_exports_nets(capsys, tmp_path):
    status, _, _ = run(capsys, "verify-thm3", "bundled:sprinkler.net", "--window", "1",
                       "--export", str(tmp_path / "rev"))
    assert status == 0
    net = io.load_net(tmp_path / "rev.w1.net")
    assert "T" not in net.graph


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["explain"], ["discover", "x.csv", "--alpha", "high"],
    ["discover", "x.csv", "--background-time", "maybe"],
])
def test_usage_errors(capsys, argv):
    status, out, err = run(capsys, *argv)
    assert status == 1
    assert out == "" and err


def test_alpha_out_of_range_is_usage(capsys):
    status, _, err = run(capsys, "discover", "bundled:sprinkler_stream.csv", "--alpha", "2")
    assert status == 1 and "alpha" in err


def test_malformed_net_is_data_error(capsys, tmp_path):
    (tmp_path / "bad.net").write_text("driftcause-net 9\n")
    status, _, err = run(capsys, "sample", str(tmp_path / "bad.net"))
    assert status == 2 and "version" in err


def test_sample(capsys):
    status, out, _ = run(capsys, "sample", "bundled:sprinkler_base.net", "-n", "5", "--seed", "3")
    assert status == 0
    lines = out.splitlines()
    assert lines[0] == "rain,sprinkler,wet" and len(lines) == 6


def test_scenario_reproduces_bundled_stream(capsys):
    status, out, _ = run(capsys, "scenario", "bundled:sprinkler.scenario")
    assert status == 0
    assert out == io.resolve("bundled:sprinkler_stream.csv").read_text()


def test_discover_writes_graph_and_log(capsys, tmp_path):
    status, out, _ = run(capsys, "discover", "bundled:sprinkler_stream.csv",
                         "-o", str(tmp_path / "g.json"), "--log", str(tmp_path / "log.json"))
    assert status == 0 and out == ""
    g = io.load_graph(tmp_path / "g.json")
    assert ("__time__", "sprinkler") in g.sorted_directed()
    log = json.loads((tmp_path / "log.json").read_text())
    assert log[0]["step"] == "skeleton"


def test_discover_without_background(capsys):
    status, out, _ = run(capsys, "discover", "bundled:sprinkler_stream.csv",
                         "--background-time", "off", "--max-cond-size", "1", "--alpha", "0.01")
    assert status == 0
    assert json.loads(out)["format"] == io.GRAPH_FORMAT


def test_explain_rewindowed_with_json(capsys, tmp_path):
    status, out, _ = run(capsys, "explain", "bundled:sprinkler_stream.csv", "--windows", "4",
                         "--json", str(tmp_path / "e.json"))
    assert status == 0
    assert "sprinkler" in out.splitlines()[0]
    assert json.loads((tmp_path / "e.json").read_text())["children"] == ["sprinkler"]


def test_evaluate_is_deterministic_and_writes_only_declared_outputs(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    args = ["evaluate", "bundled:sprinkler.scenario", "--runs", "2", "--seed", "5"]
    run(capsys, *args, "-o", "a.json", "--dot", "a.dot", "--text", "a.txt")
    run(capsys, *args, "-o", "b.json", "--dot", "b.dot", "--text", "b.txt")
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted(
        f"{s}.{e}" for s in "ab" for e in ("json", "dot", "txt"))
    for ext in ("json", "dot", "txt"):
        assert (tmp_path / f"a.{ext}").read_bytes() == (tmp_path / f"b.{ext}").read_bytes()
    report = json.loads((tmp_path / "a.json").read_text())
    assert [r["seed"] for r in report["runs"]] == [5, 6]


def test_evaluate_with_truth_file(capsys, tmp_path):
    from driftcause.fixtures import sprinkler_scenario
    from driftcause.stream import truth_graph

    io.save_graph(truth_graph(sprinkler_scenario()), tmp_path / "t.json")
    status, out, _ = run(capsys, "evaluate", "bundled:sprinkler.scenario", "--runs", "1",
                         "--truth", str(tmp_path / "t.json"))
    assert status == 0
    assert json.loads(out)["truth"]["edges"]


def test_dot(capsys, tmp_path):
    status, out, _ = run(capsys, "dot", "bundled:sprinkler.net")
    assert status == 0 and '"T" -> "sprinkler";' in out
    run(capsys, "discover", "bundled:sprinkler_stream.csv", "-o", str(tmp_path / "g.json"))
    from driftcause.fixtures import sprinkler_scenario
    from driftcause.stream import truth_graph

    io.save_graph(truth_graph(sprinkler_scenario()), tmp_path / "t.json")
    status, out, _ = run(capsys, "dot", str(tmp_path / "g.json"), "--truth", str(tmp_path / "t.json"))
    assert status == 0 and "darkgreen" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "driftcause", "verify-thm3", "bundled:sprinkler.net"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "max TV" in proc.stdout

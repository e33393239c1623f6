import json
import subprocess
import sys

import pytest

from po_miner.cli import run
from po_miner.export import read_pnml
from po_miner.log_io import parse_lpo_json


@pytest.fixture
def repair_csv(data_dir):
    return str(data_dir / "repair_style.csv")


def test_discover_writes_all_outputs(tmp_path, repair_csv, capsys):
    out, dot, report = tmp_path / "n.pnml", tmp_path / "n.dot", tmp_path / "r.json"
    code = run(["discover", "--log", repair_csv, "--oracle", "alpha", "--max-depth", "3",
                "--threads", "1", "--out", str(out), "--dot", str(dot), "--report", str(report)])
    assert code == 0
    net = read_pnml(out.read_bytes())
    assert net.places
    assert dot.read_bytes().startswith(b"digraph workflow_net {")
    doc = json.loads(report.read_text())
    assert doc["net_fitting_fraction"] == 1.0
    assert len(doc["places"]) == len(net.places)
    text = capsys.readouterr().out
    assert "cases: 60" in text
    assert "decided by: closed_form=" in text


def test_discover_json_log(tmp_path, data_dir):
    out = tmp_path / "n.pnml"
    assert run(["discover", "--log", str(data_dir / "repair_example.lpo.json"),
                "--threads", "1", "--out", str(out)]) == 0
    assert read_pnml(out.read_bytes()).transitions[0] == "▶"


def test_threads_do_not_change_result(tmp_path, repair_csv, monkeypatch):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("PO_MINER_THREADS", threads)
        out = tmp_path / f"n{threads}.pnml"
        assert run(["discover", "--log", repair_csv, "--oracle", "alpha", "--max-depth", "3",
                    "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_bad_thread_env(repair_csv, monkeypatch, capsys):
    monkeypatch.setenv("PO_MINER_THREADS", "many")
    assert run(["discover", "--log", repair_csv]) == 2
    assert "PO_MINER_THREADS" in capsys.readouterr().err


def test_convert_granularity(tmp_path, data_dir, capsys):
    out = tmp_path / "s.json"
    code = run(["convert", "--log", str(data_dir / "study_traces.csv"), "--case-column", "student",
                "--activity-column", "course", "--timestamp-column", "exam_day",
                "--oracle", "granularity", "--bucket", "182", "--out", str(out)])
    assert code == 0
    log = parse_lpo_json(out.read_bytes())
    assert log.num_cases == 3
    text = capsys.readouterr().out
    assert "lpo variants: 1" in text


def test_replay_round_trip(tmp_path, repair_csv, capsys):
    net = tmp_path / "n.pnml"
    assert run(["discover", "--log", repair_csv, "--oracle", "alpha", "--max-depth", "2",
                "--threads", "1", "--out", str(net)]) == 0
    capsys.readouterr()
    assert run(["replay", "--net", str(net), "--log", repair_csv, "--oracle", "alpha"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["net_fitting_fraction"] == 1.0
    assert "net fitting fraction: 1.0000" in captured.err


@pytest.mark.parametrize("argv, message", [
    (["convert", "--log", "missing.csv", "--out", "x.json"], "No such file"),
    (["discover", "--log", "{example}", "--oracle", "alpha"], "only applies"),
    (["discover", "--log", "{csv}", "--oracle", "granularity"], "needs --bucket"),
    (["discover", "--log", "{csv}", "--bucket", "5"], "only applies"),
    (["discover", "--log", "{csv}", "--oracle", "granularity", "--bucket", "5 fortnights"], "duration"),
])
def test_input_errors_exit_2(argv, message, data_dir, capsys):
    paths = {"example": data_dir / "repair_example.lpo.json", "csv": data_dir / "repair_style.csv"}
    argv = [a.format(**paths) for a in argv]
    assert run(argv) == 2
    assert message in capsys.readouterr().err


def test_malformed_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("case,activity\n1,a\n")
    assert run(["discover", "--log", str(bad)]) == 2
    assert "timestamp" in capsys.readouterr().err


def test_cyclic_json_names_variant(tmp_path, capsys):
    bad = tmp_path / "cyc.json"
    bad.write_text(json.dumps({"variants": [
        {"count": 1, "nodes": [{"id": 0, "activity": "a"}], "arcs": []},
        {"count": 1, "nodes": [{"id": 0, "activity": "a"}, {"id": 1, "activity": "b"}],
         "arcs": [[0, 1], [1, 0]]},
    ]}))
    assert run(["convert", "--log", str(bad), "--out", str(tmp_path / "o.json")]) == 2
    assert "variant 1" in capsys.readouterr().err


def test_tau_out_of_range(repair_csv):
    with pytest.raises(SystemExit) as exc:
        run(["discover", "--log", repair_csv, "--tau", "1.5"])
    assert exc.value.code == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "po_miner.cli", "--version"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("po-miner ")

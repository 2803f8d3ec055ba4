import csv
import io
import json
import subprocess
import sys

import pytest

from ricci_foster import gallery
from ricci_foster.cli import main
from ricci_foster.io import dumps_graph

from conftest import DATA


@pytest.fixture
def write_graph(tmp_path):
    def write(g, name="g.json"):
        p = tmp_path / name
        p.write_text(dumps_graph(g))
        return str(p)
    return write


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_curvature_csv(write_graph, capsys):
    code, out, _ = run(["curvature", write_graph(gallery.house())], capsys)
    assert code == 0
    table, vertices, totals = out.strip().split("\n\n")
    rows = list(csv.DictReader(io.StringIO(table)))
    assert [r["edge_id"] for r in rows] == ["12", "24", "43", "31", "35", "54"]
    assert float(rows[0]["curvature"]) == pytest.approx(3 / 11, abs=1e-12)
    # 17 significant digits survive the round trip.
    assert len(rows[0]["curvature"].replace("0.", "").lstrip("0")) >= 15
    assert vertices.splitlines()[0] == "vertex,scalar_curvature"
    total = list(csv.DictReader(io.StringIO(totals)))[0]
    assert float(total["total_curvature"]) == pytest.approx(1.0)


def test_curvature_json_from_edgelist_on_stdin(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO("a b 1\nb c 1\nc a 1\n"))
    code, out, _ = run(["curvature", "-", "--format", "json"], capsys)
    assert code == 0
    data = json.loads(out)
    assert [e["curvature"] for e in data["edges"]] == pytest.approx([1 / 3] * 3)


def test_resistance_csv(write_graph, capsys):
    code, out, _ = run(["resistance", write_graph(gallery.cycle(3))], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 3
    assert all(float(r["omega"]) == pytest.approx(2 / 3) for r in rows)


def test_flow_writes_trace_and_events(write_graph, tmp_path, capsys):
    trace_path, events_path = tmp_path / "trace.csv", tmp_path / "events.json"
    code, out, _ = run(["flow", write_graph(gallery.branched_tree()), "--surgery", "--dt", "0.01",
                        "--out", str(trace_path), "--events", str(events_path)], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["terminal_state"] == "point"
    assert summary["terminal_time"] == pytest.approx(6.0, abs=1e-6)
    events = json.loads(events_path.read_text())
    assert [e["t"] for e in events] == pytest.approx([2, 3, 4, 5], abs=1e-6)
    assert events[0]["contracted_edges"] == ["AB", "EF"]
    rows = list(csv.DictReader(io.StringIO(trace_path.read_text())))
    assert rows[0] == {"t": "0", "edge_id": "AB", "length": "1", "curvature": "0.5"}
    first = [r["edge_id"] for r in rows if r["t"] == "0"]
    assert first == sorted(first)


def test_flow_to_fixed_time(write_graph, capsys):
    code, out, _ = run(["flow", write_graph(gallery.cycle([1.0, 3.0])), "--t-end", "2"], capsys)
    assert code == 0
    state = json.loads(out)["terminal_state"]
    assert [e["length"] for e in state["edges"]] == pytest.approx([0.5, 1.5])


@pytest.mark.parametrize("args", [["--dt", "0"], ["--t-end", "soon"], ["--sample-stride", "0"]])
def test_flow_bad_options_exit_one(write_graph, capsys, args):
    code, _, err = run(["flow", write_graph(gallery.house())] + args, capsys)
    assert code == 1
    assert err.startswith("error:")


def test_verify_single_and_corpus(write_graph, capsys):
    code, out, _ = run(["verify", write_graph(gallery.theta())], capsys)
    assert code == 0
    assert json.loads(out)["passed"] is True
    code, out, _ = run(["verify", str(DATA / "corpus_seed0.json")], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["passed"] and len(data["graphs"]) == 200


def test_verify_failure_exits_two(write_graph, capsys):
    code, out, _ = run(["verify", write_graph(gallery.house()), "--tol", "-1"], capsys)
    assert code == 2
    assert json.loads(out)["passed"] is False


def test_verify_seed_from_environment(write_graph, monkeypatch, capsys):
    monkeypatch.setenv("RFC_SEED", "17")
    code, _, _ = run(["verify", write_graph(gallery.barbell())], capsys)
    assert code == 0


def test_subdivide(write_graph, capsys):
    code, out, _ = run(["subdivide", write_graph(gallery.house()), "--edge", "12", "--split", "0.25"], capsys)
    assert code == 0
    data = json.loads(out)
    assert [e["id"] for e in data["edges"]][:3] == ["12.1", "12.2", "24"]
    assert data["edges"][0]["length"] == 0.25


def test_subdivide_unknown_edge(write_graph, capsys):
    code, _, err = run(["subdivide", write_graph(gallery.house()), "--edge", "99"], capsys)
    assert code == 1
    assert "99" in err


def test_einstein(write_graph, capsys):
    code, out, _ = run(["einstein", write_graph(gallery.cycle(5))], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["is_einstein"] is True
    assert data["lambda"] == pytest.approx(0.2)
    code, out, _ = run(["einstein", write_graph(gallery.house())], capsys)
    assert code == 2
    code, out, _ = run(["einstein", write_graph(gallery.complete(4)), "--solve", "--tol", "1e-9"], capsys)
    assert code == 0
    assert json.loads(out)["max_residual"] < 1e-9


@pytest.mark.parametrize("text", [
    '{"edges": [{"u": 0, "v": 1, "length": -1}]}',
    '{"vertices": [0, 1, 2], "edges": [{"u": 0, "v": 1, "length": 1}]}',
    '{not json',
])
def test_bad_input_exits_one(tmp_path, capsys, text):
    p = tmp_path / "bad.json"
    p.write_text(text)
    code, out, err = run(["curvature", str(p)], capsys)
    assert code == 1
    assert out == ""
    assert err.startswith("error:")


def test_missing_file_and_bad_usage(capsys):
    assert run(["curvature", "/nonexistent/graph.json"], capsys)[0] == 1
    assert run(["nonsense"], capsys)[0] == 1
    assert run([], capsys)[0] == 1


def test_overflowing_conductance_exits_three(tmp_path, capsys):
    # 1/1e-310 overflows to inf, so no solver can recover.
    p = tmp_path / "g.txt"
    p.write_text("0 1 1e-310\n1 2 1\n2 0 1\n1 2 1e-310\n")
    assert run(["curvature", str(p)], capsys)[0] == 3


def test_out_option_writes_file(write_graph, tmp_path, capsys):
    target = tmp_path / "k.csv"
    code, out, _ = run(["curvature", write_graph(gallery.theta()), "-o", str(target)], capsys)
    assert code == 0 and out == ""
    assert target.read_text().startswith("edge_id,u,v,length,curvature,foster\n")


def test_module_entry_point(write_graph):
    proc = subprocess.run([sys.executable, "-m", "ricci_foster", "einstein", write_graph(gallery.cycle(4))],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["lambda"] == pytest.approx(0.25)

import json
import subprocess
import sys

import numpy as np
import pytest

from qdock.cli import main
from qdock.graph import random_graph
from qdock.io import graph_to_file, read_graph, write_graph
from qdock.synthetic import make_toy_instance, write_instance_files


@pytest.fixture
def paths(tmp_path):
    return write_instance_files(make_toy_instance(), tmp_path / "in")


def _graphs(paths, tmp_path):
    big, comp = tmp_path / "big.json", tmp_path / "comp.json"
    rc = main(["build-graph", "--ligand-points", paths["ligand_points"],
               "--receptor-points", paths["receptor_points"], "--ensemble", paths["ensemble"],
               "--big-out", str(big), "--complement-out", str(comp),
               "--provenance", str(tmp_path / "prov.json")])
    assert rc == 0
    return big, comp


def test_sasa(paths, capsys):
    assert main(["sasa", "--atoms", paths["receptor_atoms"], "--points", paths["receptor_points"]]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kept_ids"] == ["P0", "P1", "P2", "P3"] and doc["removed_ids"] == []
    assert len(doc["sasa"]) == 4


def test_build_graph(paths, tmp_path):
    big, comp = _graphs(paths, tmp_path)
    b, c = read_graph(big.read_bytes()), read_graph(comp.read_bytes())
    assert b.kind == "BIG" and c.kind == "complement"
    assert len(b.edges) + len(c.edges) == 12 * 11 // 2
    prov = json.loads((tmp_path / "prov.json").read_text())
    assert prov["construction"]["epsilon"] == 1.0


@pytest.mark.parametrize("method", ["exact", "greedy", "quantum"])
def test_solve_and_reconstruct(paths, tmp_path, method):
    _, comp = _graphs(paths, tmp_path)
    sol = tmp_path / "sol.json"
    assert main(["solve", "--graph", str(comp), "--method", method, "--k", "2", "--s", "2",
                 "--l", "3", "--seed", "1", "-o", str(sol), "--plot-dir", str(tmp_path / "plots")]) == 0
    doc = json.loads(sol.read_text())
    assert doc["independent"] and doc["maximal"]
    # the heuristic may stop short of the optimum on a given seed
    if method == "quantum":
        assert doc["weight"] <= 1.3876 + 1e-9
    else:
        assert doc["weight"] == pytest.approx(1.3876)
    pdb, report = tmp_path / "pose.pdb", tmp_path / "pose.json"
    assert main(["reconstruct", "--solution", str(sol), "--ensemble", paths["ensemble"],
                 "--receptor-points", paths["receptor_points"], "--reference", paths["reference"],
                 "--pdb-out", str(pdb), "--report-out", str(report)]) == 0
    rep = json.loads(report.read_text())
    if method != "quantum":
        assert rep["conformer"] == 0 and rep["rmsd"] < 1e-3
    assert pdb.read_text().count("HETATM") == 4


def test_solve_timeout_exit_code(tmp_path):
    g = random_graph(300, 0.05, np.random.default_rng(0))
    p = tmp_path / "g.json"
    p.write_bytes(write_graph(graph_to_file(g)))
    assert main(["solve", "--graph", str(p), "--method", "exact", "--timeout", "0",
                 "-o", str(tmp_path / "s.json")]) == 3
    assert json.loads((tmp_path / "s.json").read_text())["optimal"] is False


def test_grid(paths, tmp_path, capsys):
    _, comp = _graphs(paths, tmp_path)
    csv = tmp_path / "grid.csv"
    assert main(["grid", "--graph", str(comp), "--k", "1,2", "--s", "1", "--l", "10",
                 "--seeds", "0,1", "--compute-optimum", "--subsolver", "exact", "--csv", str(csv)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["optimum"] == pytest.approx(1.3876) and len(doc["rows"]) == 2
    assert csv.read_text().startswith("k,s,l,weight,ratio")


def test_anneal(tmp_path, capsys):
    req = {"embedding": {"trap_coords": [[0, 0], [7, 0]], "vertex_map": {"0": 0, "1": 1},
                         "vertices": [0, 1], "R_b": 8.4},
           "weights": [0.9, 0.1], "config": {"n_shots": 100}}
    p = tmp_path / "req.json"
    p.write_text(json.dumps(req))
    assert main(["anneal", "--request", str(p)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert sum(out["samples"].values()) == 100
    assert max(out["samples"], key=out["samples"].get) == "10"


def test_pipeline_with_overrides(paths, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({**paths, "method": "quantum"}))
    assert main(["pipeline", "--config", str(cfg), "--method", "exact", "--set", "heuristic.k=2",
                 "--output-dir", str(tmp_path / "run")]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["config"]["method"] == "exact" and rec["config"]["heuristic"] == {"k": 2}
    assert (tmp_path / "run" / "run_record.json").is_file()


def test_pipeline_input_error(paths, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({**paths, "ensemble": str(tmp_path / "nope.json")}))
    assert main(["pipeline", "--config", str(cfg), "--method", "greedy"]) == 2
    assert "[build-graph]" in capsys.readouterr().err


def test_convert(tmp_path, capsys):
    p = tmp_path / "nl.json"
    p.write_text(json.dumps({"nodes": [{"id": i, "weight": 0.5} for i in range(4)],
                             "links": [{"source": 0, "target": 1}]}))
    out = tmp_path / "g.json"
    assert main(["convert", str(p), "--kind", "BIG", "--expect-vertices", "4", "-o", str(out)]) == 0
    assert "vertices=4 edges=1 kind=BIG complement_edges=5" in capsys.readouterr().err
    assert main(["convert", str(p), "--expect-edges", "7"]) == 2


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["solve"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    assert main(["pipeline", "--set", "nonsense=1"]) == 1


def test_missing_file_is_input_error(tmp_path):
    assert main(["solve", "--graph", str(tmp_path / "none.json")]) == 2


def test_entry_point_version():
    out = subprocess.run([sys.executable, "-m", "qdock.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "qdock" in out.stdout

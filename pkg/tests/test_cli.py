"""CLI tests: subcommands, report files, determinism, exit codes."""

import json

import numpy as np
import pytest

import shapes
from graphenergy.cli import main
from graphenergy.graph import EmbeddedGraph, load_graph, save_graph, validate

_QUICK = ["--tol", "1e-3"]


@pytest.fixture
def triangle_file(tmp_path):
    path = tmp_path / "triangle.json"
    path.write_bytes(save_graph(shapes.curved_triangle()))
    return str(path)


@pytest.fixture
def segments_file(tmp_path):
    path = tmp_path / "segments.json"
    path.write_bytes(save_graph(shapes.two_segments(0.5)))
    return str(path)


@pytest.fixture
def wedge_file(tmp_path):
    path = tmp_path / "wedge.json"
    path.write_bytes(save_graph(shapes.straight_wedge(np.pi / 2)))
    return str(path)


# ----------------------------------------------------------------- energy

def test_energy_writes_reports(tmp_path, triangle_file, capsys):
    out = tmp_path / "out"
    assert main(["energy", triangle_file, "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "total" in text
    csv_lines = (out / "triangle_energy.csv").read_text().splitlines()
    assert csv_lines[0] == "pair_i,pair_j,kind,value,err"
    assert csv_lines[-1].startswith("total,,,")
    # 3 same + 6 ordered adjacent pairs, plus header and total row.
    assert len(csv_lines) == 11
    obj = json.loads((out / "triangle_energy.json").read_text())
    assert obj["report"]["total"] == float(csv_lines[-1].split(",")[3])
    assert obj["run"]["subcommand"] == "energy"


def test_energy_quiet_emits_json_stdout(tmp_path, segments_file, capsys):
    out = tmp_path / "out"
    assert main(["energy", segments_file, "--quiet", "--out", str(out)]) == 0
    captured = capsys.readouterr()
    obj = json.loads(captured.out)
    assert abs(obj["report"]["total"] - 4.8722096822381022) < 1e-6


def test_energy_runs_are_byte_identical(tmp_path, triangle_file):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    args = ["energy", triangle_file, "--threads", "2"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    for name in ("triangle_energy.csv", "triangle_energy.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_energy_missing_file_exit_2(tmp_path):
    assert main(["energy", str(tmp_path / "nope.json")]) == 2


def test_energy_malformed_file_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_bytes(b"{not json")
    assert main(["energy", str(bad)]) == 2


def test_energy_invalid_graph_exit_3(tmp_path):
    verts = {"a": [0, 0, 0], "b": [1, 1, 0], "c": [1, 0, 0], "d": [0, 1, 0]}
    crossing = EmbeddedGraph(
        verts,
        [shapes.straight_edge("e1", "a", "b", verts["a"], verts["b"]),
         shapes.straight_edge("e2", "c", "d", verts["c"], verts["d"])])
    path = tmp_path / "cross.json"
    path.write_bytes(save_graph(crossing))
    assert main(["energy", str(path)]) == 3


def test_energy_quadrature_failure_exit_4(tmp_path):
    path = tmp_path / "tight.json"
    path.write_bytes(save_graph(shapes.two_segments(1e-4)))
    args = ["energy", str(path), "--quad-panels", "4", "--quad-depth", "0",
            "--tol", "1e-6", "--out", str(tmp_path / "out")]
    assert main(args) == 4


# ------------------------------------------------------------------ toric

def test_toric_emits_graph(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["toric", "--spec", "2,1,1,1", "--out", str(out)]) == 0
    assert "5 vertices, 10 edges" in capsys.readouterr().out
    g = load_graph((out / "toric_2_1_1_1.json").read_bytes())
    assert len(g.edges) == 10
    assert validate(g).ok
    report = json.loads((out / "toric_2_1_1_1_report.json").read_text())
    assert report["vertices"] == 5


def test_toric_energy_report(tmp_path):
    out = tmp_path / "out"
    assert main(["toric", "--spec", "2,1,1,1", "--energy",
                 "--threads", "4", "--out", str(out)]) == 0
    lines = (out / "toric_2_1_1_1_energy.csv").read_text().splitlines()
    total = float(lines[-1].split(",")[3])
    assert abs(total - 45.702253943379) < 1e-3 * 45.7
    # --energy without --emit-graph skips the graph file.
    assert not (out / "toric_2_1_1_1.json").exists()


def test_toric_bad_spec_exit_2(tmp_path):
    assert main(["toric", "--spec", "2,2,1,1",
                 "--out", str(tmp_path)]) == 2
    assert main(["toric", "--spec", "1,0",
                 "--out", str(tmp_path)]) == 2


def test_toric_degenerate_spec_exit_2(tmp_path):
    assert main(["toric", "--spec", "1,0,1,1", "--out", str(tmp_path)]) == 2


# ------------------------------------------------------------- invariance

def test_invariance_random_maps(tmp_path, triangle_file, capsys):
    out = tmp_path / "out"
    assert main(["invariance", triangle_file, "--count", "2", "--seed", "3",
                 "--out", str(out)]) == 0
    obj = json.loads((out / "triangle_invariance.json").read_text())
    assert obj["max_rel_dev"] < 1e-3
    assert len(obj["rows"]) == 3
    assert obj["rows"][0]["kind"] == "identity"
    lines = (out / "triangle_invariance.csv").read_text().splitlines()
    assert lines[0] == "map,kind,skipped,total,rel_dev"
    assert len(lines) == 4


def test_invariance_identity_only(tmp_path, segments_file):
    out = tmp_path / "out"
    assert main(["invariance", segments_file, "--count", "0",
                 "--out", str(out)]) == 0
    obj = json.loads((out / "segments_invariance.json").read_text())
    assert obj["max_rel_dev"] == 0.0
    assert len(obj["rows"]) == 1


# --------------------------------------------------------------- critical

def test_critical_pair_clusters(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["critical", "--k", "2", "--starts", "3",
                 "--out", str(out)]) == 0
    obj = json.loads((out / "critical_k2.json").read_text())
    assert len(obj["clusters"]) == 1
    cluster = obj["clusters"][0]
    assert cluster["count"] == 3
    assert abs(cluster["phi_mean"]) < 1e-8
    assert cluster["classification"] == "min"
    assert cluster["zero_modes"] == 2
    lines = (out / "critical_k2.csv").read_text().splitlines()
    assert lines[0] == "seed,status,phi,grad_norm,zero_modes,classification"
    assert len(lines) == 4


def test_critical_small_k_exit_2(tmp_path):
    assert main(["critical", "--k", "1", "--out", str(tmp_path)]) == 2


# ------------------------------------------------------------ asymptotics

def test_asymptotics_wedge_slope(tmp_path, wedge_file, capsys):
    out = tmp_path / "out"
    assert main(["asymptotics", wedge_file, "--vertex", "o",
                 "--pair", "e1,e2", "--out", str(out)]) == 0
    obj = json.loads((out / "wedge_asymptotics.json").read_text())
    assert obj["r_squared"] > 0.999
    assert abs(obj["slope_over_oracle"] - 1.0) < 0.01
    assert abs(obj["alpha"] - np.pi / 2) < 1e-9
    assert abs(obj["complement_alpha"] - (1.0 - obj["psi_alpha"])) < 1e-15
    assert len(obj["values"]) == len(obj["eps"]) == 5
    lines = (out / "wedge_asymptotics.csv").read_text().splitlines()
    assert lines[0] == "eps,value"
    assert len(lines) == 6


@pytest.mark.parametrize("extra", [
    ["--eps", "1e-1,1e-2,1e-3"],          # too few ladder points
    ["--eps", "1e-1,banana,1e-3,1e-4"],   # malformed ladder
    ["--eps", "9.0,1e-1,1e-2,1e-3"],      # eps beyond eps_max
    ["--pair", "e1"],                     # not two edge ids
    ["--pair", "e1,zz"],                  # unknown edge id
])
def test_asymptotics_usage_errors(tmp_path, wedge_file, extra):
    args = ["asymptotics", wedge_file, "--vertex", "o", "--pair", "e1,e2",
            "--out", str(tmp_path)]
    # Later flags win, so appending the broken variant overrides the good one.
    assert main(args + extra) == 2


def test_asymptotics_non_adjacent_pair_exit_2(tmp_path, segments_file):
    assert main(["asymptotics", segments_file, "--vertex", "a1",
                 "--pair", "ea,eb", "--out", str(tmp_path)]) == 2


# ----------------------------------------------------------------- export

def test_export_both_formats(tmp_path, triangle_file):
    out = tmp_path / "out"
    assert main(["export", triangle_file, "--samples-per-edge", "16",
                 "--out", str(out)]) == 0
    ply = (out / "triangle.ply").read_text()
    assert ply.startswith("ply\n")
    assert "element vertex" in ply
    obj_text = (out / "triangle.obj").read_text()
    assert any(line.startswith("v ") for line in obj_text.splitlines())
    assert any(line.startswith("l ") for line in obj_text.splitlines())


def test_export_single_format(tmp_path, triangle_file):
    out = tmp_path / "out"
    assert main(["export", triangle_file, "--format", "obj",
                 "--out", str(out)]) == 0
    assert (out / "triangle.obj").exists()
    assert not (out / "triangle.ply").exists()

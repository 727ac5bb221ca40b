import csv
import json

import pytest

from egmgeom.cli import main
from egmgeom.geometry import PolytopeShape
from egmgeom import io


@pytest.fixture
def points(tmp_path):
    f = tmp_path / "pts.csv"
    assert main(["gen", "--n", "200", "--d", "3", "--seed", "1", "--output", str(f)]) == 0
    return f


def test_meb_pipeline(tmp_path, points):
    out, tr = tmp_path / "r.json", tmp_path / "t.csv"
    assert main(["meb", "--input", str(points), "--eps", "1e-3", "--output", str(out),
                 "--trace", str(tr)]) == 0
    res = json.loads(out.read_text())
    assert res["converged"] and res["mode"] == "mult" and res["radius"] > 0
    rows = list(csv.reader(tr.open()))
    assert tuple(rows[0]) == io.TRACE_COLUMNS and len(rows) == res["iterations"] + 1


def test_meb_additive_and_not_converged(tmp_path, points):
    assert main(["meb", "--input", str(points), "--mode", "add", "--eps", "1e-6",
                 "--output", str(tmp_path / "a.json")]) == 0
    assert main(["meb", "--input", str(points), "--mode", "add", "--eps", "1e-12",
                 "--max-iters", "3", "--output", str(tmp_path / "b.json")]) == 1


def test_mecp_polydist_margin(tmp_path, points):
    sh = tmp_path / "shape.csv"
    io.write_shape(sh, PolytopeShape.hypercube(3))
    assert main(["mecp", "--input", str(points), "--shape", str(sh), "--eps", "1e-2",
                 "--output", str(tmp_path / "m.json")]) == 0
    assert main(["polydist", "--input", str(points), "--eps", "1e-4",
                 "--output", str(tmp_path / "p.json")]) == 0
    lab = tmp_path / "lab.csv"
    assert main(["gen", "--n", "50", "--d", "2", "--labeled", "--output", str(lab)]) == 0
    assert main(["margin", "--input", str(lab), "--output", str(tmp_path / "g.json")]) == 0
    assert json.loads((tmp_path / "g.json").read_text())["separable"]


def test_exit_codes(tmp_path, capsys):
    assert main(["meb", "--input", str(tmp_path / "missing.csv")]) == 2
    assert main(["meb", "--bogus"]) == 2
    assert main(["meb", "--input", "x", "--eps", "-1"]) == 2
    assert main(["qp-check", "--n", "9"]) == 2


def test_bench(tmp_path):
    out = tmp_path / "bench.csv"
    js = tmp_path / "bench.json"
    assert main(["bench", "--n-scale", "0.005", "--replicates", "1", "--output", str(out),
                 "--json", str(js)]) == 0
    rows = list(csv.reader(out.open()))
    assert len(rows) == 1 + 7 * 2
    assert json.loads(js.read_text())["metadata"]["replicates"] == 1


def test_qp_check(capsys):
    assert main(["qp-check", "--n", "5", "--trials", "20"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["max_deviation"] <= 1e-9

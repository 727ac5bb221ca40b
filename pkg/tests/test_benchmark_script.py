import runpy
import sys
from pathlib import Path

SCRIPT = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_qp_backends.py"


def test_backend_benchmark_runs(capsys, monkeypatch):
    monkeypatch.setattr(sys, "argv", [str(SCRIPT), "--sizes", "50,200", "--reps", "2"])
    runpy.run_path(str(SCRIPT), run_name="__main__")
    out = capsys.readouterr().out
    assert "simplex projection" in out

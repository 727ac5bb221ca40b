"""Synthetic Gaussian data and the n >> d iteration-count experiment.

Each (n, d, replicate) triple gets its own seed derived from the base seed,
so both solvers see the same data and results do not depend on the order
in which worker threads finish.
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import bc_coreset_meb
from .errors import EgmGeomError, InvalidInputError
from .geometry import PointSet
from .meb import solve_meb_multiplicative

TABLE1_GRID = ((500, 10), (1000, 10), (5000, 20), (10000, 20),
               (30000, 30), (50000, 50), (100000, 100))
# reference mean iteration counts per grid row
REFERENCE_ITERS = {
    "ours": dict(zip(TABLE1_GRID, (44.2, 54.5, 69.7, 105.2, 77.8, 54.5, 63.0))),
    "bc": dict(zip(TABLE1_GRID, (435.5, 344.4, 464.2, 334.4, 409.0, 415.1, 422.6))),
}
GRIDS = {"table1": TABLE1_GRID, "desk": TABLE1_GRID[:3]}
SOLVERS = ("ours", "bc")
CSV_COLUMNS = ("solver", "n", "d", "eps", "mean_iters", "mean_time_s", "mean_gap")


def gen_gaussian(n: int, d: int, seed: int) -> PointSet:
    """n i.i.d. standard normal points in R^d (zero mean, identity covariance)."""
    if n < 1 or d < 1:
        raise InvalidInputError("n and d must be at least 1")
    return PointSet(np.random.default_rng(seed).standard_normal((n, d)))


def run_seed(seed: int, n: int, d: int, rep: int) -> int:
    return int(np.random.SeedSequence([seed, n, d, rep]).generate_state(1)[0])


@dataclass(frozen=True)
class BenchConfig:
    grid: tuple = TABLE1_GRID
    eps_mult: float = 1e-3
    replicates: int = 5
    seed: int = 0
    solvers: tuple = SOLVERS
    threads: int = 1
    n_scale: float = 1.0
    max_iters: int = 100_000

    def __post_init__(self):
        if self.replicates < 1:
            raise InvalidInputError("replicates must be at least 1")
        if not self.eps_mult > 0:
            raise InvalidInputError("eps_mult must be positive")
        if self.threads < 1:
            raise InvalidInputError("threads must be at least 1")
        if not self.n_scale > 0:
            raise InvalidInputError("n_scale must be positive")
        bad = set(self.solvers) - set(SOLVERS)
        if bad or not self.solvers:
            raise InvalidInputError(f"unknown solvers {sorted(bad)}; choose from {SOLVERS}")

    def rows(self):
        for n, d in self.grid:
            yield n, d, max(2, int(round(n * self.n_scale)))


@dataclass
class BenchRecord:
    solver: str
    n: int
    d: int
    eps: float
    mean_iters: float
    mean_time_s: float
    mean_gap: float
    replicates: int
    failures: list = field(default_factory=list)
    reference_iters: float | None = None
    iterations: list = field(default_factory=list)

    def csv_row(self):
        return [self.solver, self.n, self.d, repr(self.eps), repr(self.mean_iters),
                repr(self.mean_time_s), repr(self.mean_gap)]


def _solve(solver, ps, cfg):
    t0 = time.perf_counter()
    if solver == "ours":
        r = solve_meb_multiplicative(ps, cfg.eps_mult, cfg.max_iters, check="sampled", trace=False)
        out = (r.iterations, r.gap, r.converged)
    else:
        r = bc_coreset_meb(ps, cfg.eps_mult, cfg.max_iters)
        out = (r.iterations, r.ball.radius_sq - r.lower_bound, r.converged)
    return out + (time.perf_counter() - t0,)


def _job(args):
    solver, n_eff, d, rep, seed, cfg = args
    ps = gen_gaussian(n_eff, d, seed)
    try:
        its, gap, ok, dt = _solve(solver, ps, cfg)
    except EgmGeomError as exc:
        return None, f"rep {rep}: {type(exc).__name__}: {exc}"
    if not ok:
        return (its, gap, dt), f"rep {rep}: not converged"
    return (its, gap, dt), None


def run_bench(cfg: BenchConfig) -> list[BenchRecord]:
    jobs, keys = [], []
    for n, d, n_eff in cfg.rows():
        for solver in cfg.solvers:
            for rep in range(cfg.replicates):
                jobs.append((solver, n_eff, d, rep, run_seed(cfg.seed, n_eff, d, rep), cfg))
                keys.append((n, d, n_eff, solver))
    if cfg.threads == 1:
        results = [_job(j) for j in jobs]
    else:
        with ThreadPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(_job, jobs))  # map preserves submission order
    grouped: dict = {}
    for key, res in zip(keys, results):
        grouped.setdefault(key, []).append(res)
    records = []
    for (n, d, n_eff, solver), res in grouped.items():
        ok = [r[0] for r in res if r[0] is not None]
        fails = [r[1] for r in res if r[1] is not None]
        mean = (lambda i: float(np.mean([o[i] for o in ok]))) if ok else (lambda i: math.nan)
        records.append(BenchRecord(
            solver=solver, n=n_eff, d=d, eps=cfg.eps_mult, mean_iters=mean(0),
            mean_time_s=mean(2), mean_gap=mean(1), replicates=cfg.replicates,
            failures=fails, reference_iters=REFERENCE_ITERS[solver].get((n, d)),
            iterations=[o[0] for o in ok],
        ))
    return records


def write_bench_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.csv_row())


def bench_metadata(cfg: BenchConfig) -> dict:
    meta = asdict(cfg)
    meta["grid"] = [list(g) for g in cfg.grid]
    meta["solvers"] = list(cfg.solvers)
    meta["data"] = "standard normal, zero mean, identity covariance"
    meta["pair_bound"] = "two-pass farthest-point heuristic"
    return meta

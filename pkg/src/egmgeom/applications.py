"""Polytope distance and hard-margin separation.

Both reuse the engine.  The distance from the origin to conv(S) is the MEB
saddle problem with A = -X and b = 0; its dual value is -1/4 ||sum u_i x_i||^2.
The maximum-margin direction is an MECP instance with a single point at
the origin and face normals y_i z_i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .errors import InvalidInputError, TooLargeError
from .geometry import LabeledDataset, PointSet, PolytopeShape, SimplexVector
from .mecp import MecpProblem

MINKOWSKI_LIMIT = 10**6


class PolytopeDistanceProblem(engine.SaddleProblem):
    def __init__(self, ps: PointSet, L: float | None = None):
        self.ps = ps
        self.X = ps.points
        self.N, self.dim = ps.n, ps.d
        self.eta = 1.0
        self.b = np.zeros(self.N)
        if L is None:
            L = engine.tangent_lipschitz(self.X, 1.0) if self.N > 1 else 0.0
        floor = 1e-9 * max(float(np.einsum("ij,ij->i", self.X, self.X).max()), 1e-300)
        self.L = float(max(L, floor))
        self._finalize()

    def apply_A(self, c):
        return -(self.X @ c)

    def apply_At(self, u):
        return -(self.X.T @ u)


@dataclass
class PolytopeDistanceResult:
    witness: SimplexVector
    nearest_point: np.ndarray
    distance: float
    iterations: int
    gap: float
    converged: bool
    trace: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "nearest_point": self.nearest_point.tolist(),
            "distance": self.distance,
            "weights": self.witness.weights.tolist(),
            "iterations": self.iterations,
            "gap": self.gap,
            "converged": self.converged,
        }


def polytope_distance(ps, eps: float = 1e-6, max_iters: int = 100_000,
                      check: str = "full", trace: bool = True) -> PolytopeDistanceResult:
    """Distance from the origin to conv(ps); the squared distance is within eps.

    The saddle value is -dist^2/4, so the certificate is run to eps/4.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise InvalidInputError("eps must be positive and finite")
    ps = ps if isinstance(ps, PointSet) else PointSet(ps)
    p = PolytopeDistanceProblem(ps)
    tol = eps / 4.0
    stop = engine.StoppingRule(tol, max_iters=max_iters, cap=engine.iteration_cap(p.L, tol))
    res = engine.run(p, stop, check=check, trace=trace)
    w = SimplexVector(res.best_u)
    nearest = ps.points.T @ w.weights
    return PolytopeDistanceResult(
        witness=w, nearest_point=nearest, distance=float(np.linalg.norm(nearest)),
        iterations=res.iterations, gap=4.0 * res.cert_gap, converged=res.converged,
        trace=res.trace,
    )


@dataclass
class TwoPolytopeDistance:
    distance: float
    point_a: np.ndarray
    point_b: np.ndarray
    inner: PolytopeDistanceResult = field(repr=False)


def two_polytope_distance(ps_a, ps_b, eps: float = 1e-6, max_iters: int = 100_000,
                          limit: int = MINKOWSKI_LIMIT) -> TwoPolytopeDistance:
    """Distance between conv(A) and conv(B) through the difference set A - B."""
    A = ps_a if isinstance(ps_a, PointSet) else PointSet(ps_a)
    B = ps_b if isinstance(ps_b, PointSet) else PointSet(ps_b)
    if A.d != B.d:
        raise InvalidInputError("point sets must share a dimension")
    if A.n * B.n > limit:
        raise TooLargeError(f"difference set would have {A.n * B.n} points (limit {limit})")
    diff = (A.points[:, None, :] - B.points[None, :, :]).reshape(-1, A.d)
    res = polytope_distance(PointSet(diff), eps, max_iters, trace=False)
    w = res.witness.weights.reshape(A.n, B.n)
    pa = A.points.T @ w.sum(axis=1)
    pb = B.points.T @ w.sum(axis=0)
    return TwoPolytopeDistance(res.distance, pa, pb, res)


@dataclass
class MarginResult:
    direction: np.ndarray
    margin: float
    iterations: int
    gap: float
    converged: bool
    separable: bool
    cap: int = 0
    trace: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "direction": self.direction.tolist(),
            "margin": self.margin,
            "separable": self.separable,
            "iterations": self.iterations,
            "gap": self.gap,
            "converged": self.converged,
        }


def margin_problem(ds: LabeledDataset, eps: float, **kw) -> MecpProblem:
    Wt = ds.signed_points()
    shape = PolytopeShape(Wt, np.ones(ds.m))
    return MecpProblem(shape, PointSet(np.zeros((1, Wt.shape[1]))), eps, q1_radius=1.0, **kw)


def max_margin(ds: LabeledDataset, eps: float = 1e-3, max_iters: int = 100_000,
               check: str = "full", trace: bool = True) -> MarginResult:
    """Unit direction c maximizing min_i y_i <z_i, c>, to within eps.

    Optimizes over the unit ball and normalizes; when the data are not
    separable the optimum sits at or near 0 and ``separable`` is False.
    """
    if not isinstance(ds, LabeledDataset):
        raise InvalidInputError("max_margin expects a LabeledDataset")
    p = margin_problem(ds, eps)
    cap = engine.iteration_cap(p.L, eps / 2.0)
    stop = engine.StoppingRule(eps, max_iters=max_iters, cap=cap)
    res = engine.run(p, stop, check=check, trace=trace)
    c = res.center
    nrm = float(np.linalg.norm(c))
    Wt = p.Wt
    if nrm > 0.0:
        direction = c / nrm
    else:
        direction = np.zeros(p.dim)
        direction[0] = 1.0
    margin = float(np.min(Wt @ direction))
    return MarginResult(
        direction=direction, margin=margin, iterations=res.iterations, gap=res.cert_gap,
        converged=res.converged, separable=margin > 0.0, cap=cap, trace=res.trace,
    )

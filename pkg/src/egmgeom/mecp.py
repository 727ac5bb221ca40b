"""Minimum enclosing convex polytope of a fixed shape.

Find the translation c and the smallest magnification R with
<w~_i, x_j - c> <= R for every face i and point j.  The dual lives on the
simplex of dimension m*n (face-major), but every operator factors through
per-face sums, so an iteration is O(md + mn).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .errors import InvalidInputError
from .geometry import PointSet, PolytopeFit, PolytopeShape, data_radius
from .meb import L_POLICIES, centered_top_eig


def _check_pair(shape: PolytopeShape, ps: PointSet):
    if shape.d != ps.d:
        raise InvalidInputError(f"shape has dimension {shape.d}, points have {ps.d}")


def mecp_primal(shape: PolytopeShape, ps: PointSet, c) -> float:
    """max_{i,j} <w~_i, x_j - c>, via the per-face maxima."""
    _check_pair(shape, ps)
    Wt = shape.scaled_normals
    c = np.asarray(c, dtype=np.float64)
    return float(np.max((Wt @ ps.points.T).max(axis=1) - Wt @ c))


class MecpProblem(engine.SaddleProblem):
    """Smoothed MECP: eta ||c||^2 added to the objective, c restricted to a ball.

    ``ops`` counts scalar multiply-adds spent in apply_A/apply_At so tests
    can confirm the per-iteration work does not scale with m*n*d.
    """

    def __init__(self, shape: PolytopeShape, ps: PointSet, eps: float,
                 q1_radius: float | None = None, l_policy: str = "certified",
                 L: float | None = None):
        _check_pair(shape, ps)
        if not (eps > 0 and math.isfinite(eps)):
            raise InvalidInputError("eps must be positive and finite")
        if l_policy not in L_POLICIES:
            raise InvalidInputError(f"l_policy must be one of {L_POLICIES}")
        self.shape, self.ps, self.eps = shape, ps, float(eps)
        self.Wt = shape.scaled_normals
        self.m, self.n = shape.m, ps.n
        self.N, self.dim = self.m * self.n, ps.d
        Q = data_radius(ps) if q1_radius is None else float(q1_radius)
        if not (Q > 0 and math.isfinite(Q)):
            raise InvalidInputError("q1_radius must be positive and finite")
        self.Q = self.q1_radius = Q
        self.W = shape.W
        self.eta = self.eps / (2.0 * Q * Q)
        self.b = (self.Wt @ ps.points.T).ravel()  # b_ij = <w~_i, x_j>, one-time O(mnd)
        self.l_policy = l_policy if L is None else "explicit"
        if L is None:
            if l_policy == "certified":
                lam = centered_top_eig(self.Wt) if self.m > 1 else 0.0
                L = self.n * lam / (2.0 * self.eta)
            else:
                L = Q * Q * self.W**2 / self.eps
        floor = 1e-9 * max(self.W**2, 1e-300) / (2.0 * self.eta)
        self.L = float(max(L, floor))
        self.ops = 0
        self._finalize()
        self.ops = 0

    def apply_A(self, c):
        self.ops += self.m * self.dim + self.N
        return np.repeat(-(self.Wt @ c), self.n)

    def apply_At(self, u):
        self.ops += self.N + self.m * self.dim
        s = np.asarray(u).reshape(self.m, self.n).sum(axis=1)
        return -(self.Wt.T @ s)

    def target_value(self, c, Ac) -> float:
        return float(np.max(Ac + self.b))

    def target_lower_bound(self, u, Atu, D) -> float:
        # min over the Q-ball of <A c + b, u>
        return float(self.b @ u - self.Q * np.linalg.norm(Atu))


@dataclass
class MecpResult:
    fit: PolytopeFit
    iterations: int
    gap: float
    converged: bool
    eps: float
    q1_radius: float
    cap: int
    L: float
    clamp_engaged: bool
    iterate_gap: float = 0.0
    trace: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "center": self.fit.center.tolist(),
            "magnification": self.fit.magnification,
            "radius": self.fit.magnification,
            "iterations": self.iterations,
            "gap": self.gap,
            "converged": self.converged,
            "mode": "mecp",
            "eps": self.eps,
            "q1_radius": self.q1_radius,
            "q1_projection_engaged": self.clamp_engaged,
        }


def mecp_cap(p: MecpProblem) -> int:
    """Iterations that guarantee the eps/2 smoothed gap for this L."""
    return engine.iteration_cap(p.L, p.eps / 2.0)


def solve_mecp(shape: PolytopeShape, ps, eps: float, q1_radius: float | None = None,
               max_iters: int = 100_000, l_policy: str = "certified",
               L: float | None = None, check: str = "full", trace: bool = True,
               certificate: str = "best") -> MecpResult:
    """Translation c with mecp_primal(c) <= min over the Q1 ball + eps.

    With ``certificate="iterate"`` the run stops once the smoothed gap
    J_eta(c_k) - D_eta(u_k) reaches eps/2; with the default it stops once
    the best unsmoothed value is within eps of the ball lower bound.
    """
    ps = ps if isinstance(ps, PointSet) else PointSet(ps)
    _check_pair(shape, ps)
    if q1_radius is None and data_radius(ps) == 0.0:
        # all points at the origin; c = 0 is optimal for a ball of radius 0
        c = np.zeros(ps.d)
        fit = PolytopeFit(c, mecp_primal(shape, ps, c))
        return MecpResult(fit, 0, 0.0, True, eps, 0.0, 0, 0.0, False)
    p = MecpProblem(shape, ps, eps, q1_radius, l_policy, L)
    cap = mecp_cap(p)
    tol = eps if certificate == "best" else eps / 2.0
    stop = engine.StoppingRule(tol, max_iters=max_iters, cap=cap, certificate=certificate)
    res = engine.run(p, stop, check=check, trace=trace)
    fit = PolytopeFit(res.center, mecp_primal(shape, ps, res.center))
    return MecpResult(
        fit=fit, iterations=res.iterations, gap=res.cert_gap, converged=res.converged,
        eps=eps, q1_radius=p.Q, cap=cap, L=p.L, clamp_engaged=res.clamp_engaged,
        iterate_gap=res.state.gap, trace=res.trace,
    )

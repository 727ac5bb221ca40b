"""Minimum enclosing ball as a saddle problem over the simplex.

    min_c max_i ||c - x_i||^2 = min_c max_{u in simplex} ||c||^2 + <A c, u> + <b, u>

with A = -2 X and b_i = ||x_i||^2.  Neither A nor A A^T is ever formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .errors import InsufficientPointsError, InvalidInputError
from .geometry import Ball, PointSet, data_radius, pair_lower_bound

L_POLICIES = ("certified", "classical")


def _as_points(ps) -> PointSet:
    return ps if isinstance(ps, PointSet) else PointSet(ps)


def centered_top_eig(M: np.ndarray) -> float:
    """Largest eigenvalue of Mc^T Mc with Mc = M minus its column means."""
    Mc = M - M.mean(axis=0)
    G = Mc @ Mc.T if Mc.shape[0] <= Mc.shape[1] else Mc.T @ Mc
    return float(np.linalg.eigvalsh(G)[-1])


class MebProblem(engine.SaddleProblem):
    """MEB saddle problem.

    ``l_policy="certified"`` (default) uses twice the top eigenvalue of the
    centered scatter matrix, which bounds the dual curvature along the
    simplex.  ``"classical"`` uses 2 Q^2; it is not a valid bound
    in general and full invariant checks may reject it.  An explicit ``L``
    overrides both.
    """

    def __init__(self, ps, l_policy: str = "certified", L: float | None = None):
        ps = _as_points(ps)
        self.ps = ps
        self.X = ps.points
        self.N, self.dim = ps.n, ps.d
        self.eta = 1.0
        self.b = np.einsum("ij,ij->i", self.X, self.X)
        self.Q = data_radius(ps)
        if l_policy not in L_POLICIES:
            raise InvalidInputError(f"l_policy must be one of {L_POLICIES}")
        self.l_policy = l_policy if L is None else "explicit"
        if L is None:
            L = self.certified_L() if l_policy == "certified" else 2.0 * self.Q**2
        self.L = float(max(L, self._L_floor()))
        self._finalize()

    def _L_floor(self) -> float:
        return 1e-9 * 2.0 * max(self.Q**2, 1e-300)

    def certified_L(self) -> float:
        return 2.0 * centered_top_eig(self.X) if self.N > 1 else 0.0

    def apply_A(self, c):
        return -2.0 * (self.X @ c)

    def apply_At(self, u):
        return -2.0 * (self.X.T @ u)


def tangent_power_iteration(p: engine.SaddleProblem, iters: int = 50, seed: int = 0) -> float:
    """Estimate max ||A^T v||^2 / (2 eta) over unit v summing to zero.

    Power iteration on the centered operator.  A certified L must not be
    smaller than this estimate (beyond rounding).
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(p.N)
    est = 0.0
    for _ in range(iters):
        v -= v.mean()
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            return 0.0
        v /= nrm
        w = p.apply_A(p.apply_At(v)) / (2.0 * p.eta)
        w -= w.mean()
        est = float(v @ w)
        v = w
    return est


def meb_primal(ps, c) -> float:
    """max_i ||c - x_i||^2."""
    X = _as_points(ps).points
    diff = X - np.asarray(c, dtype=np.float64)
    return float(np.einsum("ij,ij->i", diff, diff).max())


def meb_dual(ps, u) -> float:
    """<u, b> - 1/4 ||A^T u||^2 = sum_i u_i ||x_i||^2 - ||sum_i u_i x_i||^2."""
    X = _as_points(ps).points
    u = np.asarray(u, dtype=np.float64)
    s = X.T @ u
    return float(u @ np.einsum("ij,ij->i", X, X) - s @ s)


def meb_dual_gradient(ps, u) -> np.ndarray:
    """b - 1/2 A A^T u, i.e. ||x_i||^2 - 2 <x_i, sum_j u_j x_j>."""
    X = _as_points(ps).points
    u = np.asarray(u, dtype=np.float64)
    return np.einsum("ij,ij->i", X, X) - 2.0 * (X @ (X.T @ u))


@dataclass
class MebResult:
    ball: Ball
    iterations: int
    gap: float
    converged: bool
    mode: str
    eps: float
    cap: int
    L: float
    iterate_gap: float
    trace: list = field(default_factory=list, repr=False)
    weights: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "center": self.ball.center.tolist(),
            "radius": self.ball.radius,
            "radius_sq": self.ball.radius_sq,
            "iterations": self.iterations,
            "gap": self.gap,
            "converged": self.converged,
            "mode": self.mode,
            "eps": self.eps,
        }


def _finish(ps, res: engine.RunResult, mode, eps, cap, L) -> MebResult:
    center = res.center
    r2 = meb_primal(ps, center)
    return MebResult(
        ball=Ball(center, r2), iterations=res.iterations, gap=res.cert_gap,
        converged=res.converged, mode=mode, eps=eps, cap=cap, L=L,
        iterate_gap=res.state.gap, trace=res.trace, weights=res.state.u,
    )


def _check_eps(eps):
    if not (eps > 0 and math.isfinite(eps)):
        raise InvalidInputError("eps must be positive and finite")


def solve_meb_additive(ps, eps_add: float, max_iters: int = 100_000,
                       l_policy: str = "certified", L: float | None = None,
                       check: str = "full", trace: bool = True,
                       certificate: str = "best") -> MebResult:
    """Center with max_i ||c - x_i||^2 <= R*^2 + eps_add."""
    _check_eps(eps_add)
    ps = _as_points(ps)
    p = MebProblem(ps, l_policy, L)
    cap = engine.iteration_cap(p.L, eps_add)
    stop = engine.StoppingRule(eps_add, max_iters=max_iters, cap=cap, certificate=certificate)
    res = engine.run(p, stop, check=check, trace=trace)
    return _finish(ps, res, "add", eps_add, cap, p.L)


def multiplicative_cap(ps, eps_mult: float, l_policy: str = "certified",
                       L: float | None = None) -> int:
    """A-priori iteration cap for a (1 + eps) guarantee on R^2."""
    ps = _as_points(ps)
    P = pair_lower_bound(ps)
    p = MebProblem(ps, l_policy, L)
    return engine.iteration_cap(p.L, eps_mult * P**2)


def solve_meb_multiplicative(ps, eps_mult: float, max_iters: int = 100_000,
                             l_policy: str = "certified", L: float | None = None,
                             check: str = "full", trace: bool = True,
                             certificate: str = "best") -> MebResult:
    """Center with R^2 <= (1 + eps_mult) R*^2.

    The additive target eps_mult * P^2 uses the pair bound P <= R*; the
    stopping test also accepts eps_mult times the best dual value, which is
    another lower bound on R*^2.
    """
    _check_eps(eps_mult)
    ps = _as_points(ps)
    if ps.n < 2:
        raise InsufficientPointsError("multiplicative mode needs at least two points")
    P = pair_lower_bound(ps)
    if P == 0.0:
        # every point coincides with x_0
        c = ps.points[0]
        return MebResult(Ball(c, 0.0), 0, 0.0, True, "mult", eps_mult, 0, 0.0, 0.0)
    p = MebProblem(ps, l_policy, L)
    tol = eps_mult * P**2
    cap = engine.iteration_cap(p.L, tol)
    rel = eps_mult if certificate == "best" else 0.0
    stop = engine.StoppingRule(tol, rel=rel, max_iters=max_iters, cap=cap, certificate=certificate)
    res = engine.run(p, stop, check=check, trace=trace)
    return _finish(ps, res, "mult", eps_mult, cap, p.L)

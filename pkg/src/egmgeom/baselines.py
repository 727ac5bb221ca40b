"""Reference solvers: a core-set MEB baseline and exhaustive small-case oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np

from .errors import InvalidInputError, SizeLimitError
from .geometry import Ball, PointSet, pair_lower_bound
from .qp import DiagQpInstance


def _as_points(ps) -> PointSet:
    return ps if isinstance(ps, PointSet) else PointSet(ps)


# ----------------------------------------------------------------------
# farthest-point core-set baseline


@dataclass
class BcResult:
    ball: Ball
    coreset: np.ndarray
    iterations: int
    converged: bool
    lower_bound: float


def bc_coreset_meb(ps, eps_mult: float, max_iters: int = 1_000_000) -> BcResult:
    """Farthest-point iteration c <- c + (p - c)/(k + 1), starting at x_1.

    c always equals sum_i u_i x_i for simplex weights u, so
    sum_i u_i ||x_i||^2 - ||c||^2 is a lower bound on R*^2, as is the
    squared pair bound.  The run stops once the farthest point is within
    (1 + eps) times the square root of the better of the two.
    """
    if not (eps_mult > 0 and math.isfinite(eps_mult)):
        raise InvalidInputError("eps_mult must be positive and finite")
    ps = _as_points(ps)
    X = ps.points
    sq = np.einsum("ij,ij->i", X, X)
    P2 = pair_lower_bound(ps) ** 2 if ps.n > 1 else 0.0
    c = X[0].copy()
    u = np.zeros(ps.n)
    u[0] = 1.0
    k = 0
    converged = False
    while True:
        diff = X - c
        dist = np.einsum("ij,ij->i", diff, diff)
        j = int(np.argmax(dist))
        r2 = float(dist[j])
        lb = max(P2, float(u @ sq - c @ c))
        if r2 <= (1.0 + eps_mult) ** 2 * lb or r2 == 0.0:
            converged = True
            break
        if k >= max_iters:
            break
        k += 1
        step = 1.0 / (k + 1)
        c += step * (X[j] - c)
        u *= 1.0 - step
        u[j] += step
    return BcResult(Ball(c, r2), np.flatnonzero(u), k, converged, lb)


# ----------------------------------------------------------------------
# exact enumeration oracles


@dataclass(frozen=True)
class OracleBall:
    center: np.ndarray
    radius: float
    support: tuple

    @property
    def radius_sq(self) -> float:
        return self.radius**2


def _circumsphere(P: np.ndarray):
    """Center of the sphere through the rows of P inside their affine hull."""
    p0 = P[0]
    V = P[1:] - p0
    if V.shape[0] == 0:
        return p0.copy()
    G = V @ V.T
    if np.linalg.matrix_rank(G, tol=1e-10 * np.abs(G).max()) < V.shape[0]:
        return None
    lam = np.linalg.solve(G, 0.5 * np.diag(G))
    return p0 + V.T @ lam


def exact_meb_small(ps) -> OracleBall:
    """Smallest ball over circumspheres of all supports of size <= d + 1."""
    ps = _as_points(ps)
    if ps.n > 12 or ps.d > 3:
        raise SizeLimitError("exact_meb_small handles n <= 12 and d <= 3")
    X = ps.points
    scale = max(1.0, float(np.abs(X).max()))
    best = None
    for size in range(1, min(ps.n, ps.d + 1) + 1):
        for idx in combinations(range(ps.n), size):
            c = _circumsphere(X[list(idx)])
            if c is None:
                continue
            r2 = float(((X[idx[0]] - c) ** 2).sum())
            if best is not None and r2 >= best[1]:
                continue
            # compare distances, not squares, so close points still count
            if math.sqrt(np.max(((X - c) ** 2).sum(axis=1))) <= math.sqrt(r2) + 1e-10 * scale:
                best = (c, r2, idx)
    c, r2, idx = best
    return OracleBall(c, math.sqrt(r2), idx)


@lru_cache(maxsize=None)
def _patterns(n: int) -> np.ndarray:
    return np.array(list(product((0, 1, 2), repeat=n)), dtype=np.int8)


def dense_qp_oracle(inst: DiagQpInstance) -> np.ndarray:
    """Global optimum by enumerating all 3^n lower/upper/free patterns."""
    n = inst.n
    if n > 8:
        raise SizeLimitError("dense_qp_oracle handles n <= 8")
    pat = _patterns(n)
    d2, m, l, u, s, z = inst.d_sq, inst.m, inst.l, inst.u, inst.sigma, inst.z
    free = pat == 2
    fixed = np.where(pat == 0, l, u)
    # free coordinates: alpha = m + lam * s / d2, one lam per pattern
    rest = z - np.where(free, 0.0, s * fixed).sum(axis=1) - np.where(free, s * m, 0.0).sum(axis=1)
    curv = np.where(free, s * s / d2, 0.0).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(curv > 0, rest / curv, 0.0)
    alpha = np.where(free, m + lam[:, None] * s / d2, fixed)
    scale = max(1.0, abs(z), float(np.abs(s).max()))
    ok = np.all(alpha >= l - 1e-12, axis=1) & np.all(alpha <= u + 1e-12, axis=1)
    ok &= np.abs(alpha @ s - z) <= 1e-10 * scale
    if not ok.any():
        raise InvalidInputError("no feasible pattern; instance is infeasible")
    obj = np.where(ok, 0.5 * (d2 * (alpha - m) ** 2).sum(axis=1), np.inf)
    best = alpha[int(np.argmin(obj))]
    _verify_kkt(inst, best)
    return np.clip(best, l, u)


def _verify_kkt(inst: DiagQpInstance, a: np.ndarray, tol: float = 1e-7) -> None:
    """Check stationarity with sign-correct bound multipliers for some lam."""
    grad = inst.d_sq * (a - inst.m)
    s = inst.sigma
    span = np.maximum(inst.u - inst.l, 1e-300)
    free = ((a - inst.l) > 1e-9 * span) & ((inst.u - a) > 1e-9 * span) & (s != 0)
    if free.any():
        lam = float(np.median(grad[free] / s[free]))
    else:
        lam = _lam_from_bounds(inst, a, grad)
    r = grad - lam * s  # must be >= 0 at lower bounds, <= 0 at upper, 0 if free
    at_l = np.isclose(a, inst.l, rtol=0, atol=1e-9 * span)
    at_u = np.isclose(a, inst.u, rtol=0, atol=1e-9 * span)
    scale = max(1.0, float(np.abs(grad).max()))
    bad = (~at_l & ~at_u & (np.abs(r) > tol * scale)) | (at_l & ~at_u & (r < -tol * scale)) \
        | (at_u & ~at_l & (r > tol * scale))
    if bad.any():
        raise AssertionError(f"oracle optimum fails KKT at {np.flatnonzero(bad)}")


def _lam_from_bounds(inst, a, grad):
    # any lam in the intersection of the per-coordinate intervals works
    lo, hi = -math.inf, math.inf
    for i in np.flatnonzero(inst.sigma != 0):
        q = grad[i] / inst.sigma[i]
        at_lower = abs(a[i] - inst.l[i]) <= abs(a[i] - inst.u[i])
        # r = grad - lam s >= 0 at lower  <=>  lam <= q if s > 0
        if at_lower == (inst.sigma[i] > 0):
            hi = min(hi, q)
        else:
            lo = max(lo, q)
    if lo <= hi:
        return lo if math.isfinite(lo) else (hi if math.isfinite(hi) else 0.0)
    return 0.5 * (lo + hi)


def minnorm_oracle(ps) -> np.ndarray:
    """Point of conv(ps) nearest the origin, by enumerating simplices."""
    ps = _as_points(ps)
    if ps.n > 8 or ps.d > 3:
        raise SizeLimitError("minnorm_oracle handles n <= 8 and d <= 3")
    X = ps.points
    best, best_norm = None, math.inf
    for size in range(1, min(ps.n, ps.d + 1) + 1):
        for idx in combinations(range(ps.n), size):
            P = X[list(idx)]
            p0 = P[0]
            V = P[1:] - p0
            if size == 1:
                q, bary = p0, np.ones(1)
            else:
                G = V @ V.T
                if np.linalg.matrix_rank(G, tol=1e-10 * np.abs(G).max()) < size - 1:
                    continue
                lam = np.linalg.solve(G, -(V @ p0))
                q = p0 + V.T @ lam
                bary = np.concatenate([[1.0 - lam.sum()], lam])
            if bary.min() < -1e-12:
                continue
            nq = float(np.linalg.norm(q))
            if nq < best_norm:
                best, best_norm = q, nq
    return best

"""Exact solver for a box-constrained diagonal QP with one equality constraint.

    minimize    1/2 sum_i d_i^2 (alpha_i - m_i)^2
    subject to  l_i <= alpha_i <= u_i,   sum_i sigma_i alpha_i = z

After the change of variable beta_i = sigma_i (alpha_i - m_i) the optimality
conditions reduce to finding the root of a monotone piecewise-linear
function f(lam) with at most 2n kinks.  The root is located by repeatedly
halving the kink set around its median, which costs expected O(n) overall.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import InfeasibleError, InvalidInputError, NumericalFailureError
from ..geometry import SimplexVector
from ._backend import BACKEND, available_backends, get_kernel

__all__ = [
    "BACKEND",
    "DiagQpInstance",
    "QpInfo",
    "TransformedQp",
    "available_backends",
    "eval_f",
    "kkt_multipliers",
    "loop_bound",
    "median_select",
    "project_scaled_simplex",
    "project_simplex_array",
    "qp_objective",
    "root_find_f",
    "solve_diag_qp",
    "transform",
]


def _vec(x, n=None, name="array"):
    a = np.array(x, dtype=np.float64).ravel()
    if n is not None and a.size != n:
        raise InvalidInputError(f"{name} has length {a.size}, expected {n}")
    return a


@dataclass(frozen=True)
class DiagQpInstance:
    d_sq: np.ndarray
    m: np.ndarray
    l: np.ndarray
    u: np.ndarray
    sigma: np.ndarray
    z: float

    def __post_init__(self):
        d_sq = _vec(self.d_sq, name="d_sq")
        n = d_sq.size
        if n < 1:
            raise InvalidInputError("QP needs at least one variable")
        fields = {
            "d_sq": d_sq,
            "m": _vec(self.m, n, "m"),
            "l": _vec(self.l, n, "l"),
            "u": _vec(self.u, n, "u"),
            "sigma": _vec(self.sigma, n, "sigma"),
        }
        z = float(self.z)
        if not all(np.all(np.isfinite(v)) for v in fields.values()) or not math.isfinite(z):
            raise InvalidInputError("QP data must be finite")
        if np.any(d_sq <= 0):
            raise InvalidInputError("every d_i^2 must be positive")
        if np.any(fields["l"] >= fields["u"]):
            raise InvalidInputError("need l_i < u_i for every coordinate")
        for k, v in fields.items():
            v.setflags(write=False)
            object.__setattr__(self, k, v)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.d_sq.size

    def equality_range(self) -> tuple[float, float]:
        s, l, u = self.sigma, self.l, self.u
        lo = float(np.sum(np.where(s > 0, s * l, s * u)))
        hi = float(np.sum(np.where(s > 0, s * u, s * l)))
        return lo, hi

    def is_feasible(self) -> bool:
        lo, hi = self.equality_range()
        tol = 1e-12 * max(1.0, abs(lo), abs(hi), abs(self.z))
        return lo - tol <= self.z <= hi + tol


@dataclass(frozen=True)
class TransformedQp:
    """The problem in beta-space: min 1/2 sum dbar2 beta^2, lp <= beta <= up, sum beta = zp."""

    lp: np.ndarray
    up: np.ndarray
    dbar2: np.ndarray
    zp: float

    @property
    def n(self) -> int:
        return self.lp.size

    def kinks(self) -> np.ndarray:
        return np.concatenate([self.dbar2 * self.lp, self.dbar2 * self.up])


class QpInfo(NamedTuple):
    lam: float
    loops: int
    n_active: int
    bracket: tuple[float, float]


def transform(inst: DiagQpInstance) -> tuple[TransformedQp, np.ndarray]:
    """Change of variable; returns the transformed problem and the mask of sigma != 0."""
    nz = inst.sigma != 0
    s, m = inst.sigma[nz], inst.m[nz]
    l, u = inst.l[nz], inst.u[nz]
    lo_side = np.where(s > 0, s * (l - m), s * (u - m))
    hi_side = np.where(s > 0, s * (u - m), s * (l - m))
    tq = TransformedQp(
        lp=lo_side,
        up=hi_side,
        dbar2=inst.d_sq[nz] / s**2,
        zp=float(inst.z - np.sum(s * m)),
    )
    return tq, nz


def eval_f(lam: float, tq: TransformedQp) -> float:
    """f(lam) = sum_i h_i(lam) - zp with h_i the three-piece clamp."""
    return float(np.clip(lam / tq.dbar2, tq.lp, tq.up).sum() - tq.zp)


def loop_bound(n: int) -> int:
    """Worst-case number of halving loops for n variables."""
    return math.ceil(math.log2(2 * n)) + 1


def _root(tq: TransformedQp, seed: int, backend):
    k = get_kernel(backend)
    lam, loops, lo, hi, off, slope = k.root_find(
        np.ascontiguousarray(tq.lp), np.ascontiguousarray(tq.up),
        np.ascontiguousarray(tq.dbar2), float(tq.zp), seed,
    )
    scale = 1e-9 * (1.0 + abs(tq.zp) + float(np.abs(tq.lp).sum() + np.abs(tq.up).sum()) / tq.n)
    f_lo = off + slope * lo - tq.zp if math.isfinite(lo) else float(tq.lp.sum() - tq.zp)
    f_hi = off + slope * hi - tq.zp if math.isfinite(hi) else float(tq.up.sum() - tq.zp)
    if f_lo > scale or f_hi < -scale:
        raise NumericalFailureError(
            f"kink bracket [{lo!r}, {hi!r}] does not straddle the root (f={f_lo!r}, {f_hi!r})"
        )
    return lam, loops, (lo, hi)


def root_find_f(tq: TransformedQp, seed: int = 0, backend: str | None = None) -> float:
    """Root of the monotone piecewise-linear f; see :func:`eval_f`."""
    if tq.n == 0:
        return 0.0
    return _root(tq, seed, backend)[0]


def median_select(values, seed: int = 0, backend: str | None = None) -> float:
    """Lower median (rank ceil(k/2) of k) by randomized quickselect.

    Expected linear time; the worst case is quadratic, as with any
    quickselect that does not use median-of-medians pivots.
    """
    a = np.ascontiguousarray(np.asarray(values, dtype=np.float64).ravel())
    if a.size == 0:
        raise InvalidInputError("median of an empty sequence")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("median_select needs finite values")
    return get_kernel(backend).select(a, (a.size - 1) // 2, seed)


def kkt_multipliers(tq: TransformedQp, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Bound multipliers rho+ = [dbar2 lp - lam]_+ and rho- = [lam - dbar2 up]_+."""
    rho_plus = np.maximum(tq.dbar2 * tq.lp - lam, 0.0)
    rho_minus = np.maximum(lam - tq.dbar2 * tq.up, 0.0)
    return rho_plus, rho_minus


def qp_objective(inst: DiagQpInstance, alpha) -> float:
    alpha = np.asarray(alpha, dtype=np.float64)
    return float(0.5 * np.sum(inst.d_sq * (alpha - inst.m) ** 2))


def solve_diag_qp(inst: DiagQpInstance, seed: int = 0, backend: str | None = None,
                  full_output: bool = False):
    """Exact minimizer of the diagonal QP.

    Coordinates with sigma_i = 0 decouple and are clamped independently.
    With ``full_output`` a :class:`QpInfo` is returned alongside alpha.
    """
    if not inst.is_feasible():
        lo, hi = inst.equality_range()
        raise InfeasibleError(f"z={inst.z!r} outside attainable range [{lo!r}, {hi!r}]")
    alpha = np.clip(inst.m, inst.l, inst.u)
    tq, nz = transform(inst)
    lam, loops, bracket = 0.0, 0, (-math.inf, math.inf)
    if tq.n:
        lam, loops, bracket = _root(tq, seed, backend)
        beta = np.clip(lam / tq.dbar2, tq.lp, tq.up)
        alpha[nz] = np.clip(inst.m[nz] + beta / inst.sigma[nz], inst.l[nz], inst.u[nz])
    resid = abs(float(inst.sigma @ alpha) - inst.z)
    if resid > 1e-9 * max(1.0, abs(inst.z)):
        raise NumericalFailureError(f"equality residual {resid:.3g} after recovery")
    if full_output:
        return alpha, QpInfo(lam, loops, tq.n, bracket)
    return alpha


def project_simplex_array(g: np.ndarray, scale: float, seed: int = 0,
                          backend: str | None = None) -> np.ndarray:
    """argmin_v scale/2 ||v||^2 - <g, v> over the probability simplex, as an array.

    This is the Euclidean projection of m = g/scale, v_i = clip(m_i + t, 0, 1).
    The projection ignores constant shifts, so m is anchored at max(m) = 0;
    then t <= 1 and every m_i <= -1 is zero at the optimum.  Dropping those
    coordinates before the root search avoids cancellation in the equality
    right-hand side and shrinks the kink set.  A final residual is pushed onto
    the free coordinates, a tiny shift of t that keeps the sum at 1.
    """
    g = np.asarray(g, dtype=np.float64)
    m = (g - g.max()) / scale
    keep = np.flatnonzero(m > -1.0)
    v = np.zeros(m.size)
    if keep.size == 1:
        v[keep] = 1.0
        return v
    mk = m[keep]
    lam = get_kernel(backend).root_find(
        -mk, 1.0 - mk, np.full(mk.size, float(scale)), 1.0 - float(mk.sum()), seed
    )[0]
    vk = np.clip(mk + lam / scale, 0.0, 1.0)
    r = vk.sum() - 1.0
    if r:
        free = (vk > 0.0) & (vk < 1.0)
        k = int(np.count_nonzero(free))
        if k:
            vk[free] = np.clip(vk[free] - r / k, 0.0, 1.0)
    v[keep] = vk
    return v


def project_scaled_simplex(g, scale: float, seed: int = 0,
                           backend: str | None = None) -> SimplexVector:
    g = np.asarray(g, dtype=np.float64).ravel()
    if not scale > 0 or not math.isfinite(scale):
        raise InvalidInputError("scale must be positive and finite")
    if g.size == 0 or not np.all(np.isfinite(g)):
        raise InvalidInputError("g must be finite and nonempty")
    return SimplexVector(project_simplex_array(g, scale, seed, backend))

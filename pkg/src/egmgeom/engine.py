"""Excessive-gap minimization over a simplex-constrained dual.

The engine works with saddle problems of the form

    min_{c in Q1} max_{u in simplex} eta ||c||^2 + <A c, u> + <b, u>

where Q1 is all of R^d or a centered ball.  Concrete problems supply
matrix-free ``apply_A``/``apply_At``, the vector ``b`` and a Lipschitz
constant ``L`` for the gradient of the dual on the simplex.

Besides the raw iterates (c_k, u_k) the driver keeps the best primal
candidate among c_k and c(u_k) and the best dual lower bound seen so far.
Their difference is a valid optimality certificate and is what the
default stopping rule looks at.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import GapViolationError, InvalidInputError, NumericalFailureError
from .geometry import SimplexVector
from .qp import project_simplex_array

log = logging.getLogger(__name__)
if os.environ.get("EGMGEOM_LOG", "").lower() == "debug":
    logging.basicConfig(level=logging.DEBUG)
    log.setLevel(logging.DEBUG)

CHECK_MODES = ("full", "sampled", "off")
SAMPLE_EVERY = 16


def gap_tolerance(D: float) -> float:
    return 1e-8 * (1.0 + abs(D))


class SaddleProblem:
    """Base class; subclasses set the attributes and call :meth:`_finalize`."""

    N: int
    dim: int
    eta: float
    b: np.ndarray
    L: float
    sigma: float = 1.0
    q1_radius: float | None = None

    def apply_A(self, c: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_At(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- values ---------------------------------------------------------
    def objective(self, c, Ac=None) -> float:
        """eta ||c||^2 + max_i (Ac + b)_i, the primal side of the saddle."""
        if Ac is None:
            Ac = self.apply_A(c)
        return float(self.eta * (c @ c) + np.max(Ac + self.b))

    def dual(self, u, Atu=None) -> float:
        """Exact dual min_{c in Q1} of the saddle function at fixed u."""
        if Atu is None:
            Atu = self.apply_At(u)
        c = self.c_of(Atu)
        return float(self.b @ u + self.eta * (c @ c) + Atu @ c)

    def dual_gradient(self, u, Atu=None) -> np.ndarray:
        if Atu is None:
            Atu = self.apply_At(u)
        return self.b + self.apply_A(self.c_of(Atu))

    def c_of(self, Atu: np.ndarray) -> np.ndarray:
        c = Atu / (-2.0 * self.eta)
        r = self.q1_radius
        if r is not None:
            nrm = float(np.linalg.norm(c))
            if nrm > r:
                c = c * (r / nrm)
        return c

    # -- certificate hooks ---------------------------------------------
    def target_value(self, c, Ac) -> float:
        """Value whose suboptimality the caller cares about."""
        return self.objective(c, Ac)

    def target_lower_bound(self, u, Atu, D: float) -> float:
        """Rigorous lower bound on min target_value, given the dual point u."""
        return D

    # -- construction checks --------------------------------------------
    def _finalize(self, probes: int = 3, seed: int = 12345) -> None:
        if not (self.L > 0 and math.isfinite(self.L)):
            raise InvalidInputError(f"L must be positive and finite, got {self.L!r}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise InvalidInputError(f"eta must be positive and finite, got {self.eta!r}")
        if self.sigma <= 0:
            raise InvalidInputError("sigma must be positive")
        err = adjoint_error(self, probes, seed)
        if err > 1e-10:
            raise NumericalFailureError(f"apply_A/apply_At are not adjoint (rel. error {err:.2e})")


def adjoint_error(p: SaddleProblem, probes: int = 3, seed: int = 0) -> float:
    """Worst relative mismatch of <A c, u> and <c, A^T u> over random probes."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        c = rng.standard_normal(p.dim)
        u = rng.standard_normal(p.N)
        lhs = float(p.apply_A(c) @ u)
        rhs = float(c @ p.apply_At(u))
        scale = max(1.0, abs(lhs), abs(rhs))
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


class DenseSaddleProblem(SaddleProblem):
    """Saddle problem with an explicit matrix; handy for tests and small cases."""

    def __init__(self, A, b, eta=1.0, L=None, q1_radius=None):
        self.A = np.array(A, dtype=np.float64, ndmin=2)
        self.N, self.dim = self.A.shape
        self.b = np.array(b, dtype=np.float64).reshape(self.N)
        self.eta = float(eta)
        self.q1_radius = q1_radius
        if L is None:
            L = tangent_lipschitz(self.A, self.eta)
        self.L = float(L)
        self._finalize()

    def apply_A(self, c):
        return self.A @ c

    def apply_At(self, u):
        return self.A.T @ u


def tangent_lipschitz(A: np.ndarray, eta: float) -> float:
    """max ||A^T v||^2 / (2 eta) over unit v with sum(v) = 0.

    Simplex differences live in that subspace, so this is the curvature
    the method actually sees.  Computed from the smaller Gram matrix.
    """
    Ac = A - A.mean(axis=0)
    if Ac.shape[0] <= Ac.shape[1]:
        G = Ac @ Ac.T
    else:
        G = Ac.T @ Ac
    lam = float(np.linalg.eigvalsh(G)[-1]) if G.size else 0.0
    floor = 1e-9 * max(float(np.max(np.sum(A * A, axis=1))), 1e-300)
    return max(lam, floor) / (2.0 * eta)


# ----------------------------------------------------------------------
# the three maps of the method


def prox_center(N: int) -> SimplexVector:
    """Uniform point, the minimizer of the prox function 1/2 ||u - u0||^2."""
    if N < 1:
        raise InvalidInputError("N must be at least 1")
    return SimplexVector.uniform(N)


def prox_diameter(N: int, sigma: float = 1.0) -> float:
    """max over the simplex of sigma/2 ||u - u0||^2, attained at any vertex."""
    return 0.5 * sigma * (1.0 - 1.0 / N)


def map_c(p: SaddleProblem, u) -> np.ndarray:
    """c(u) = argmin_{c in Q1} eta ||c||^2 + <A c, u>."""
    return p.c_of(p.apply_At(np.asarray(u, dtype=np.float64)))


def _u_mu(p: SaddleProblem, g: np.ndarray, mu: float) -> np.ndarray:
    u0 = 1.0 / p.N
    s = mu * p.sigma
    return project_simplex_array(g + s * u0, s)


def map_u_mu(p: SaddleProblem, c, mu: float) -> SimplexVector:
    """argmax over the simplex of <A c + b, u> - mu sigma/2 ||u - u0||^2."""
    if not mu > 0:
        raise InvalidInputError("mu must be positive")
    c = np.asarray(c, dtype=np.float64)
    return SimplexVector(_u_mu(p, p.apply_A(c) + p.b, mu))


def _V(p: SaddleProblem, u: np.ndarray, grad: np.ndarray) -> np.ndarray:
    return project_simplex_array(p.L * u + grad, p.L)


def map_V(p: SaddleProblem, u) -> SimplexVector:
    """Projected gradient-ascent step on D with step 1/L."""
    u = np.asarray(u, dtype=np.float64)
    return SimplexVector(_V(p, u, p.dual_gradient(u)))


def smoothed_objective(p: SaddleProblem, c, mu: float, Ac=None, gamma=None) -> float:
    """J_mu(c), the primal smoothed by the prox term with weight mu."""
    c = np.asarray(c, dtype=np.float64)
    g = (p.apply_A(c) if Ac is None else Ac) + p.b
    if gamma is None:
        gamma = _u_mu(p, g, mu)
    dev = gamma - 1.0 / p.N
    return float(p.eta * (c @ c) + g @ gamma - 0.5 * mu * p.sigma * (dev @ dev))


# ----------------------------------------------------------------------
# iteration


@dataclass(frozen=True)
class EgmState:
    k: int
    c: np.ndarray
    u: np.ndarray
    mu: float
    Ac: np.ndarray
    Atu: np.ndarray
    J: float
    D: float
    J_mu: float
    gamma: np.ndarray  # u_mu(c) at this state's mu; reused by the next step

    @property
    def gap(self) -> float:
        return self.J - self.D

    @property
    def simplex(self) -> SimplexVector:
        return SimplexVector(self.u)

    def excessive_gap_ok(self) -> bool:
        return self.J_mu <= self.D + gap_tolerance(self.D)


def _make_state(p: SaddleProblem, k, c, u, mu, Ac) -> EgmState:
    Atu = p.apply_At(u)
    D = p.dual(u, Atu)
    g = Ac + p.b
    gamma = _u_mu(p, g, mu)
    dev = gamma - 1.0 / p.N
    cc = float(c @ c)
    J = float(p.eta * cc + g.max())
    J_mu = float(p.eta * cc + g @ gamma - 0.5 * mu * p.sigma * (dev @ dev))
    return EgmState(k, c, u, mu, Ac, Atu, J, D, J_mu, gamma)


def egm_init(p: SaddleProblem) -> EgmState:
    u0 = np.full(p.N, 1.0 / p.N)
    c1 = p.c_of(p.apply_At(u0))
    Ac1 = p.apply_A(c1)
    u1 = _V(p, u0, p.b + Ac1)
    return _make_state(p, 1, c1, u1, p.L / p.sigma, Ac1)


def egm_step(p: SaddleProblem, s: EgmState) -> EgmState:
    tau = 2.0 / (s.k + 3)
    beta = (1.0 - tau) * s.u + tau * s.gamma
    c_beta = p.c_of(p.apply_At(beta))
    Ac_beta = p.apply_A(c_beta)
    c = (1.0 - tau) * s.c + tau * c_beta
    if s.k % 64 == 0:
        Ac = p.apply_A(c)  # refresh the running combination
    else:
        Ac = (1.0 - tau) * s.Ac + tau * Ac_beta
    u = _V(p, beta, p.b + Ac_beta)
    return _make_state(p, s.k + 1, c, u, (1.0 - tau) * s.mu, Ac)


def mu_closed_form(L: float, k: int, sigma: float = 1.0) -> float:
    return 6.0 * L / (sigma * (k + 1) * (k + 2))


def gap_bound(L: float, k: int, N: int, sigma: float = 1.0) -> float:
    """Guaranteed J(c_k) - D(u_k) after k iterations for a valid L."""
    return 6.0 * L * prox_diameter(N, sigma) / (sigma * (k + 1) * (k + 2))


def iteration_cap(L: float, target: float, sigma: float = 1.0) -> int:
    """Smallest k with 6 L (sigma/2) / (sigma (k+1)(k+2)) <= target, rounded as sqrt(3L/target)."""
    if not target > 0:
        raise InvalidInputError("target gap must be positive")
    return max(1, math.ceil(math.sqrt(6.0 * L * (0.5 * sigma) / (sigma * target))))


# ----------------------------------------------------------------------
# driver


@dataclass(frozen=True)
class StoppingRule:
    """Stop once the certificate drops below max(tol, rel * max(lower_bound, 0)).

    ``certificate="best"`` uses the best primal candidate against the best
    lower bound; ``"iterate"`` uses the raw pair J(c_k) - D(u_k).
    """

    tol: float
    rel: float = 0.0
    max_iters: int = 100_000
    cap: int | None = None
    certificate: str = "best"

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidInputError("stopping tolerance must be positive")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be at least 1")
        if self.certificate not in ("best", "iterate"):
            raise InvalidInputError(f"unknown certificate {self.certificate!r}")

    def threshold(self, lb: float) -> float:
        return max(self.tol, self.rel * max(lb, 0.0))


@dataclass
class RunResult:
    state: EgmState
    center: np.ndarray
    value: float
    lower_bound: float
    cert_gap: float
    converged: bool
    best_u: np.ndarray
    clamp_engaged: bool
    trace: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return self.state.k

    TRACE_COLUMNS = ("k", "J", "D", "gap", "mu", "cert_gap")


def _check(p, s, mode):
    if mode == "off" or (mode == "sampled" and s.k % SAMPLE_EVERY):
        return
    if not s.excessive_gap_ok():
        raise GapViolationError(s.k, s.J_mu, s.D, gap_tolerance(s.D))
    if log.isEnabledFor(logging.DEBUG):
        log.debug("k=%d J_mu=%.12g D=%.12g slack=%.3g", s.k, s.J_mu, s.D, s.D - s.J_mu)


def run(p: SaddleProblem, stop: StoppingRule, check: str = "full",
        trace: bool = True, trace_every: int = 1, callback=None) -> RunResult:
    """Iterate until the stopping rule fires, the cap is hit, or max_iters."""
    if check not in CHECK_MODES:
        raise InvalidInputError(f"check must be one of {CHECK_MODES}")
    s = egm_init(p)
    best_c, best_val, best_lb, best_u = None, math.inf, -math.inf, None
    clamped = False
    r = p.q1_radius
    rows = []
    limit = stop.max_iters if stop.cap is None else min(stop.max_iters, stop.cap)
    while True:
        _check(p, s, check)
        if callback is not None:
            callback(s)
        if r is not None and not clamped:
            clamped = float(np.linalg.norm(s.Atu)) > 2.0 * p.eta * r * (1 + 1e-12)
        # candidates: the averaged iterate and the dual's own primal point
        val = p.target_value(s.c, s.Ac)
        if val < best_val:
            best_val, best_c = val, s.c
        c_hat = p.c_of(s.Atu)
        val = p.target_value(c_hat, p.apply_A(c_hat))
        if val < best_val:
            best_val, best_c = val, c_hat
        lb_k = p.target_lower_bound(s.u, s.Atu, s.D)
        if lb_k > best_lb:
            best_lb, best_u = lb_k, s.u
        cert = best_val - best_lb
        if trace and (s.k % trace_every == 0 or s.k == 1):
            rows.append((s.k, s.J, s.D, s.gap, s.mu, cert))
        measure = cert if stop.certificate == "best" else s.gap
        lb = best_lb if stop.certificate == "best" else s.D
        done = measure <= stop.threshold(lb)
        if done or s.k >= limit:
            break
        s = egm_step(p, s)
    if trace and rows and rows[-1][0] != s.k:
        rows.append((s.k, s.J, s.D, s.gap, s.mu, cert))
    if stop.certificate == "iterate":
        best_c = s.c
        best_val = p.target_value(s.c, p.apply_A(s.c))
    log.debug("stopped at k=%d cert=%.3g converged=%s", s.k, cert, done)
    return RunResult(
        state=s, center=np.array(best_c), value=best_val, lower_bound=best_lb,
        cert_gap=cert, converged=bool(done), best_u=best_u, clamp_engaged=clamped,
        trace=rows,
    )


def with_L(p: SaddleProblem, L: float) -> SaddleProblem:
    """Shallow copy of a problem with a different Lipschitz constant."""
    q = object.__new__(type(p))
    q.__dict__.update(p.__dict__)
    q.L = float(L)
    return q


__all__ = [
    "CHECK_MODES", "DenseSaddleProblem", "EgmState", "RunResult", "SaddleProblem",
    "StoppingRule", "adjoint_error", "egm_init", "egm_step", "gap_bound",
    "gap_tolerance", "iteration_cap", "map_V", "map_c", "map_u_mu", "mu_closed_form",
    "prox_center", "prox_diameter", "run", "smoothed_objective",
    "tangent_lipschitz", "with_L",
]

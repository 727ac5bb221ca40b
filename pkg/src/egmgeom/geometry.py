"""Value types shared by the solvers.

All arrays are float64 and are made read-only on construction so the
records can be shared freely between threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientPointsError, InvalidInputError

SIMPLEX_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PointSet:
    """n points in R^d, stored as an (n, d) array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if pts.size else pts.reshape(0, 1)
        if pts.ndim != 2:
            raise InvalidInputError("points must be an (n, d) array")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidInputError("need n >= 1 points of dimension d >= 1")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("point coordinates must be finite")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def scaled(self, alpha: float) -> "PointSet":
        return PointSet(self.points * alpha)

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class SimplexVector:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).ravel()
        if w.size < 1 or not np.all(np.isfinite(w)):
            raise InvalidInputError("simplex weights must be finite and nonempty")
        if np.any(w < -SIMPLEX_TOL) or np.any(w > 1 + SIMPLEX_TOL):
            raise InvalidInputError("simplex weights must lie in [0, 1]")
        w = np.clip(w, 0.0, 1.0)
        if abs(w.sum() - 1.0) > SIMPLEX_TOL:
            raise InvalidInputError(f"simplex weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def N(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, N: int) -> "SimplexVector":
        if N < 1:
            raise InvalidInputError("simplex dimension must be >= 1")
        return cls(np.full(N, 1.0 / N))


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius_sq: float
    radius: float = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(np.ravel(self.center)))
        r2 = float(self.radius_sq)
        if not r2 >= 0.0:
            raise InvalidInputError("radius_sq must be nonnegative")
        object.__setattr__(self, "radius_sq", r2)
        if self.radius is None:
            object.__setattr__(self, "radius", float(np.sqrt(r2)))

    def contains(self, ps: PointSet, tol: float = 1e-9) -> bool:
        dist = np.sqrt(((ps.points - self.center) ** 2).sum(axis=1)).max()
        return bool(dist <= self.radius + tol)


@dataclass(frozen=True)
class PolytopeShape:
    """Fixed polytope {x : <w_i, x - c> <= R t_i for all i}.

    ``scaled_normals`` holds w_i / t_i and ``W`` bounds their norms.
    """

    normals: np.ndarray
    offsets: np.ndarray
    scaled_normals: np.ndarray = field(init=False)
    W: float = field(init=False)

    def __post_init__(self):
        w = np.array(self.normals, dtype=np.float64)
        if w.ndim == 1:
            w = w.reshape(1, -1)
        t = np.array(self.offsets, dtype=np.float64).ravel()
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise InvalidInputError("normals must be an (m, d) array with m >= 1")
        if t.size != w.shape[0]:
            raise InvalidInputError("need one offset per face")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(t))):
            raise InvalidInputError("shape data must be finite")
        if np.any(t <= 0):
            raise InvalidInputError("face offsets t_i must be positive")
        scaled = w / t[:, None]
        object.__setattr__(self, "normals", _frozen(w))
        object.__setattr__(self, "offsets", _frozen(t))
        object.__setattr__(self, "scaled_normals", _frozen(scaled))
        object.__setattr__(
            self, "W", float(np.sqrt((scaled**2).sum(axis=1)).max())
        )

    @property
    def m(self) -> int:
        return self.normals.shape[0]

    @property
    def d(self) -> int:
        return self.normals.shape[1]

    @classmethod
    def hypercube(cls, d: int, half_width: float = 1.0) -> "PolytopeShape":
        eye = np.eye(d)
        return cls(np.vstack([eye, -eye]), np.full(2 * d, half_width))


@dataclass(frozen=True)
class PolytopeFit:
    center: np.ndarray
    magnification: float

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(np.ravel(self.center)))
        object.__setattr__(self, "magnification", float(self.magnification))

    def encloses(self, shape: PolytopeShape, ps: PointSet, tol: float = 1e-9) -> bool:
        rel = ps.points - self.center
        return bool((shape.scaled_normals @ rel.T).max() <= self.magnification + tol)


@dataclass(frozen=True)
class LabeledDataset:
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        z = PointSet(self.points).points
        y = np.array(self.labels, dtype=np.float64).ravel()
        if y.size != z.shape[0]:
            raise InvalidInputError("one label per point required")
        if not np.all((y == 1.0) | (y == -1.0)):
            raise InvalidInputError("labels must be +1 or -1")
        object.__setattr__(self, "points", z)
        object.__setattr__(self, "labels", _frozen(y))

    @property
    def m(self) -> int:
        return self.points.shape[0]

    def signed_points(self) -> np.ndarray:
        """Rows y_i * z_i."""
        return self.labels[:, None] * self.points


def _max_row_norm(x: np.ndarray) -> float:
    # rescale first so tiny or huge coordinates do not under/overflow when squared
    s = float(np.abs(x).max())
    if s == 0.0:
        return 0.0
    return s * float(np.sqrt(((x / s) ** 2).sum(axis=1)).max())


def data_radius(ps: PointSet) -> float:
    """Largest point norm, max_i ||x_i||."""
    return _max_row_norm(ps.points)


def farthest_pair(ps: PointSet) -> tuple[int, int]:
    """Two-pass farthest-point heuristic: from x_0 to x_a, then from x_a to x_b."""
    x = ps.points
    s = float(np.abs(x).max())
    if s > 0.0:
        x = x / s
    a = int(np.argmax(((x - x[0]) ** 2).sum(axis=1)))
    b = int(np.argmax(((x - x[a]) ** 2).sum(axis=1)))
    return a, b


def pair_lower_bound(ps: PointSet) -> float:
    """Half the distance of a far-apart pair; never exceeds the optimal MEB radius."""
    if ps.n < 2:
        raise InsufficientPointsError("pair_lower_bound needs at least two points")
    a, b = farthest_pair(ps)
    return 0.5 * _max_row_norm((ps.points[a] - ps.points[b])[None, :])

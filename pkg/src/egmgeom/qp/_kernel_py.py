"""Pure numpy implementation of the root-finding kernel.

Used when the compiled extension is unavailable or disabled; the compiled
module follows this code line for line.
"""
import numpy as np

_SMALL = 16


def _select_inplace(a: np.ndarray, k: int, rng: np.random.Generator) -> float:
    while True:
        n = a.size
        if n <= _SMALL:
            return float(np.sort(a)[k])
        pivot = a[rng.integers(n)]
        below = a[a < pivot]
        if k < below.size:
            a = below
            continue
        n_eq = int(np.count_nonzero(a == pivot))
        if k < below.size + n_eq:
            return float(pivot)
        k -= below.size + n_eq
        a = a[a > pivot]


def select(values, k: int, seed: int = 0) -> float:
    """k-th smallest (0-based) element; randomized quickselect, expected O(n)."""
    a = np.asarray(values, dtype=np.float64).ravel()
    if a.size == 0 or not 0 <= k < a.size:
        raise ValueError("rank out of range")
    return _select_inplace(a, int(k), np.random.default_rng(seed))


def root_find(lp, up, dbar2, zp: float, seed: int = 0):
    lp = np.asarray(lp, dtype=np.float64)
    up = np.asarray(up, dtype=np.float64)
    dbar2 = np.asarray(dbar2, dtype=np.float64)
    if not (lp.shape == up.shape == dbar2.shape) or lp.size == 0:
        raise ValueError("inconsistent array lengths")
    rng = np.random.default_rng(seed)
    ka = dbar2 * lp
    kb = dbar2 * up
    live = np.arange(lp.size)
    lo, hi = -np.inf, np.inf
    off = 0.0
    slope = 0.0
    loops = 0
    while True:
        a, b = ka[live], kb[live]
        S = np.concatenate([a[(a > lo) & (a < hi)], b[(b > lo) & (b < hi)]])
        if S.size == 0:
            break
        m = _select_inplace(S, (S.size - 1) // 2, rng)
        fm = off + slope * m - zp + np.clip(m / dbar2[live], lp[live], up[live]).sum()
        loops += 1
        if fm >= 0.0:
            hi = m
        else:
            lo = m
        high = b <= lo
        low = ~high & (a >= hi)
        lin = ~high & ~low & (a <= lo) & (b >= hi)
        off += up[live[high]].sum() + lp[live[low]].sum()
        slope += (1.0 / dbar2[live[lin]]).sum()
        live = live[~(high | low | lin)]

    if slope > 0.0:
        lam = min(max((zp - off) / slope, lo), hi)
    elif np.isfinite(lo) and np.isfinite(hi):
        lam = 0.5 * (lo + hi)
    elif np.isfinite(hi):
        lam = hi
    else:
        lam = lo
    return float(lam), loops, float(lo), float(hi), float(off), float(slope)

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled root finding for the diagonal QP with one equality constraint.

Mirrors ``_kernel_py`` exactly; the pure-Python module is the reference.
"""
from libc.math cimport INFINITY, fabs
from libc.stdint cimport uint64_t
from libc.stdlib cimport free, malloc

cdef inline uint64_t _splitmix(uint64_t* s) noexcept nogil:
    s[0] += <uint64_t>0x9E3779B97F4A7C15
    cdef uint64_t z = s[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef double _select(double* a, Py_ssize_t n, Py_ssize_t k, uint64_t* state) noexcept nogil:
    # randomized quickselect with a Hoare-style partition (Wirth's variant);
    # scanning stops on keys equal to the pivot, so duplicates stay balanced
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j
    cdef double pivot, tmp
    while lo < hi:
        pivot = a[lo + <Py_ssize_t>(_splitmix(state) % <uint64_t>(hi - lo + 1))]
        i = lo
        j = hi
        while True:
            while a[i] < pivot:
                i += 1
            while pivot < a[j]:
                j -= 1
            if i <= j:
                tmp = a[i]; a[i] = a[j]; a[j] = tmp
                i += 1
                j -= 1
            if i > j:
                break
        if j < k:
            lo = i
        if k < i:
            hi = j
    return a[k]


def select(const double[::1] values, Py_ssize_t k, uint64_t seed=0):
    """k-th smallest (0-based) element of ``values``."""
    cdef Py_ssize_t n = values.shape[0], i
    if n == 0 or k < 0 or k >= n:
        raise ValueError("rank out of range")
    cdef double* buf = <double*>malloc(n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef uint64_t state = seed
    cdef double out
    try:
        for i in range(n):
            buf[i] = values[i]
        with nogil:
            out = _select(buf, n, k, &state)
    finally:
        free(buf)
    return out


def root_find(const double[::1] lp, const double[::1] up, const double[::1] dbar2,
              double zp, uint64_t seed=0):
    """Root of f(lam) = sum_i clip(lam / dbar2_i, lp_i, up_i) - zp.

    Returns ``(lam, loops, lo, hi, offset, slope)`` where [lo, hi] is the
    final kink-free bracket and f(lam) = offset + slope * lam - zp on it.
    """
    cdef Py_ssize_t n = lp.shape[0]
    if up.shape[0] != n or dbar2.shape[0] != n or n == 0:
        raise ValueError("inconsistent array lengths")
    cdef double* ka = <double*>malloc(n * sizeof(double))
    cdef double* kb = <double*>malloc(n * sizeof(double))
    cdef double* S = <double*>malloc(2 * n * sizeof(double))
    cdef Py_ssize_t* live = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    if ka == NULL or kb == NULL or S == NULL or live == NULL:
        free(ka); free(kb); free(S); free(live)
        raise MemoryError()

    cdef uint64_t state = seed
    cdef Py_ssize_t i, j, t, nlive = n, ns, nkeep, loops = 0
    cdef double lo = -INFINITY, hi = INFINITY, off = 0.0, slope = 0.0
    cdef double m, fm, a, b, lam, x
    try:
        with nogil:
            for i in range(n):
                ka[i] = dbar2[i] * lp[i]
                kb[i] = dbar2[i] * up[i]
                live[i] = i
            while True:
                ns = 0
                for t in range(nlive):
                    i = live[t]
                    if ka[i] > lo and ka[i] < hi:
                        S[ns] = ka[i]; ns += 1
                    if kb[i] > lo and kb[i] < hi:
                        S[ns] = kb[i]; ns += 1
                if ns == 0:
                    break
                m = _select(S, ns, (ns - 1) // 2, &state)
                # aggregated offset/slope covers the settled items
                fm = off + slope * m - zp
                for t in range(nlive):
                    i = live[t]
                    x = m / dbar2[i]
                    if x < lp[i]:
                        x = lp[i]
                    elif x > up[i]:
                        x = up[i]
                    fm += x
                loops += 1
                if fm >= 0.0:
                    hi = m
                else:
                    lo = m
                nkeep = 0
                for t in range(nlive):
                    i = live[t]
                    a = ka[i]
                    b = kb[i]
                    if b <= lo:
                        off += up[i]
                    elif a >= hi:
                        off += lp[i]
                    elif a <= lo and b >= hi:
                        slope += 1.0 / dbar2[i]
                    else:
                        live[nkeep] = i
                        nkeep += 1
                nlive = nkeep
    finally:
        free(ka); free(kb); free(S); free(live)

    if slope > 0.0:
        lam = (zp - off) / slope
        if lam < lo:
            lam = lo
        elif lam > hi:
            lam = hi
    elif lo > -INFINITY and hi < INFINITY:
        lam = 0.5 * (lo + hi)
    elif hi < INFINITY:
        lam = hi
    else:
        lam = lo
    return lam, loops, lo, hi, off, slope

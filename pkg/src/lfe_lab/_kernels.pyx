# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: counter-based normals, path propagation, Bessel sums.

Semantics match :mod:`lfe_lab._pykernels` exactly; see that module for the
stream layout.
"""

import numpy as np

from cython.parallel cimport parallel, prange
from libc.math cimport cos, exp, fabs, log, sin, sqrt
from libc.stdint cimport uint64_t
from libc.stdlib cimport free, malloc

cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.1102230246251565e-16
cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t SEED_SALT = 0x6A09E667F3BCC909ULL


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _stream_key(uint64_t seed, uint64_t path) noexcept nogil:
    return _mix(_mix(seed ^ SEED_SALT) + (path + 1) * GOLDEN)


cdef inline uint64_t _draw(uint64_t key, uint64_t counter) noexcept nogil:
    return _mix(key ^ _mix((counter + 1) * GOLDEN))


cdef inline void _normals(uint64_t key, uint64_t step, Py_ssize_t dim, double* out) noexcept nogil:
    cdef Py_ssize_t pairs = (dim + 1) // 2
    cdef uint64_t base = 2 * step * <uint64_t>pairs
    cdef Py_ssize_t m
    cdef double u1, u2, r
    for m in range(pairs):
        u1 = <double>((_draw(key, base + 2 * m) >> 11) + 1) * INV_2_53
        u2 = <double>(_draw(key, base + 2 * m + 1) >> 11) * INV_2_53
        r = sqrt(-2.0 * log(u1))
        out[2 * m] = r * cos(TWO_PI * u2)
        if 2 * m + 1 < dim:
            out[2 * m + 1] = r * sin(TWO_PI * u2)


def stream_keys(uint64_t seed, const long long[::1] paths):
    out = np.empty(paths.shape[0], dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    for i in range(paths.shape[0]):
        o[i] = _stream_key(seed, <uint64_t>paths[i])
    return out


def counter_normals(uint64_t seed, const long long[::1] paths, long long step, Py_ssize_t dim):
    out = np.empty((paths.shape[0], dim))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i
    for i in range(paths.shape[0]):
        _normals(_stream_key(seed, <uint64_t>paths[i]), <uint64_t>step, dim, &o[i, 0])
    return out


def propagate_dense(
    const double[:, :, ::1] M,
    const double[:, :, ::1] S,
    const double[:, ::1] C0,
    uint64_t seed,
    Py_ssize_t paths,
    Py_ssize_t path_offset,
    Py_ssize_t n_steps,
    const long long[::1] snaps,
):
    cdef Py_ssize_t dim = C0.shape[0]
    cdef Py_ssize_t n_snap = snaps.shape[0]
    cdef Py_ssize_t km = M.shape[0], ks = S.shape[0]
    out = np.empty((n_snap, paths, dim))
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t p, k, i, j, s, mi, si
    cdef double acc
    cdef double* x
    cdef double* y
    cdef double* xi
    cdef double* tmp
    cdef uint64_t key
    with nogil, parallel():
        x = <double*>malloc(3 * dim * sizeof(double))
        y = x + dim
        xi = x + 2 * dim
        for p in prange(paths, schedule="static"):
            key = _stream_key(seed, <uint64_t>(path_offset + p))
            _normals(key, 0, dim, xi)
            for i in range(dim):
                acc = 0.0
                for j in range(dim):
                    acc = acc + C0[i, j] * xi[j]
                x[i] = acc
            s = 0
            if s < n_snap and snaps[s] == 0:
                for i in range(dim):
                    o[s, p, i] = x[i]
                s = s + 1
            for k in range(1, n_steps + 1):
                _normals(key, <uint64_t>k, dim, xi)
                mi = (k - 1) if km > 1 else 0
                si = (k - 1) if ks > 1 else 0
                for i in range(dim):
                    acc = 0.0
                    for j in range(dim):
                        acc = acc + M[mi, i, j] * x[j] + S[si, i, j] * xi[j]
                    y[i] = acc
                for i in range(dim):
                    x[i] = y[i]
                if s < n_snap and snaps[s] == k:
                    for i in range(dim):
                        o[s, p, i] = x[i]
                    s = s + 1
        free(x)
    return out


def propagate_cycle(
    double c_self,
    double c_nb,
    double noise,
    double init_scale,
    Py_ssize_t n,
    uint64_t seed,
    Py_ssize_t paths,
    Py_ssize_t path_offset,
    Py_ssize_t n_steps,
    const long long[::1] snaps,
):
    cdef Py_ssize_t n_snap = snaps.shape[0]
    out = np.empty((n_snap, paths, n))
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t p, k, i, s
    cdef double* x
    cdef double* y
    cdef double* xi
    cdef uint64_t key
    with nogil, parallel():
        x = <double*>malloc(3 * n * sizeof(double))
        y = x + n
        xi = x + 2 * n
        for p in prange(paths, schedule="static"):
            key = _stream_key(seed, <uint64_t>(path_offset + p))
            _normals(key, 0, n, xi)
            for i in range(n):
                x[i] = init_scale * xi[i]
            s = 0
            if s < n_snap and snaps[s] == 0:
                for i in range(n):
                    o[s, p, i] = x[i]
                s = s + 1
            for k in range(1, n_steps + 1):
                _normals(key, <uint64_t>k, n, xi)
                y[0] = c_self * x[0] + c_nb * (x[n - 1] + x[1]) + noise * xi[0]
                for i in range(1, n - 1):
                    y[i] = c_self * x[i] + c_nb * (x[i - 1] + x[i + 1]) + noise * xi[i]
                y[n - 1] = c_self * x[n - 1] + c_nb * (x[n - 2] + x[0]) + noise * xi[n - 1]
                for i in range(n):
                    x[i] = y[i]
                if s < n_snap and snaps[s] == k:
                    for i in range(n):
                        o[s, p, i] = x[i]
                    s = s + 1
        free(x)
    return out


def bessel_ie012_series(double y):
    """exp(-y) * (I_0, I_1, I_2)(y) by the power series."""
    cdef double h = 0.5 * y
    cdef double h2 = h * h
    cdef double out[3]
    cdef double t, total
    cdef int r, m
    cdef double lead = 1.0
    for r in range(3):
        t = lead
        total = t
        m = 0
        while True:
            t = t * h2 / ((m + 1.0) * (m + 1.0 + r))
            total = total + t
            m = m + 1
            if t <= 1e-17 * total or m > 500:
                break
        out[r] = total * exp(-y)
        lead = lead * h / (r + 1.0)
    return out[0], out[1], out[2]


cdef inline void _ie_integrand(double y, double x, double* f) noexcept nogil:
    cdef double c = cos(3.141592653589793 * x)
    cdef double e = exp(y * (c - 1.0))
    f[0] = e
    f[1] = c * e
    f[2] = (2.0 * c * c - 1.0) * e


cdef int _simpson3(
    double y, double a, double b, double* fa, double* fm, double* fb,
    double* whole, double tol, int depth, double* result,
) noexcept nogil:
    cdef double m = 0.5 * (a + b)
    cdef double lm = 0.5 * (a + m), rm = 0.5 * (m + b)
    cdef double flm[3]
    cdef double frm[3]
    cdef double left[3]
    cdef double right[3]
    cdef double h = b - a
    cdef double err = 0.0, d
    cdef int r, bad = 0
    _ie_integrand(y, lm, flm)
    _ie_integrand(y, rm, frm)
    for r in range(3):
        left[r] = h / 12.0 * (fa[r] + 4.0 * flm[r] + fm[r])
        right[r] = h / 12.0 * (fm[r] + 4.0 * frm[r] + fb[r])
        d = fabs(left[r] + right[r] - whole[r])
        if d > err:
            err = d
    if depth <= 0 or err <= 15.0 * tol:
        for r in range(3):
            result[r] = result[r] + left[r] + right[r] + (left[r] + right[r] - whole[r]) / 15.0
        return 1 if (depth <= 0 and err > 15.0 * tol) else 0
    bad = _simpson3(y, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, result)
    bad = bad + _simpson3(y, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, result)
    return bad


def bessel_ie012_quad(double y, double tol=1e-14):
    """exp(-y) * (I_0, I_1, I_2)(y) by adaptive Simpson on the cosine integral."""
    cdef double fa[3]
    cdef double fm[3]
    cdef double fb[3]
    cdef double whole[3]
    cdef double result[3]
    cdef int r, bad
    _ie_integrand(y, 0.0, fa)
    _ie_integrand(y, 0.5, fm)
    _ie_integrand(y, 1.0, fb)
    for r in range(3):
        whole[r] = (fa[r] + 4.0 * fm[r] + fb[r]) / 6.0
        result[r] = 0.0
    bad = _simpson3(y, 0.0, 1.0, fa, fm, fb, whole, tol, 50, result)
    return result[0], result[1], result[2]

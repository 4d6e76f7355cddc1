"""Pure numpy implementation of the hot loops.

Random stream layout (shared with the compiled backend):

* each path owns a 64-bit key ``mix(mix(seed ^ SALT) + (path + 1) * GOLDEN)``;
* draw number ``c`` of that path is ``mix(key ^ mix((c + 1) * GOLDEN))``,
  where ``mix`` is the SplitMix64 finalizer, so any draw is addressable
  without generating its predecessors;
* step ``k`` (``k = 0`` is the initial condition) consumes draws
  ``2 k P .. 2 k P + 2 P - 1`` with ``P = ceil(dim / 2)``; each consecutive
  pair feeds one Box-Muller transform.
"""

from __future__ import annotations

import math

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
SEED_SALT = np.uint64(0x6A09E667F3BCC909)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_INV_2_53 = 2.0**-53
_TWO_PI = 6.283185307179586
_CHUNK = 1 << 16


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def stream_keys(seed: int, paths: np.ndarray) -> np.ndarray:
    base = _mix(np.array([seed], dtype=np.uint64) ^ SEED_SALT)
    p = np.asarray(paths, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(base + (p + np.uint64(1)) * GOLDEN)


def _normals_from_keys(keys: np.ndarray, step: int, dim: int) -> np.ndarray:
    pairs = (dim + 1) // 2
    out = np.empty((keys.shape[0], 2 * pairs))
    base = 2 * step * pairs
    ctr = np.arange(base, base + 2 * pairs, dtype=np.uint64)
    h = _mix((ctr + np.uint64(1)) * GOLDEN)
    for m in range(pairs):
        x1 = _mix(keys ^ h[2 * m])
        x2 = _mix(keys ^ h[2 * m + 1])
        u1 = ((x1 >> _S11) + np.uint64(1)).astype(np.float64) * _INV_2_53
        u2 = (x2 >> _S11).astype(np.float64) * _INV_2_53
        r = np.sqrt(-2.0 * np.log(u1))
        ang = _TWO_PI * u2
        out[:, 2 * m] = r * np.cos(ang)
        out[:, 2 * m + 1] = r * np.sin(ang)
    return out[:, :dim]


def counter_normals(seed: int, paths: np.ndarray, step: int, dim: int) -> np.ndarray:
    return _normals_from_keys(stream_keys(seed, paths), step, dim)


def _run_chunked(seed, paths, path_offset, n_snap, dim, body):
    out = np.empty((n_snap, paths, dim))
    for lo in range(0, paths, _CHUNK):
        hi = min(paths, lo + _CHUNK)
        keys = stream_keys(seed, np.arange(path_offset + lo, path_offset + hi))
        out[:, lo:hi, :] = body(keys)
    return out


def propagate_dense(M, S, C0, seed, paths, path_offset, n_steps, snaps):
    M = np.asarray(M, dtype=float)
    S = np.asarray(S, dtype=float)
    C0 = np.asarray(C0, dtype=float)
    snaps = np.asarray(snaps, dtype=np.int64)
    dim = C0.shape[0]

    def body(keys):
        res = np.empty((snaps.size, keys.size, dim))
        x = _normals_from_keys(keys, 0, dim) @ C0.T
        s = 0
        if s < snaps.size and snaps[s] == 0:
            res[s] = x
            s += 1
        for k in range(1, n_steps + 1):
            xi = _normals_from_keys(keys, k, dim)
            mk = M[k - 1] if M.shape[0] > 1 else M[0]
            sk = S[k - 1] if S.shape[0] > 1 else S[0]
            x = x @ mk.T + xi @ sk.T
            if s < snaps.size and snaps[s] == k:
                res[s] = x
                s += 1
        return res

    return _run_chunked(seed, paths, path_offset, snaps.size, dim, body)


def propagate_cycle(c_self, c_nb, noise, init_scale, n, seed, paths, path_offset, n_steps, snaps):
    snaps = np.asarray(snaps, dtype=np.int64)

    def body(keys):
        res = np.empty((snaps.size, keys.size, n))
        x = init_scale * _normals_from_keys(keys, 0, n)
        s = 0
        if s < snaps.size and snaps[s] == 0:
            res[s] = x
            s += 1
        for k in range(1, n_steps + 1):
            xi = _normals_from_keys(keys, k, n)
            x = c_self * x + c_nb * (np.roll(x, 1, axis=1) + np.roll(x, -1, axis=1)) + noise * xi
            if s < snaps.size and snaps[s] == k:
                res[s] = x
                s += 1
        return res

    return _run_chunked(seed, paths, path_offset, snaps.size, n, body)


def bessel_ie012_series(y: float) -> tuple[float, float, float]:
    """``exp(-y) * (I_0, I_1, I_2)(y)`` by the power series."""
    h = 0.5 * y
    h2 = h * h
    out = []
    lead = 1.0
    for r in range(3):
        t = lead
        total = t
        m = 0
        while True:
            t = t * h2 / ((m + 1.0) * (m + 1.0 + r))
            total += t
            m += 1
            if t <= 1e-17 * total or m > 500:
                break
        out.append(total * math.exp(-y))
        lead = lead * h / (r + 1.0)
    return out[0], out[1], out[2]


def _ie_integrand(y, x):
    c = math.cos(math.pi * x)
    e = math.exp(y * (c - 1.0))
    return (e, c * e, (2.0 * c * c - 1.0) * e)


def bessel_ie012_quad(y: float, tol: float = 1e-14) -> tuple[float, float, float]:
    """``exp(-y) * (I_0, I_1, I_2)(y)`` by adaptive Simpson on the cosine integral."""
    result = [0.0, 0.0, 0.0]

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        flm = _ie_integrand(y, 0.5 * (a + m))
        frm = _ie_integrand(y, 0.5 * (m + b))
        h = b - a
        left = [h / 12.0 * (fa[r] + 4.0 * flm[r] + fm[r]) for r in range(3)]
        right = [h / 12.0 * (fm[r] + 4.0 * frm[r] + fb[r]) for r in range(3)]
        err = max(abs(left[r] + right[r] - whole[r]) for r in range(3))
        if depth <= 0 or err <= 15.0 * tol:
            for r in range(3):
                result[r] += left[r] + right[r] + (left[r] + right[r] - whole[r]) / 15.0
            return
        rec(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        rec(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)

    fa, fm, fb = _ie_integrand(y, 0.0), _ie_integrand(y, 0.5), _ie_integrand(y, 1.0)
    rec(0.0, 1.0, fa, fm, fb, [(fa[r] + 4.0 * fm[r] + fb[r]) / 6.0 for r in range(3)], tol, 50)
    return result[0], result[1], result[2]

"""Exact covariances of the Gaussian local-field equation on the 2-regular tree.

Covers modified Bessel functions of the first kind, the time-marginal
covariance of the GLFE started from ``N(0, var0 I)``, its stationary law, the
spectral covariance of the finite n-cycle OU system and an explicit
exponential tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from . import kernels
from .errors import DomainError, NoStationaryLawError, OutOfRangeError
from .symcov import SymCov

__all__ = [
    "T_INF",
    "GlfeParams",
    "CycleCov",
    "bessel_i",
    "glfe_cov",
    "glfe_cov_grid",
    "stationary_pi",
    "cycle_eigenvalues",
    "cycle_phi",
    "cycle_cov_entry",
    "cycle_cov_matrix",
    "glfe_tail_bound",
    "glfe_deviation",
]

SERIES_CUTOFF = 15.0
TIME_TOL = 1e-12
_MAX_PANEL = 0.5


class _Stationary:
    """Marker for the ``t = infinity`` (stationary) covariance."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "T_INF"

    def __reduce__(self):
        return (_Stationary, ())


T_INF = _Stationary()
TimeLike = Union[float, _Stationary]


@dataclass(frozen=True)
class GlfeParams:
    """Interaction coefficients and initial variance.

    Attributes
    ----------
    alpha, beta : float
        Self and neighbour coefficients of the linear drift.
    var0 : float
        Variance of each coordinate at time zero.
    """

    alpha: float
    beta: float
    var0: float = 1.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.alpha, self.beta, self.var0)):
            raise DomainError("alpha, beta and var0 must be finite")
        if self.var0 <= 0.0:
            raise DomainError(f"var0 must be positive, got {self.var0}")

    @property
    def has_stationary_law(self) -> bool:
        return self.alpha > abs(self.beta)


def _require_stationary(alpha: float, beta: float) -> None:
    if not alpha > abs(beta):
        raise NoStationaryLawError(f"need alpha > |beta|, got alpha={alpha}, beta={beta}")


def _ie012(y: float) -> tuple[float, float, float]:
    # exp(-y) * (I_0, I_1, I_2)(y)
    if y <= SERIES_CUTOFF:
        return kernels.bessel_ie012_series(y)
    return kernels.bessel_ie012_quad(y)


def bessel_i(r: int, y: float, method: str = "auto") -> float:
    """Modified Bessel function ``I_r(y) = int_0^1 cos(r pi x) exp(y cos(pi x)) dx``.

    Parameters
    ----------
    r : {0, 1, 2}
        Order.
    y : float
        Non-negative argument.
    method : {"auto", "series", "quadrature"}
        ``auto`` uses the power series up to ``y = 15`` and adaptive
        Simpson quadrature beyond.

    Returns
    -------
    float
    """
    if r not in (0, 1, 2):
        raise DomainError(f"order must be 0, 1 or 2, got {r}")
    if not y >= 0.0:
        raise DomainError(f"argument must be non-negative, got {y}")
    if method == "auto":
        vals = _ie012(y)
    elif method == "series":
        vals = kernels.bessel_ie012_series(y)
    elif method == "quadrature":
        vals = kernels.bessel_ie012_quad(y)
    else:
        raise DomainError(f"unknown method {method!r}")
    return vals[r] * math.exp(y)


Vec3 = tuple[float, float, float]


def _simpson3(f: Callable[[float], Vec3], a: float, b: float, tol: float, depth: int = 40) -> Vec3:
    """Adaptive Simpson with Richardson correction for a 3-vector integrand."""
    out = [0.0, 0.0, 0.0]

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        flm = f(0.5 * (a + m))
        frm = f(0.5 * (m + b))
        h = b - a
        left = [h / 12.0 * (fa[r] + 4.0 * flm[r] + fm[r]) for r in range(3)]
        right = [h / 12.0 * (fm[r] + 4.0 * frm[r] + fb[r]) for r in range(3)]
        err = max(abs(left[r] + right[r] - whole[r]) for r in range(3))
        if depth <= 0 or err <= 15.0 * tol:
            for r in range(3):
                out[r] += left[r] + right[r] + (left[r] + right[r] - whole[r]) / 15.0
            return
        rec(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        rec(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    rec(a, b, fa, fm, fb, [(b - a) / 6.0 * (fa[r] + 4.0 * fm[r] + fb[r]) for r in range(3)], tol, depth)
    return out[0], out[1], out[2]


def _time_integrand(p: GlfeParams) -> Callable[[float], Vec3]:
    k = abs(p.beta)
    decay = 2.0 * (p.alpha - k)

    def f(s: float) -> Vec3:
        i0, i1, i2 = _ie012(2.0 * k * s)
        w = 2.0 * math.exp(-decay * s)
        return (w * i0, w * i1, w * i2)

    return f


def _integral_pieces(p: GlfeParams, times: np.ndarray) -> np.ndarray:
    # cumulative 2 int_0^t exp(-2 alpha s) I_r(2 |beta| s) ds at each sorted time
    f = _time_integrand(p)
    acc = [[0.0], [0.0], [0.0]]
    out = np.zeros((times.size, 3))
    prev = 0.0
    total_span = max(float(times[-1]), 1.0) if times.size else 1.0
    for i, t in enumerate(times):
        if t > prev:
            panels = max(1, math.ceil((t - prev) / _MAX_PANEL))
            edges = np.linspace(prev, t, panels + 1)
            for lo, hi in zip(edges[:-1], edges[1:]):
                piece = _simpson3(f, float(lo), float(hi), TIME_TOL * (hi - lo) / total_span)
                for r in range(3):
                    acc[r].append(piece[r])
            prev = float(t)
        out[i] = [math.fsum(acc[r]) for r in range(3)]
    return out


def _assemble(p: GlfeParams, t: float, integral: Sequence[float]) -> SymCov:
    k = abs(p.beta)
    sgn = -1.0 if p.beta > 0 else 1.0
    ie = _ie012(2.0 * k * t)
    head = p.var0 * math.exp(-2.0 * (p.alpha - k) * t)
    vals = [float(sgn**r * (head * ie[r] + integral[r])) + 0.0 for r in range(3)]
    return SymCov(2, vals[0], vals[1], vals[2])


def glfe_cov(p: GlfeParams, t: float) -> SymCov:
    """Covariance ``(sigma_0, sigma_1, sigma_2)`` of the GLFE at time ``t``.

    ``sigma_r(t) = (-sign beta)^r [var0 e^{-2 alpha t} I_r(2 t |beta|)
    + 2 int_0^t e^{-2 alpha s} I_r(2 s |beta|) ds]``.
    """
    if not t >= 0.0 or not math.isfinite(t):
        raise DomainError(f"t must be finite and non-negative, got {t}")
    ints = _integral_pieces(p, np.array([float(t)]))[0]
    return _assemble(p, float(t), ints)


def glfe_cov_grid(p: GlfeParams, times: Sequence[float]) -> np.ndarray:
    """GLFE covariances on a non-decreasing grid; rows are ``(sigma0, sigma1, sigma2)``.

    The time integral is accumulated panel by panel so the cost is that of a
    single evaluation at the last time.
    """
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise DomainError("times must be a non-empty 1-d sequence")
    if np.any(ts < 0) or np.any(np.diff(ts) < 0) or not np.all(np.isfinite(ts)):
        raise DomainError("times must be finite, non-negative and non-decreasing")
    ints = _integral_pieces(p, ts)
    return np.array([_assemble(p, float(t), ints[i]).triple() for i, t in enumerate(ts)])


def stationary_pi(alpha: float, beta: float) -> SymCov:
    """Stationary covariance ``sigma_r = (-beta)^r / (delta (alpha + delta)^r)``, ``delta = sqrt(alpha^2 - beta^2)``."""
    _require_stationary(alpha, beta)
    delta = math.sqrt((alpha - beta) * (alpha + beta))
    phi = -beta / (alpha + delta)
    return SymCov(2, 1.0 / delta, phi / delta, phi * phi / delta)


def cycle_eigenvalues(n: int) -> np.ndarray:
    """Adjacency eigenvalues ``2 cos(2 pi l / n)`` of the n-cycle, ``l = 0..n-1``."""
    return 2.0 * np.cos(2.0 * np.pi * np.arange(n) / n)


def cycle_phi(t: TimeLike, lam: float, p: GlfeParams) -> float:
    """Spectral covariance weight ``phi(t, lam)`` for the eigenvalue ``lam``.

    At ``T_INF`` this is ``1 / (alpha + beta lam / 2)``.
    """
    mu = p.alpha + 0.5 * p.beta * lam
    if t is T_INF:
        if mu <= 0.0:
            raise NoStationaryLawError(f"mode with rate {mu} <= 0 has no stationary variance")
        return 1.0 / mu
    x = 2.0 * mu * t
    if mu == 0.0:
        return p.var0 + 2.0 * t
    return p.var0 * math.exp(-x) - math.expm1(-x) / mu


@dataclass(frozen=True)
class CycleCov:
    """Covariance of the n-cycle OU system at time ``t`` (or ``T_INF``).

    Attributes
    ----------
    n : int
        Even cycle length, at least 4.
    t : float or T_INF
    params : GlfeParams
    """

    n: int
    t: TimeLike
    params: GlfeParams

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise DomainError(f"n must be an even integer >= 4, got {self.n}")
        t = self.t
        if isinstance(t, float) and math.isinf(t) and t > 0:
            object.__setattr__(self, "t", T_INF)
        elif t is not T_INF and not (math.isfinite(t) and t >= 0.0):
            raise DomainError(f"t must be non-negative or T_INF, got {t}")

    def weights(self) -> np.ndarray:
        return np.array([cycle_phi(self.t, lam, self.params) for lam in cycle_eigenvalues(self.n)])


def cycle_cov_entry(c: CycleCov, j: int, k: int) -> float:
    """Entry ``(j, k)`` of the n-cycle covariance via its circulant spectrum."""
    n = c.n
    if not (0 <= j < n and 0 <= k < n):
        raise OutOfRangeError(f"vertex indices must lie in [0, {n}), got ({j}, {k})")
    w = c.weights()
    d = (j - k) % n
    ang = 2.0 * math.pi * d / n
    return math.fsum(w[l] * math.cos(ang * l) for l in range(n)) / n


def cycle_cov_matrix(c: CycleCov) -> np.ndarray:
    """Dense ``n x n`` covariance matrix of the cycle system."""
    n = c.n
    row = np.array([cycle_cov_entry(c, d, 0) for d in range(n)])
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return row[idx]


def glfe_tail_bound(p: GlfeParams, t: float) -> float:
    """Bound ``(var0 + 4 / (alpha - |beta|)) exp(-2 (alpha - |beta|) t)`` on ``|sigma_r(t) - sigma_r^pi|``."""
    _require_stationary(p.alpha, p.beta)
    gap = p.alpha - abs(p.beta)
    return (p.var0 + 4.0 / gap) * math.exp(-2.0 * gap * t)


def glfe_deviation(p: GlfeParams, t: float) -> float:
    """``max_r |sigma_r(t) - sigma_r^pi|``."""
    pi = stationary_pi(p.alpha, p.beta).triple()
    return max(abs(x - y) for x, y in zip(glfe_cov(p, t).triple(), pi))

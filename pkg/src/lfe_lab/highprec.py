"""Arbitrary-precision twins of the cycle and GLFE covariances.

The n-cycle Riemann sum approximates the GLFE integral with an error that is
super-exponentially small in ``n`` (the integrand is entire), so comparisons
between consecutive cycle sizes drop below double-precision roundoff already
at moderate ``n``.  These routines evaluate both sides with ``mpmath`` at a
user-chosen number of digits.
"""

from __future__ import annotations

import mpmath as mp

__all__ = ["cycle_cov_mp", "glfe_cov_mp", "cycle_vs_glfe_errors"]


def _phi(t, lam, alpha, beta, var0):
    mu = alpha + beta * lam / 2
    x = 2 * mu * t
    if mu == 0:
        return var0 + 2 * t
    return var0 * mp.exp(-x) - mp.expm1(-x) / mu


def cycle_cov_mp(n: int, t, alpha, beta, var0, r: int, dps: int = 50):
    """Cycle covariance at distance ``r`` and time ``t`` with ``dps`` digits."""
    with mp.workdps(dps):
        t, alpha, beta, var0 = (mp.mpf(v) for v in (t, alpha, beta, var0))
        total = mp.mpf(0)
        for l in range(n):
            th = 2 * mp.pi * l / n
            total += _phi(t, 2 * mp.cos(th), alpha, beta, var0) * mp.cos(r * th)
        return total / n


def glfe_cov_mp(t, alpha, beta, var0, r: int, dps: int = 50):
    """GLFE covariance ``sigma_r(t)`` with ``dps`` digits.

    The time integral is evaluated term by term on the Bessel power series:
    ``int_0^t s^k e^{-2 alpha s} ds = gamma(k + 1, 2 alpha t) / (2 alpha)^(k + 1)``.
    """
    with mp.workdps(dps + 10):
        t, alpha, beta, var0 = (mp.mpf(v) for v in (t, alpha, beta, var0))
        k = abs(beta)
        sgn = -1 if beta > 0 else 1
        head = var0 * mp.exp(-2 * alpha * t) * mp.besseli(r, 2 * k * t)
        if k == 0:
            integral = (1 - mp.exp(-2 * alpha * t)) / alpha if r == 0 else mp.mpf(0)
        else:
            integral = mp.mpf(0)
            eps = mp.mpf(10) ** (-(dps + 5))
            m = 0
            while True:
                p = 2 * m + r
                coef = k**p / (mp.factorial(m) * mp.factorial(m + r))
                term = 2 * coef * mp.gammainc(p + 1, 0, 2 * alpha * t) / (2 * alpha) ** (p + 1)
                integral += term
                m += 1
                if abs(term) < eps * abs(integral) and m > 5:
                    break
        out = sgn**r * (head + integral)
    with mp.workdps(dps):
        return +out


def cycle_vs_glfe_errors(ns, t, alpha, beta, var0, r: int, dps: int = 250):
    """``|cycle_cov_mp(n) - glfe_cov_mp|`` for each ``n`` in ``ns``."""
    with mp.workdps(dps):
        ref = glfe_cov_mp(t, alpha, beta, var0, r, dps)
        return [abs(cycle_cov_mp(n, t, alpha, beta, var0, r, dps) - ref) for n in ns]

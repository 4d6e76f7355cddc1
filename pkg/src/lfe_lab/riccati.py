"""Riccati covariance flow ``dV/dt = 2I - L(V) V - V L(V)*`` on the star family.

Its solution is the time-marginal covariance of the Gaussian Markov
local-field equation.  Integration uses classical RK4 with step-doubling
error control, a positivity check on every accepted step, and a fixed output
grid with cubic Hermite interpolation in between.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError, IntegrationError, OutOfRangeError, SingularCovarianceError
from .symcov import SymCov, _rhs_components, is_strictly_pd, tilde_coeffs

__all__ = [
    "IntegratorConfig",
    "CovTrajectory",
    "integrate",
    "marginal_at",
    "gamma_drift",
    "stationary_residual",
]

_Vec = tuple[float, float, float]


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings.

    Attributes
    ----------
    initial_step : float
        First trial step (and the step size when ``adaptive`` is false).
    atol : float
        Absolute per-component local error tolerance.
    max_halvings : int
        Consecutive step rejections tolerated before giving up.
    grid_spacing : float
        Spacing of the stored output grid.
    adaptive : bool
        Fixed-step RK4 when false (used for order-of-accuracy checks).
    """

    initial_step: float = 1e-3
    atol: float = 1e-10
    max_halvings: int = 40
    grid_spacing: float = 0.01
    adaptive: bool = True

    def __post_init__(self):
        if not (self.initial_step > 0 and self.atol > 0 and self.grid_spacing > 0):
            raise DomainError("step, tolerance and grid spacing must be positive")
        if self.max_halvings < 1:
            raise DomainError("max_halvings must be at least 1")


@dataclass(frozen=True)
class CovTrajectory:
    """Covariance path sampled on an output grid.

    ``values[i]`` holds ``(a, b, c)`` at ``times[i]``; both arrays are
    read-only.
    """

    kappa: int
    alpha: float
    beta: float
    times: np.ndarray
    values: np.ndarray
    steps_accepted: int = 0
    steps_rejected: int = 0
    _slopes: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for arr in (self.times, self.values):
            arr.setflags(write=False)
        slopes = np.array(
            [_rhs_components(self.kappa, *v, self.alpha, self.beta) for v in self.values]
        )
        slopes.setflags(write=False)
        object.__setattr__(self, "_slopes", slopes)

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    @property
    def points(self) -> list[SymCov]:
        return [SymCov(self.kappa, *map(float, v)) for v in self.values]

    def __len__(self) -> int:
        return self.times.size


def _rk4(k: int, al: float, be: float, y: _Vec, h: float) -> _Vec:
    a, b, c = y
    k1 = _rhs_components(k, a, b, c, al, be)
    k2 = _rhs_components(k, a + 0.5 * h * k1[0], b + 0.5 * h * k1[1], c + 0.5 * h * k1[2], al, be)
    k3 = _rhs_components(k, a + 0.5 * h * k2[0], b + 0.5 * h * k2[1], c + 0.5 * h * k2[2], al, be)
    k4 = _rhs_components(k, a + h * k3[0], b + h * k3[1], c + h * k3[2], al, be)
    s = h / 6.0
    return (
        a + s * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        b + s * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        c + s * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )


def _pd(k: int, y: _Vec) -> bool:
    return is_strictly_pd(SymCov(k, *y))


def integrate(
    kappa: int,
    alpha: float,
    beta: float,
    sigma0: SymCov,
    t_max: float,
    cfg: IntegratorConfig | None = None,
) -> CovTrajectory:
    """Integrate the Riccati flow from ``sigma0`` up to ``t_max``.

    Raises
    ------
    SingularCovarianceError
        If ``sigma0`` is not strictly positive definite.
    IntegrationError
        If no admissible step is found within ``cfg.max_halvings`` rejections.
    """
    cfg = cfg or IntegratorConfig()
    if sigma0.kappa != kappa:
        raise DomainError(f"sigma0 has kappa={sigma0.kappa}, expected {kappa}")
    if not is_strictly_pd(sigma0):
        raise SingularCovarianceError(f"initial covariance is not strictly PD: {sigma0}")
    if not (t_max > 0 and math.isfinite(t_max)):
        raise DomainError(f"t_max must be positive and finite, got {t_max}")
    n_int = math.ceil(t_max / cfg.grid_spacing - 1e-9)
    grid = [min(i * cfg.grid_spacing, t_max) for i in range(n_int)] + [t_max]
    y: _Vec = (float(sigma0.a), float(sigma0.b), float(sigma0.c))
    out = [y]
    h = cfg.initial_step
    accepted = rejected = 0
    for t0, t1 in zip(grid[:-1], grid[1:]):
        if cfg.adaptive:
            y, h, acc, rej = _advance_adaptive(kappa, alpha, beta, y, t0, t1, h, cfg)
        else:
            y, acc, rej = _advance_fixed(kappa, alpha, beta, y, t0, t1, cfg)
        accepted += acc
        rejected += rej
        out.append(y)
    return CovTrajectory(
        kappa, float(alpha), float(beta), np.array(grid), np.array(out), accepted, rejected
    )


def _advance_fixed(k, al, be, y, t0, t1, cfg):
    n = max(1, math.ceil((t1 - t0) / cfg.initial_step - 1e-9))
    h = (t1 - t0) / n
    for _ in range(n):
        y = _rk4(k, al, be, y, h)
        if not _pd(k, y):
            raise IntegrationError(f"fixed step left the positive cone near t={t0}")
    return y, n, 0


def _advance_adaptive(k, al, be, y, t0, t1, h, cfg):
    t = t0
    accepted = rejected = 0
    streak = 0
    while t < t1:
        hh = min(h, t1 - t)
        last = hh == t1 - t
        full = _rk4(k, al, be, y, hh)
        half = _rk4(k, al, be, _rk4(k, al, be, y, 0.5 * hh), 0.5 * hh)
        err = max(abs(half[i] - full[i]) for i in range(3)) / 15.0
        if err <= cfg.atol and _pd(k, half):
            y = half
            t = t1 if last else t + hh
            accepted += 1
            streak = 0
            grow = 4.0 if err == 0.0 else min(4.0, 0.9 * (cfg.atol / err) ** 0.2)
            if not last or grow < 1.0:
                h = hh * max(1.0, grow)
            continue
        rejected += 1
        streak += 1
        if streak > cfg.max_halvings:
            raise IntegrationError(f"step size collapsed near t={t} (err={err:.3e})")
        shrink = 0.5 if err <= cfg.atol else max(0.1, min(0.5, 0.9 * (cfg.atol / err) ** 0.2))
        h = hh * shrink
    return y, h, accepted, rejected


def marginal_at(traj: CovTrajectory, t: float) -> SymCov:
    """Covariance at time ``t``: stored value at grid nodes, cubic Hermite in between.

    Raises
    ------
    OutOfRangeError
        If ``t`` lies outside ``[0, t_max]``.
    """
    times = traj.times
    if not (times[0] <= t <= times[-1]):
        raise OutOfRangeError(f"t={t} outside [{times[0]}, {times[-1]}]")
    i = bisect.bisect_left(times, t)
    if i < times.size and times[i] == t:
        return SymCov(traj.kappa, *map(float, traj.values[i]))
    i0 = i - 1
    t0, t1 = times[i0], times[i]
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    v = (
        h00 * traj.values[i0]
        + h * h10 * traj._slopes[i0]
        + h01 * traj.values[i]
        + h * h11 * traj._slopes[i]
    )
    return SymCov(traj.kappa, *map(float, v))


def gamma_drift(traj: CovTrajectory, t: float, x: float, y: float) -> float:
    """Leaf drift ``alpha~(V_t) x + beta~(V_t) y``."""
    at, bt = tilde_coeffs(marginal_at(traj, t), traj.alpha, traj.beta)
    return at * x + bt * y


def stationary_residual(S: SymCov, alpha: float, beta: float) -> float:
    """Max-norm of the Riccati right-hand side; zero exactly at fixed points."""
    return max(abs(v) for v in _rhs_components(S.kappa, S.a, S.b, S.c, alpha, beta))


def trajectory_rows(traj: CovTrajectory) -> Iterable[tuple[float, float, float, float]]:
    """Rows ``(t, a, b, c)`` for CSV emission."""
    for t, v in zip(traj.times, traj.values):
        yield (float(t), float(v[0]), float(v[1]), float(v[2]))

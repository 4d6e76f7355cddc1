"""Rate fitting and the GLFE / GMLFE comparison table."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .gaussfun import (
    GaussOnStar,
    gauss_kl,
    modified_fisher,
    sparse_free_energy_gap,
    tv_upper_bound,
)
from .glfe import GlfeParams, glfe_cov_grid, glfe_tail_bound, stationary_pi
from .riccati import IntegratorConfig, integrate
from .symcov import SymCov

__all__ = ["RateFit", "fit_rate", "COMPARE_COLUMNS", "compare_table", "compare_summary"]

COMPARE_COLUMNS = (
    "t",
    "glfe_a",
    "glfe_b",
    "glfe_c",
    "mlfe_a",
    "mlfe_b",
    "mlfe_c",
    "tv_glfe_pi",
    "tv_mlfe_pi",
    "tv_glfe_mlfe",
    "kl_glfe_pi",
    "sfe_gap",
    "fisher",
)
DECAY_COLUMNS = COMPARE_COLUMNS[7:]


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit ``log v(t) ~ intercept - rate * t`` on a window."""

    rate: float
    intercept: float
    r_squared: float
    window: tuple[float, float]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def fit_rate(
    times: Sequence[float],
    values: Sequence[float],
    window: tuple[float, float | None] = (2.0, None),
) -> RateFit:
    """Fit an exponential decay rate on ``lo <= t <= hi``.

    Raises
    ------
    DomainError
        If fewer than two points fall in the window or a value there is not positive.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    lo, hi = window
    hi = float(t.max()) if hi is None else hi
    sel = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    if sel.sum() < 2:
        raise DomainError(f"need at least two points in window [{lo}, {hi}]")
    tw, vw = t[sel], v[sel]
    if np.any(~(vw > 0)):
        raise DomainError("values must be positive inside the fit window")
    y = np.log(vw)
    slope, intercept = np.polyfit(tw, y, 1)
    resid = y - (slope * tw + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    if ss_tot <= 1e-300:
        r2 = 1.0
        slope = 0.0 if ss_res <= 1e-24 else slope
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RateFit(float(-slope) + 0.0, float(intercept), float(r2), (float(lo), float(hi)))


def compare_table(
    alpha: float,
    beta: float,
    var0: float,
    t_max: float,
    grid: float,
    prefactor: str = "three-halves",
) -> dict[str, np.ndarray]:
    """Per-time comparison of the GLFE, the GMLFE and the stationary law.

    Both equations start from ``N(0, var0 I)``.
    """
    pi = GaussOnStar(stationary_pi(alpha, beta))
    traj = integrate(2, alpha, beta, SymCov(2, float(var0), 0.0, 0.0), t_max, IntegratorConfig(grid_spacing=grid))
    times = traj.times
    glfe = glfe_cov_grid(GlfeParams(alpha, beta, var0), times)
    cols: dict[str, list[float]] = {c: [] for c in COMPARE_COLUMNS}
    for t, g, m in zip(times, glfe, traj.values):
        rho = GaussOnStar.of(*g)
        mu = GaussOnStar.of(*m)
        row = (
            float(t), *map(float, g), *map(float, m),
            tv_upper_bound(pi, rho, prefactor),
            tv_upper_bound(pi, mu, prefactor),
            tv_upper_bound(mu, rho, prefactor),
            gauss_kl(rho, pi),
            sparse_free_energy_gap(mu, alpha, beta),
            modified_fisher(mu, alpha, beta),
        )
        for name, val in zip(COMPARE_COLUMNS, row):
            cols[name].append(val)
    return {k: np.array(v) for k, v in cols.items()}


def compare_summary(
    table: dict[str, np.ndarray],
    params: GlfeParams,
    window: tuple[float, float | None] = (2.0, 8.0),
) -> dict:
    """Rate fits for every decay column plus the tail-bound dominance check."""
    t = table["t"]
    hi = window[1] if window[1] is not None else float(t[-1])
    win = (window[0], min(hi, float(t[-1])))
    fits: dict[str, dict | None] = {}
    errors: dict[str, str] = {}
    for col in DECAY_COLUMNS:
        try:
            fits[col] = fit_rate(t, table[col], win).to_dict()
        except DomainError as exc:
            fits[col] = None
            errors[col] = str(exc)
    pi = np.array(stationary_pi(params.alpha, params.beta).triple())
    glfe = np.stack([table["glfe_a"], table["glfe_b"], table["glfe_c"]], axis=1)
    dev = np.max(np.abs(glfe - pi), axis=1)
    bound = np.array([glfe_tail_bound(params, float(s)) for s in t])
    dev_fit = None
    try:
        dev_fit = fit_rate(t, dev, win).to_dict()
    except DomainError as exc:
        errors["glfe_deviation"] = str(exc)
    return {
        "rate_fits": fits,
        "glfe_deviation_fit": dev_fit,
        "tail_bound_dominates": bool(np.all(dev <= bound)),
        "max_deviation_over_bound": float(np.max(dev / bound)),
        "final": {col: float(table[col][-1]) for col in DECAY_COLUMNS},
        "fit_errors": errors,
        "proof_rate": 2.0 * (params.alpha - abs(params.beta)),
        "finite": bool(all(math.isfinite(float(x)) for col in table.values() for x in col)),
    }

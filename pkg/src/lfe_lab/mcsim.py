"""Monte Carlo simulation of the n-cycle OU system and the star covariance SDE.

Every path draws its noise from its own counter-based stream keyed by
``(seed, path index)``, so results do not depend on how paths are scheduled.
Covariance estimates average over paths and over all vertex pairs that are
equivalent under the graph symmetry; standard errors come from equal-share
path batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DomainError, OutOfRangeError, StabilityError
from .glfe import GlfeParams, cycle_eigenvalues
from .riccati import CovTrajectory, marginal_at
from .symcov import drift_matrix_L

__all__ = [
    "SimConfig",
    "SimEnsemble",
    "StatAccumulator",
    "simulate_cycle",
    "simulate_gmlfe",
    "empirical_neighborhood_cov",
    "empirical_star_cov",
    "comparison_rows",
]

SCHEMES = ("euler", "exact-gaussian")


@dataclass(frozen=True)
class SimConfig:
    """Simulation budget and discretization.

    Attributes
    ----------
    paths : int
        Number of independent paths.
    dt : float
        Time step; rounded down so that an integer number of steps reaches ``t_end``.
    t_end : float
        Final time.
    seed : int
        64-bit seed of the path streams.
    scheme : {"euler", "exact-gaussian"}
    n : int or None
        Cycle length (cycle simulations only).
    batches : int
        Number of path batches used for standard errors.
    record_times : tuple of float
        Extra snapshot times; ``t_end`` is always recorded.
    path_offset : int
        Index of the first path; lets disjoint runs share a seed.
    """

    paths: int
    dt: float
    t_end: float
    seed: int
    scheme: str = "euler"
    n: int | None = None
    batches: int = 32
    record_times: tuple[float, ...] = ()
    path_offset: int = 0

    def __post_init__(self):
        if int(self.paths) != self.paths or self.paths < 1:
            raise DomainError(f"paths must be a positive integer, got {self.paths}")
        if not (self.dt > 0 and self.t_end > 0 and math.isfinite(self.t_end)):
            raise DomainError("dt and t_end must be positive")
        if self.dt > self.t_end:
            raise DomainError(f"dt={self.dt} exceeds t_end={self.t_end}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.n is not None and (self.n < 4 or self.n % 2):
            raise DomainError(f"n must be an even integer >= 4, got {self.n}")
        if self.batches < 2:
            raise DomainError("at least two batches are needed for standard errors")
        for t in self.record_times:
            if not 0 <= t <= self.t_end:
                raise DomainError(f"record time {t} outside [0, {self.t_end}]")

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.t_end / self.dt - 1e-9))

    @property
    def step(self) -> float:
        return self.t_end / self.n_steps

    def snapshot_steps(self) -> np.ndarray:
        ks = {self.n_steps}
        for t in self.record_times:
            ks.add(int(round(t / self.step)))
        return np.array(sorted(ks), dtype=np.int64)


class StatAccumulator:
    """Batched, compensated running sums of a vector of per-path statistics.

    Path ``p`` (global index) belongs to batch ``p * B // paths``, so batch
    membership is fixed by the configuration and merging partial
    accumulators in any order gives the same totals up to rounding.
    """

    def __init__(self, n_stats: int, batches: int, paths: int):
        self.paths = paths
        self.batches = batches
        self.count = np.zeros(batches, dtype=np.int64)
        self._sum = np.zeros((batches, n_stats))
        self._comp = np.zeros((batches, n_stats))

    def add(self, path_index: np.ndarray, stats: np.ndarray) -> None:
        b = (np.asarray(path_index, dtype=np.int64) * self.batches) // self.paths
        for j in np.unique(b):
            sel = b == j
            self.count[j] += int(sel.sum())
            self._kahan(j, np.sum(stats[sel], axis=0))

    def _kahan(self, j: int, x: np.ndarray) -> None:
        # Neumaier summation per batch
        s = self._sum[j]
        t = s + x
        big = np.abs(s) >= np.abs(x)
        self._comp[j] += np.where(big, (s - t) + x, (x - t) + s)
        self._sum[j] = t

    def merge(self, other: "StatAccumulator") -> "StatAccumulator":
        if (other.batches, other.paths) != (self.batches, self.paths):
            raise DomainError("accumulators have different layouts")
        self.count += other.count
        for j in range(self.batches):
            self._kahan(j, other._sum[j])
            self._kahan(j, other._comp[j])
        return self

    def totals(self) -> np.ndarray:
        return self._sum + self._comp

    def estimate(self) -> tuple[np.ndarray, np.ndarray]:
        """Mean over paths and its batch-means standard error."""
        tot = self.totals()
        n = self.count.sum()
        mean = tot.sum(axis=0) / n
        used = self.count > 0
        nb = int(used.sum())
        if nb < 2:
            return mean, np.full(mean.shape, np.nan)
        bm = tot[used] / self.count[used, None]
        w = self.count[used, None] / n
        var = nb / (nb - 1) * np.sum(w * w * (bm - mean) ** 2, axis=0)
        return mean, np.sqrt(var)


@dataclass
class SimEnsemble:
    """Result of a simulation: snapshots, per-path statistics and accumulators.

    ``states[s]`` holds the state of every path at ``times[s]`` when the
    ensemble was built with ``keep_states=True``.
    """

    config: SimConfig
    kind: str
    dim: int
    times: np.ndarray
    accumulators: list[StatAccumulator]
    states: np.ndarray | None = field(default=None, repr=False)

    def snapshot_index(self, t: float | None) -> int:
        if t is None:
            return len(self.times) - 1
        idx = np.flatnonzero(np.isclose(self.times, t, rtol=0, atol=1e-12))
        if idx.size == 0:
            raise OutOfRangeError(f"no snapshot at t={t}; available: {self.times.tolist()}")
        return int(idx[0])

    def estimates(self, t: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        return self.accumulators[self.snapshot_index(t)].estimate()

    def rotated(self, shift: int) -> "SimEnsemble":
        """Re-estimate from a view with vertex labels rotated by ``shift``."""
        if self.states is None or self.kind != "cycle":
            raise DomainError("rotation needs a cycle ensemble with stored states")
        st = np.roll(self.states, shift, axis=-1)
        return _finalize(self.config, self.kind, self.dim, self.times, st, keep_states=True)


def _cycle_stats(x: np.ndarray) -> np.ndarray:
    # per path: mean over v of x_v x_{v+d}, d = 0..n/2
    n = x.shape[-1]
    return np.stack([np.mean(x * np.roll(x, -d, axis=-1), axis=-1) for d in range(n // 2 + 1)], axis=-1)


def _star_stats(x: np.ndarray) -> np.ndarray:
    # per path: exchangeable averages for (a, b, c)
    k = x.shape[-1] - 1
    a = np.mean(x * x, axis=-1)
    b = np.mean(x[..., :1] * x[..., 1:], axis=-1)
    s = np.sum(x[..., 1:], axis=-1)
    q = np.sum(x[..., 1:] ** 2, axis=-1)
    c = (s * s - q) / (k * (k - 1))
    return np.stack([a, b, c], axis=-1)


def _finalize(cfg, kind, dim, times, states, keep_states):
    stat = _cycle_stats if kind == "cycle" else _star_stats
    accs = []
    rel = np.arange(cfg.paths)
    for s in range(states.shape[0]):
        vals = stat(states[s])
        acc = StatAccumulator(vals.shape[-1], min(cfg.batches, cfg.paths), cfg.paths)
        acc.add(rel, vals)
        accs.append(acc)
    return SimEnsemble(cfg, kind, dim, np.asarray(times), accs, states if keep_states else None)


def _check_stable(mus: np.ndarray, h: float) -> None:
    bad = np.abs(1.0 - h * mus) >= 1.0
    if np.any(bad):
        raise StabilityError(
            f"explicit step dt={h} is unstable for drift eigenvalue {float(mus[bad][0])}"
        )


def simulate_cycle(p: GlfeParams, cfg: SimConfig, keep_states: bool = False, backend: str | None = None) -> SimEnsemble:
    """Simulate ``dZ_v = -(alpha Z_v + beta/2 (Z_{v+1} + Z_{v-1})) dt + sqrt(2) dB_v`` on the n-cycle.

    The initial state is i.i.d. ``N(0, var0)``.  Per-path statistics are the
    vertex averages of ``Z_v Z_{v+d}`` for ``d = 0..n/2``.

    Raises
    ------
    StabilityError
        If the Euler step is unstable for some drift eigenvalue.
    """
    if cfg.n is None:
        raise DomainError("cycle simulation needs cfg.n")
    n, h = cfg.n, cfg.step
    mus = p.alpha + 0.5 * p.beta * cycle_eigenvalues(n)
    snaps = cfg.snapshot_steps()
    if cfg.scheme == "euler":
        _check_stable(mus, h)
        states = kernels.propagate_cycle(
            1.0 - h * p.alpha, -0.5 * h * p.beta, math.sqrt(2.0 * h), math.sqrt(p.var0),
            n, cfg.seed, cfg.paths, cfg.path_offset, cfg.n_steps, snaps, backend=backend,
        )
    else:
        A = p.alpha * np.eye(n) + 0.5 * p.beta * (np.roll(np.eye(n), 1, axis=1) + np.roll(np.eye(n), -1, axis=1))
        w, U = np.linalg.eigh(A)
        E = (U * np.exp(-h * w)) @ U.T
        var = np.where(w == 0.0, 2.0 * h, -np.expm1(-2.0 * h * w) / np.where(w == 0.0, 1.0, w))
        C = (U * var) @ U.T
        Sh = np.linalg.cholesky(0.5 * (C + C.T))
        states = kernels.propagate_dense(
            E[None], Sh[None], math.sqrt(p.var0) * np.eye(n),
            cfg.seed, cfg.paths, cfg.path_offset, cfg.n_steps, snaps, backend=backend,
        )
    return _finalize(cfg, "cycle", n, snaps * h, states, keep_states)


def simulate_gmlfe(traj: CovTrajectory, cfg: SimConfig, keep_states: bool = False, backend: str | None = None) -> SimEnsemble:
    """Euler-Maruyama for ``dX = -L(V_t) X dt + sqrt(2) dB`` on the star.

    ``V_t`` is read from ``traj`` (cubic Hermite off the grid) at the left
    end of each step.  The initial law is ``N(0, V_0)``.

    Raises
    ------
    OutOfRangeError
        If the trajectory does not cover ``[0, t_end]``.
    StabilityError
        If ``I - dt L(V_t)`` has an eigenvalue of modulus >= 1 at some step.
    """
    if cfg.scheme != "euler":
        raise DomainError("the star SDE is simulated with the euler scheme only")
    if traj.t_max < cfg.t_end - 1e-12:
        raise OutOfRangeError(f"trajectory ends at {traj.t_max} < t_end={cfg.t_end}")
    h, K = cfg.step, cfg.n_steps
    dim = traj.kappa + 1
    Ms = np.empty((K, dim, dim))
    for k in range(K):
        L = drift_matrix_L(marginal_at(traj, min(k * h, traj.t_max)), traj.alpha, traj.beta)
        _check_stable(np.linalg.eigvals(L), h)
        Ms[k] = np.eye(dim) - h * L
    S0 = marginal_at(traj, 0.0).dense()
    C0 = np.linalg.cholesky(S0)
    snaps = cfg.snapshot_steps()
    states = kernels.propagate_dense(
        Ms, math.sqrt(2.0 * h) * np.eye(dim)[None], C0,
        cfg.seed, cfg.paths, cfg.path_offset, K, snaps, backend=backend,
    )
    return _finalize(cfg, "star", dim, snaps * h, states, keep_states)


def empirical_neighborhood_cov(e: SimEnsemble, distance: int, t: float | None = None) -> tuple[float, float]:
    """Average of ``Z_v Z_{v+distance}`` over paths and vertices, with its standard error."""
    if e.kind != "cycle":
        raise DomainError("neighbourhood covariances are defined for cycle ensembles")
    if not 0 <= distance <= e.dim // 2:
        raise OutOfRangeError(f"distance must lie in [0, {e.dim // 2}], got {distance}")
    mean, se = e.estimates(t)
    return float(mean[distance]), float(se[distance])


def empirical_star_cov(e: SimEnsemble, t: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Exchangeable estimates of ``(a, b, c)`` with standard errors."""
    if e.kind != "star":
        raise DomainError("star covariances are defined for star ensembles")
    return e.estimates(t)


def comparison_rows(
    estimates: Sequence[tuple[float, float]], exact: Sequence[float], labels: Sequence[int]
) -> list[tuple[int, float, float, float, float]]:
    """Rows ``(distance, estimate, std_error, exact, z_score)``."""
    rows = []
    for lab, (est, se), ex in zip(labels, estimates, exact):
        z = (est - ex) / se if se > 0 else math.inf
        rows.append((int(lab), float(est), float(se), float(ex), float(z)))
    return rows

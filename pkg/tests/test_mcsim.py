import math

import numpy as np
import pytest

from lfe_lab.errors import DomainError, OutOfRangeError, StabilityError
from lfe_lab.glfe import CycleCov, GlfeParams, cycle_cov_matrix, glfe_cov, stationary_pi
from lfe_lab.mcsim import (
    SimConfig,
    StatAccumulator,
    comparison_rows,
    empirical_neighborhood_cov,
    empirical_star_cov,
    simulate_cycle,
    simulate_gmlfe,
)
from lfe_lab.riccati import integrate
from lfe_lab.symcov import make_symcov


def _euler_ou_var(alpha, var0, h, k):
    # exact variance of x <- (1 - h alpha) x + sqrt(2h) xi after k steps
    r2 = (1 - h * alpha) ** 2
    return r2**k * var0 + 2 * h * (1 - r2**k) / (1 - r2)


class TestConfig:
    def test_steps(self):
        cfg = SimConfig(paths=10, dt=0.3, t_end=1.0, seed=1)
        assert cfg.n_steps == 4 and cfg.step == 0.25
        assert SimConfig(paths=1, dt=0.1, t_end=1.0, seed=1).n_steps == 10

    def test_snapshots(self):
        cfg = SimConfig(paths=10, dt=0.1, t_end=1.0, seed=1, record_times=(0.0, 0.5))
        assert cfg.snapshot_steps().tolist() == [0, 5, 10]

    @pytest.mark.parametrize(
        "kw",
        [
            dict(paths=0),
            dict(paths=2.5),
            dict(dt=0.0),
            dict(dt=2.0),
            dict(scheme="milstein"),
            dict(n=5),
            dict(batches=1),
            dict(record_times=(2.0,)),
        ],
    )
    def test_invalid(self, kw):
        base = dict(paths=10, dt=0.1, t_end=1.0, seed=1)
        base.update(kw)
        with pytest.raises(DomainError):
            SimConfig(**base)


class TestCycle:
    def test_beta_zero_euler_exact_oracle(self):
        p = GlfeParams(2.0, 0.0, var0=1.0)
        cfg = SimConfig(paths=4000, dt=0.05, t_end=1.0, seed=5, n=8)
        e = simulate_cycle(p, cfg)
        est, se = empirical_neighborhood_cov(e, 0)
        assert abs(est - _euler_ou_var(2.0, 1.0, 0.05, 20)) <= 4 * se
        est1, se1 = empirical_neighborhood_cov(e, 1)
        assert abs(est1) <= 4 * se1

    def test_exact_scheme_matches_spectral_covariance(self):
        p = GlfeParams(2.0, 1.0)
        cfg = SimConfig(paths=4000, dt=0.25, t_end=1.0, seed=9, n=8, scheme="exact-gaussian")
        e = simulate_cycle(p, cfg)
        exact = cycle_cov_matrix(CycleCov(8, 1.0, p))[0]
        for d in range(3):
            est, se = empirical_neighborhood_cov(e, d)
            assert abs(est - exact[d]) <= 4 * se, (d, est, exact[d], se)

    def test_exact_scheme_has_no_step_bias(self):
        # a single coarse step is still exact in law
        p = GlfeParams(2.0, 1.0)
        cfg = SimConfig(paths=4000, dt=1.0, t_end=1.0, seed=13, n=8, scheme="exact-gaussian")
        est, se = empirical_neighborhood_cov(simulate_cycle(p, cfg), 0)
        assert abs(est - cycle_cov_matrix(CycleCov(8, 1.0, p))[0, 0]) <= 4 * se

    def test_euler_weak_first_order(self):
        # bias of the Euler variance at beta = 0 is O(h); compare h and h/2 analytically
        exact = 0.5 + 0.5 * math.exp(-4.0)
        b1 = _euler_ou_var(2.0, 1.0, 0.02, 50) - exact
        b2 = _euler_ou_var(2.0, 1.0, 0.01, 100) - exact
        assert 1.8 <= b1 / b2 <= 2.2

    def test_rotation_invariance(self):
        p = GlfeParams(2.0, 1.0)
        cfg = SimConfig(paths=500, dt=0.05, t_end=0.5, seed=3, n=8)
        e = simulate_cycle(p, cfg, keep_states=True)
        m0, s0 = e.estimates()
        for shift in (1, 3):
            m1, s1 = e.rotated(shift).estimates()
            assert np.allclose(m0, m1, rtol=1e-12, atol=1e-15)
            assert np.allclose(s0, s1, rtol=1e-12, atol=1e-15)

    def test_rotation_needs_states(self):
        e = simulate_cycle(GlfeParams(2.0, 1.0), SimConfig(paths=5, dt=0.1, t_end=0.2, seed=1, n=4))
        with pytest.raises(DomainError):
            e.rotated(1)

    def test_single_path(self):
        e = simulate_cycle(GlfeParams(2.0, 1.0), SimConfig(paths=1, dt=0.1, t_end=0.5, seed=1, n=4))
        mean, se = e.estimates()
        assert np.all(np.isfinite(mean)) and np.all(np.isnan(se))

    def test_seed_determinism(self):
        cfg = SimConfig(paths=50, dt=0.1, t_end=0.5, seed=21, n=6)
        a = simulate_cycle(GlfeParams(2.0, 1.0), cfg).estimates()
        b = simulate_cycle(GlfeParams(2.0, 1.0), cfg).estimates()
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_path_offset_partitions(self):
        p = GlfeParams(2.0, 1.0)
        full = simulate_cycle(p, SimConfig(paths=40, dt=0.1, t_end=0.5, seed=4, n=6), keep_states=True)
        tail = simulate_cycle(p, SimConfig(paths=15, dt=0.1, t_end=0.5, seed=4, n=6, path_offset=25), keep_states=True)
        assert np.array_equal(full.states[:, 25:], tail.states)

    def test_unstable_step(self):
        with pytest.raises(StabilityError):
            simulate_cycle(GlfeParams(2.0, 1.0), SimConfig(paths=5, dt=1.0, t_end=1.0, seed=1, n=8))

    def test_needs_n(self):
        with pytest.raises(DomainError):
            simulate_cycle(GlfeParams(2.0, 1.0), SimConfig(paths=5, dt=0.1, t_end=1.0, seed=1))

    def test_snapshot_lookup(self):
        cfg = SimConfig(paths=20, dt=0.1, t_end=1.0, seed=1, n=4, record_times=(0.0, 0.5))
        e = simulate_cycle(GlfeParams(2.0, 1.0), cfg)
        est0, _ = empirical_neighborhood_cov(e, 0, t=0.0)
        assert est0 > 0
        with pytest.raises(OutOfRangeError):
            e.estimates(0.3)
        with pytest.raises(OutOfRangeError):
            empirical_neighborhood_cov(e, 3)

    def test_large_cycle_tracks_glfe(self):
        # for n = 64 the cycle covariance is the tree one to machine precision
        p = GlfeParams(2.0, 1.0)
        cfg = SimConfig(paths=400, dt=0.25, t_end=1.0, seed=17, n=64, scheme="exact-gaussian")
        e = simulate_cycle(p, cfg)
        g = glfe_cov(p, 1.0).triple()
        for d in range(3):
            est, se = empirical_neighborhood_cov(e, d)
            assert abs(est - g[d]) <= 4 * se


class TestStar:
    def test_stationary_start_stays(self):
        pi = stationary_pi(2.0, 1.0)
        traj = integrate(2, 2.0, 1.0, pi, 1.0)
        e = simulate_gmlfe(traj, SimConfig(paths=4000, dt=0.01, t_end=1.0, seed=8))
        est, se = empirical_star_cov(e)
        # Euler bias at this step is well below the statistical error
        assert np.all(np.abs(est - np.array(pi.triple())) <= 4 * se)

    def test_tracks_riccati(self):
        traj = integrate(3, 1.5, -0.5, make_symcov(3, 1.0, 0.0, 0.0), 1.0)
        e = simulate_gmlfe(traj, SimConfig(paths=4000, dt=0.01, t_end=1.0, seed=12))
        est, se = empirical_star_cov(e)
        assert np.all(np.abs(est - traj.values[-1]) <= 4 * se)

    def test_initial_law(self):
        S0 = make_symcov(2, 1.0, 0.4, 0.1)
        traj = integrate(2, 2.0, 1.0, S0, 0.5)
        cfg = SimConfig(paths=4000, dt=0.05, t_end=0.5, seed=2, record_times=(0.0,))
        est, se = empirical_star_cov(simulate_gmlfe(traj, cfg), t=0.0)
        assert np.all(np.abs(est - np.array(S0.triple())) <= 4 * se)

    def test_trajectory_too_short(self):
        traj = integrate(2, 2.0, 1.0, make_symcov(2, 1, 0, 0), 0.5)
        with pytest.raises(OutOfRangeError):
            simulate_gmlfe(traj, SimConfig(paths=5, dt=0.1, t_end=1.0, seed=1))

    def test_euler_only(self):
        traj = integrate(2, 2.0, 1.0, make_symcov(2, 1, 0, 0), 1.0)
        with pytest.raises(DomainError):
            simulate_gmlfe(traj, SimConfig(paths=5, dt=0.1, t_end=1.0, seed=1, scheme="exact-gaussian"))

    def test_unstable(self):
        traj = integrate(2, 2.0, 1.0, make_symcov(2, 1, 0, 0), 1.0)
        with pytest.raises(StabilityError):
            simulate_gmlfe(traj, SimConfig(paths=5, dt=1.0, t_end=1.0, seed=1))

    def test_kind_checks(self):
        traj = integrate(2, 2.0, 1.0, make_symcov(2, 1, 0, 0), 0.2)
        e = simulate_gmlfe(traj, SimConfig(paths=5, dt=0.1, t_end=0.2, seed=1))
        with pytest.raises(DomainError):
            empirical_neighborhood_cov(e, 0)
        c = simulate_cycle(GlfeParams(2.0, 1.0), SimConfig(paths=5, dt=0.1, t_end=0.2, seed=1, n=4))
        with pytest.raises(DomainError):
            empirical_star_cov(c)


class TestAccumulator:
    def test_merge_equals_single_pass(self):
        rng = np.random.default_rng(1)
        stats = rng.standard_normal((1000, 3)) * 1e8 + 1.0
        one = StatAccumulator(3, 8, 1000)
        one.add(np.arange(1000), stats)
        left = StatAccumulator(3, 8, 1000)
        right = StatAccumulator(3, 8, 1000)
        right.add(np.arange(600, 1000), stats[600:])
        left.add(np.arange(600), stats[:600])
        left.merge(right)
        assert np.array_equal(left.count, one.count)
        assert np.allclose(left.totals(), one.totals(), rtol=1e-15, atol=0)
        m1, s1 = one.estimate()
        m2, s2 = left.estimate()
        assert np.allclose(m1, m2, rtol=1e-14) and np.allclose(s1, s2, rtol=1e-12)

    def test_compensated_sum(self):
        acc = StatAccumulator(1, 2, 8)  # indices 0..3 share batch 0
        vals = np.array([[1e16], [1.0], [-1e16], [1.0]])
        for i in range(4):
            acc.add(np.array([i]), vals[i : i + 1])
        assert acc.totals()[0, 0] == 2.0

    def test_standard_error_matches_iid_formula(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((64000, 1))
        acc = StatAccumulator(1, 32, 64000)
        acc.add(np.arange(64000), x)
        mean, se = acc.estimate()
        assert se[0] == pytest.approx(1 / math.sqrt(64000), rel=0.35)
        assert abs(mean[0]) <= 4 * se[0]

    def test_layout_mismatch(self):
        with pytest.raises(DomainError):
            StatAccumulator(1, 4, 10).merge(StatAccumulator(1, 8, 10))


def test_comparison_rows():
    rows = comparison_rows([(1.0, 0.1), (2.0, 0.0)], [0.8, 2.0], [0, 1])
    assert rows[0] == (0, 1.0, 0.1, 0.8, pytest.approx(2.0))
    assert rows[1][4] == math.inf

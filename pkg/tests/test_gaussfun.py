import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfe_lab.errors import DomainError, NoStationaryLawError, SingularCovarianceError
from lfe_lab.gaussfun import (
    GaussOnStar,
    edge_marginal_kl,
    gauss_kl,
    gauss_kl_dense,
    modified_fisher,
    pinsker_tv_bound,
    sparse_free_energy_abs,
    sparse_free_energy_gap,
    tv_upper_bound,
    weighted_pinsker_sides,
)
from lfe_lab.glfe import stationary_pi
from lfe_lab.riccati import integrate, marginal_at
from lfe_lab.symcov import make_symcov

from strategies import pd_symcov, stable_pair

EYE = GaussOnStar.of(1, 0, 0)


def _kl_textbook(S1, S0):
    d = S1.shape[0]
    return 0.5 * (np.trace(np.linalg.solve(S0, S1)) - d + math.log(np.linalg.det(S0) / np.linalg.det(S1)))


class TestGaussOnStar:
    def test_validation(self):
        with pytest.raises(DomainError):
            GaussOnStar(make_symcov(3, 1, 0, 0))
        with pytest.raises(SingularCovarianceError):
            GaussOnStar.of(1, 1, 1)

    def test_edge(self):
        assert np.array_equal(GaussOnStar.of(2, 1, 0.5).edge, [[2, 1], [1, 2]])


class TestKL:
    def test_self_zero(self):
        assert gauss_kl(EYE, EYE) == 0.0

    def test_scaled_identity(self):
        # 3/2 (2 - 1 - ln 2)
        assert gauss_kl(GaussOnStar.of(2, 0, 0), EYE) == pytest.approx(0.4602792291600821, abs=1e-15)
        assert gauss_kl(GaussOnStar.of(2, 0, 0), EYE) == pytest.approx(1.5 * (1 - math.log(2)), abs=1e-15)

    def test_edge_frozen(self):
        assert edge_marginal_kl(GaussOnStar.of(2, 1, 0.5), EYE) == pytest.approx(0.4506938556659451, abs=1e-14)

    @given(S1=pd_symcov(kappa=2), S0=pd_symcov(kappa=2))
    @settings(max_examples=100)
    def test_textbook_formula(self, S1, S0):
        got = gauss_kl(S1, S0)
        ref = _kl_textbook(S1.dense(), S0.dense())
        assert got == pytest.approx(ref, rel=1e-7, abs=1e-9)
        assert got >= 0

    @given(S1=pd_symcov(kappa=2), S0=pd_symcov(kappa=2))
    @settings(max_examples=100)
    def test_marginal_data_processing(self, S1, S0):
        assert edge_marginal_kl(S1, S0) <= gauss_kl(S1, S0) + 1e-9

    def test_near_equality_is_quadratic(self):
        # KL ~ 1/4 ||W||_F^2 for a small whitened perturbation; no roundoff floor
        base = np.diag([1.0, 2.0, 3.0])
        for eps in (1e-3, 1e-5, 1e-7):
            kl = gauss_kl_dense(base + eps * np.eye(3), base)
            approx = 0.25 * sum((eps / d) ** 2 for d in (1.0, 2.0, 3.0))
            assert kl == pytest.approx(approx, rel=1e-2)

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            gauss_kl_dense(np.eye(2), np.eye(3))

    def test_non_pd(self):
        with pytest.raises(SingularCovarianceError):
            gauss_kl_dense(np.eye(2), np.ones((2, 2)))


class TestTV:
    def test_self(self):
        assert tv_upper_bound(EYE, EYE) == 0.0

    def test_scaled(self):
        other = GaussOnStar.of(1.1, 0, 0)
        assert tv_upper_bound(EYE, other, "unit") == pytest.approx(0.1 * math.sqrt(3), abs=1e-15)
        assert tv_upper_bound(EYE, other) == pytest.approx(0.15 * math.sqrt(3), abs=1e-15)

    def test_accepts_symcov(self):
        assert tv_upper_bound(make_symcov(2, 1, 0, 0), make_symcov(2, 1.1, 0, 0), "unit") == pytest.approx(0.17320508, abs=1e-8)

    def test_bad_prefactor(self):
        with pytest.raises(DomainError):
            tv_upper_bound(EYE, EYE, "half")

    @given(S1=pd_symcov(kappa=2), S0=pd_symcov(kappa=2))
    @settings(max_examples=100)
    def test_non_negative(self, S1, S0):
        assert tv_upper_bound(S0, S1) >= 0


class TestFreeEnergy:
    @given(ab=stable_pair())
    def test_zero_at_stationary(self, ab):
        pi = stationary_pi(*ab)
        assert abs(sparse_free_energy_gap(pi, *ab)) <= 1e-12
        assert abs(modified_fisher(pi, *ab)) <= 1e-10

    @given(S=pd_symcov(kappa=2), ab=stable_pair())
    @settings(max_examples=100)
    def test_gap_non_negative(self, S, ab):
        # Markov structure of pi makes the gap a conditional relative entropy
        assert sparse_free_energy_gap(S, *ab) >= -1e-10

    @given(S=pd_symcov(kappa=2), ab=stable_pair())
    @settings(max_examples=100)
    def test_abs_and_gap_differ_by_constant(self, S, ab):
        pi = stationary_pi(*ab)
        diff = sparse_free_energy_abs(S, *ab) - sparse_free_energy_gap(S, *ab)
        const = sparse_free_energy_abs(pi, *ab)
        assert diff == pytest.approx(const, abs=1e-9 * max(1.0, abs(const)))

    def test_fisher_at_identity(self):
        assert modified_fisher(EYE, 2.0, 1.0) == pytest.approx(1.5, abs=1e-14)

    @given(S=pd_symcov(kappa=2), ab=stable_pair())
    @settings(max_examples=100)
    def test_fisher_non_negative(self, S, ab):
        assert modified_fisher(S, *ab) >= 0

    def test_dissipation_identity(self):
        # along the Riccati flow, d/dt gap = -fisher
        tr = integrate(2, 2.0, 1.0, make_symcov(2, 1, 0, 0), 3.0)
        h = 1e-3
        for t in (0.5, 1.0, 2.0):
            d = (sparse_free_energy_gap(marginal_at(tr, t + h), 2.0, 1.0) - sparse_free_energy_gap(marginal_at(tr, t - h), 2.0, 1.0)) / (2 * h)
            fis = modified_fisher(marginal_at(tr, t), 2.0, 1.0)
            assert d == pytest.approx(-fis, rel=1e-4)

    def test_no_stationary_law(self):
        with pytest.raises(NoStationaryLawError):
            sparse_free_energy_gap(EYE, 1.0, 1.0)


class TestPinsker:
    def test_values(self):
        assert pinsker_tv_bound(0.0) == 0.0
        assert pinsker_tv_bound(2.0) == 1.0
        assert pinsker_tv_bound(0.460139) == pytest.approx(0.479656, abs=1e-6)

    @pytest.mark.parametrize("kl", [-1e-3, float("nan")])
    def test_bad(self, kl):
        with pytest.raises(DomainError):
            pinsker_tv_bound(kl)

    def test_weighted_equal_laws(self):
        lhs, rhs = weighted_pinsker_sides(EYE, EYE, 0.5, 1.0, -1.0)
        assert lhs == 0.0 and rhs == 0.0

    @given(
        S1=pd_symcov(kappa=2),
        x=st.floats(-3, 3),
        y=st.floats(-3, 3),
        eps=st.floats(0.05, 0.45),
    )
    @settings(max_examples=100)
    def test_weighted_inequality(self, S1, x, y, eps):
        # Lambda_eps is finite for eps * sigma < 1; M_2(1.5, 0.75, 0) has sigma = 1
        den = GaussOnStar.of(1.5, 0.75, 0.0)
        lhs, rhs = weighted_pinsker_sides(S1, den, eps, x, y)
        assert lhs <= rhs * (1 + 1e-9) + 1e-12

"""Information functionals of centered Gaussian laws on the 2-star.

All expectations reduce to quadratic forms in the covariance, so every
quantity here is evaluated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError, SingularCovarianceError
from .glfe import stationary_pi
from .symcov import SymCov, conditional_gaussian, is_strictly_pd, lambda_eps

__all__ = [
    "GaussOnStar",
    "gauss_kl",
    "gauss_kl_dense",
    "edge_marginal_kl",
    "tv_upper_bound",
    "sparse_free_energy_gap",
    "sparse_free_energy_abs",
    "modified_fisher",
    "pinsker_tv_bound",
    "weighted_pinsker_sides",
]


@dataclass(frozen=True)
class GaussOnStar:
    """Centered Gaussian ``N(0, M_2(a, b, c))`` on the 2-star."""

    cov: SymCov

    def __post_init__(self):
        if self.cov.kappa != 2:
            raise DomainError("GaussOnStar requires kappa == 2")
        if not is_strictly_pd(self.cov):
            raise SingularCovarianceError(f"covariance is not strictly PD: {self.cov}")

    @classmethod
    def of(cls, a: float, b: float, c: float) -> "GaussOnStar":
        return cls(SymCov(2, float(a), float(b), float(c)))

    @property
    def dense(self) -> np.ndarray:
        return self.cov.dense()

    @property
    def edge(self) -> np.ndarray:
        """Covariance of the (center, first leaf) marginal."""
        a, b = self.cov.a, self.cov.b
        return np.array([[a, b], [b, a]])


def _as_law(x) -> GaussOnStar:
    return x if isinstance(x, GaussOnStar) else GaussOnStar(x)


def _chol(S: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError("covariance is not positive definite") from exc


def gauss_kl_dense(num: np.ndarray, den: np.ndarray) -> float:
    """``KL(N(0, num) || N(0, den))`` for dense covariances."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    if num.shape != den.shape:
        raise DomainError("covariances must have the same shape")
    _chol(num)
    Ld = _chol(den)
    # eigenvalues x of the whitened difference: KL = 1/2 sum(x - log(1 + x)),
    # which stays accurate when num and den nearly coincide
    W = np.linalg.solve(Ld, np.linalg.solve(Ld, num - den).T)
    x = np.linalg.eigvalsh(0.5 * (W + W.T))
    return float(0.5 * np.sum(x - np.log1p(x)))


def gauss_kl(num, den) -> float:
    """Relative entropy of ``num`` with respect to ``den``."""
    return gauss_kl_dense(_as_law(num).dense, _as_law(den).dense)


def edge_marginal_kl(num, den) -> float:
    """Relative entropy between the (center, first leaf) marginals."""
    return gauss_kl_dense(_as_law(num).edge, _as_law(den).edge)


def tv_upper_bound(
    reference,
    other,
    prefactor: Literal["three-halves", "unit"] = "three-halves",
) -> float:
    """Total-variation upper bound ``C ||S_ref^{-1} S_other - I||_F``.

    ``C`` is 3/2 by default; ``prefactor="unit"`` drops it.
    """
    if prefactor == "three-halves":
        k = 1.5
    elif prefactor == "unit":
        k = 1.0
    else:
        raise DomainError(f"unknown prefactor {prefactor!r}")
    ref = _as_law(reference).dense
    oth = other.dense if isinstance(other, GaussOnStar) else other.dense()
    _chol(ref)
    D = np.linalg.solve(ref, oth) - np.eye(ref.shape[0])
    return k * float(np.linalg.norm(D, "fro"))


def _pi_law(alpha: float, beta: float) -> GaussOnStar:
    return GaussOnStar(stationary_pi(alpha, beta))


def sparse_free_energy_gap(nu, alpha: float, beta: float) -> float:
    """``KL(nu || pi) - KL(nu_edge || pi_edge)``."""
    nu = _as_law(nu)
    pi = _pi_law(alpha, beta)
    return gauss_kl(nu, pi) - edge_marginal_kl(nu, pi)


def _entropy(S: np.ndarray) -> float:
    d = S.shape[0]
    L = _chol(S)
    return 0.5 * d * math.log(2.0 * math.pi * math.e) + float(np.sum(np.log(np.diag(L))))


def sparse_free_energy_abs(nu, alpha: float, beta: float) -> float:
    """Sparse free energy ``-h(nu) + h(nu_edge) + E U(Y_0) + 1/2 sum_v E W(Y_0 - Y_v)``.

    Potentials are ``U(x) = (alpha + beta)/2 x^2`` and ``W(x) = -beta/4 x^2``.
    """
    nu = _as_law(nu)
    a, b = nu.cov.a, nu.cov.b
    eu = 0.5 * (alpha + beta) * a
    # E (Y_0 - Y_v)^2 = 2a - 2b for each of the two leaves
    ew = -0.25 * beta * (2.0 * a - 2.0 * b)
    return -_entropy(nu.dense) + _entropy(nu.edge) + eu + ew


def modified_fisher(nu, alpha: float, beta: float) -> float:
    """Modified Fisher information as exact Gaussian quadratic forms.

    ``E|alpha Y_0 + beta/2 (Y_1 + Y_2) - (S^-1 Y)_0|^2
    + 2 E|-(S^-1 Y)_1 + (S_edge^-1 (Y_0, Y_1))_1|^2``.
    """
    nu = _as_law(nu)
    S = nu.dense
    P = np.linalg.inv(S)
    Pe = np.linalg.inv(nu.edge)
    v1 = np.array([alpha, 0.5 * beta, 0.5 * beta]) - P[0]
    v2 = -P[1].copy()
    v2[:2] += Pe[1]
    return float(v1 @ S @ v1 + 2.0 * (v2 @ S @ v2))


def pinsker_tv_bound(kl: float) -> float:
    """Pinsker bound ``sqrt(kl / 2)``."""
    if not kl >= 0.0:
        raise DomainError(f"relative entropy must be non-negative, got {kl}")
    return math.sqrt(0.5 * kl)


def weighted_pinsker_sides(
    num, den, eps: float, x: float, y: float, mode: str = "rederived"
) -> tuple[float, float]:
    """Both sides of the weighted Pinsker inequality for leaf conditionals.

    Returns ``(|m_num(x,y) - m_den(x,y)|^2, (4/eps + Lambda_eps(den)) KL)``,
    where ``KL`` is between the conditional laws of a leaf given the center
    and the other leaf at ``(x, y)`` and ``Lambda_eps`` is taken under ``den``.
    """
    cn = conditional_gaussian(_as_law(num).cov)
    cd = conditional_gaussian(_as_law(den).cov)
    mn, md = cn.mean(x, y), cd.mean(x, y)
    sn, sd = cn.variance, cd.variance
    kl = 0.5 * (sn / sd + (mn - md) ** 2 / sd - 1.0 + math.log(sd / sn))
    return (mn - md) ** 2, (4.0 / eps + lambda_eps(sd, eps, mode)) * kl

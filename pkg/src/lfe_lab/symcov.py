"""Symmetric covariance algebra on the kappa-star.

A point ``(kappa, a, b, c)`` stands for the ``(1 + kappa) x (1 + kappa)``
matrix ``M = a I + b J + c K`` whose diagonal is ``a``, whose center-leaf
entries are ``b`` and whose leaf-leaf entries are ``c``.  Dense realizations
use index 0 for the center and ``1..kappa`` for the leaves.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DivergentIntegralError, DomainError, SingularCovarianceError

__all__ = [
    "SymCov",
    "AuxMatrices",
    "ConditionalGaussian",
    "make_symcov",
    "is_strictly_pd",
    "spectrum",
    "precision_and_det",
    "fg",
    "tilde_coeffs",
    "drift_matrix_L",
    "riccati_rhs_F",
    "riccati_rhs_dense",
    "aux_matrices",
    "conditional_gaussian",
    "lambda_eps",
    "from_dense",
    "is_star_symmetric",
]


@dataclass(frozen=True)
class SymCov:
    """A point ``(kappa, a, b, c)`` of the star covariance family.

    Attributes
    ----------
    kappa : int
        Number of leaves (star degree), at least 2.
    a : float
        Common diagonal entry.
    b : float
        Center-leaf covariance.
    c : float
        Leaf-leaf covariance.
    """

    kappa: int
    a: float
    b: float
    c: float

    @property
    def dim(self) -> int:
        return self.kappa + 1

    def triple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)

    def dense(self) -> np.ndarray:
        """Dense ``(1 + kappa) x (1 + kappa)`` realization."""
        m = np.full((self.dim, self.dim), float(self.c))
        m[0, :] = self.b
        m[:, 0] = self.b
        np.fill_diagonal(m, self.a)
        return m


def make_symcov(kappa: int, a: float, b: float, c: float) -> SymCov:
    """Build a star covariance point; no positivity is required.

    Raises
    ------
    DomainError
        If ``kappa < 2`` or a component is not finite.
    """
    if int(kappa) != kappa or kappa < 2:
        raise DomainError(f"kappa must be an integer >= 2, got {kappa!r}")
    vals = (float(a), float(b), float(c))
    if not all(math.isfinite(v) for v in vals):
        raise DomainError(f"components must be finite, got {vals!r}")
    return SymCov(int(kappa), *vals)


def _block(S: SymCov) -> tuple[float, float, float]:
    # reduced 2x2 block [[p, q], [q, r]] on span{e0, leaf mean}
    return S.a, math.sqrt(S.kappa) * S.b, S.a + (S.kappa - 1) * S.c


def spectrum(S: SymCov) -> np.ndarray:
    """Closed-form eigenvalues of the dense realization, ascending.

    The leaf-difference eigenvalue ``a - c`` has multiplicity ``kappa - 1``;
    the remaining two come from the reduced 2x2 block.
    """
    p, q, r = _block(S)
    mid = 0.5 * (p + r)
    rad = math.hypot(0.5 * (p - r), q)
    vals = [S.a - S.c] * (S.kappa - 1) + [mid - rad, mid + rad]
    return np.sort(np.array(vals))


def is_strictly_pd(S: SymCov) -> bool:
    """True iff every eigenvalue of the dense realization is positive."""
    p, q, r = _block(S)
    return S.a - S.c > 0.0 and p > 0.0 and p * r - q * q > 0.0


def _block_det(S: SymCov) -> float:
    return S.a * (S.a + (S.kappa - 1) * S.c) - S.kappa * S.b * S.b


def precision_and_det(S: SymCov) -> tuple[np.ndarray, float]:
    """Closed-form inverse and determinant of a strictly-PD point.

    The inverse is not itself in the family (its center diagonal differs
    from its leaf diagonal), so it is returned densely.

    Raises
    ------
    SingularCovarianceError
        If ``S`` is not strictly positive definite.
    """
    if not is_strictly_pd(S):
        raise SingularCovarianceError(f"not strictly positive definite: {S}")
    k, a, b, c = S.kappa, S.a, S.b, S.c
    d = a + (k - 1) * c
    D = _block_det(S)
    e = a - c
    det = e ** (k - 1) * D
    leaf_common = a / (k * D) - 1.0 / (k * e)
    inv = np.full((k + 1, k + 1), leaf_common)
    inv[0, 0] = d / D
    inv[0, 1:] = -b / D
    inv[1:, 0] = -b / D
    for v in range(1, k + 1):
        inv[v, v] = leaf_common + 1.0 / e
    return inv, det


def fg(S: SymCov) -> tuple[float, float]:
    """Conditional-expectation functionals ``(f, g)``.

    ``f = b (a - c) / (a^2 - b^2)`` and ``g = (a c - b^2) / (a^2 - b^2)``.

    Raises
    ------
    SingularCovarianceError
        If ``a^2 == b^2``.
    """
    a, b, c = S.a, S.b, S.c
    den = a * a - b * b
    if den == 0.0:
        raise SingularCovarianceError("f, g undefined when a^2 == b^2")
    return b * (a - c) / den, (a * c - b * b) / den


def tilde_coeffs(S: SymCov, alpha: float, beta: float) -> tuple[float, float]:
    """Leaf drift coefficients ``(alpha_tilde, beta_tilde)``.

    Both are set to zero on the singular set ``|a| == |b|`` so that the
    Riccati right-hand side is defined everywhere.
    """
    if abs(S.a) == abs(S.b):
        return 0.0, 0.0
    f, g = fg(S)
    w = beta * (S.kappa - 1) / S.kappa
    return alpha + w * f, beta / S.kappa + w * g


def drift_matrix_L(S: SymCov, alpha: float, beta: float) -> np.ndarray:
    """Drift matrix ``L = alpha Q + alpha~ (I - Q) + (beta/kappa) P + beta~ P*``.

    Row 0 is the center drift; leaf row ``v`` gives ``alpha~ x_v + beta~ x_0``.
    """
    at, bt = tilde_coeffs(S, alpha, beta)
    n = S.dim
    L = np.zeros((n, n))
    L[0, 0] = alpha
    L[0, 1:] = beta / S.kappa
    L[1:, 0] = bt
    L[np.arange(1, n), np.arange(1, n)] = at
    return L


def _rhs_components(
    kappa: int, a: float, b: float, c: float, alpha: float, beta: float
) -> tuple[float, float, float]:
    # shared by riccati_rhs_F and the integrator's inner loop
    den = a * a - b * b
    if abs(a) == abs(b):
        at = bt = 0.0
    else:
        w = beta * (kappa - 1) / kappa
        at = alpha + w * b * (a - c) / den
        bt = beta / kappa + w * (a * c - b * b) / den
    f1 = 2.0 * (1.0 - alpha * a - beta * b)
    f2 = -((beta / kappa + bt) * a + (alpha + at) * b + beta * (kappa - 1) / kappa * c)
    f3 = -2.0 * (bt * b + at * c)
    return f1, f2, f3


def riccati_rhs_F(S: SymCov, alpha: float, beta: float) -> SymCov:
    """Riccati right-hand side ``F = 2I - L A - A L*`` in component form.

    For ``|a| != |b|`` the dense realization of the result equals
    :func:`riccati_rhs_dense` entrywise.
    """
    return SymCov(S.kappa, *_rhs_components(S.kappa, S.a, S.b, S.c, alpha, beta))


def riccati_rhs_dense(S: SymCov, alpha: float, beta: float) -> np.ndarray:
    """Dense evaluation of ``2I - L(A) A - A L(A)*`` (reference form)."""
    A = S.dense()
    L = drift_matrix_L(S, alpha, beta)
    return 2.0 * np.eye(S.dim) - L @ A - A @ L.T


@dataclass(frozen=True)
class AuxMatrices:
    """Integer 0/1 matrices ``Q, P, J, K, R`` on the kappa-star."""

    kappa: int
    Q: np.ndarray
    P: np.ndarray
    J: np.ndarray
    K: np.ndarray
    R: np.ndarray

    @property
    def I(self) -> np.ndarray:  # noqa: E743
        return np.eye(self.kappa + 1, dtype=np.int64)

    def relations(self) -> dict[str, bool]:
        """Evaluate every structural identity in exact integer arithmetic."""
        Q, P, J, K, I = self.Q, self.P, self.J, self.K, self.I
        Ps = P.T
        k = self.kappa
        Z = np.zeros_like(Q)
        eq = np.array_equal
        return {
            "QJ=P": eq(Q @ J, P),
            "J(I-Q)=P": eq(J @ (I - Q), P),
            "QK=0": eq(Q @ K, Z),
            "KQ=0": eq(K @ Q, Z),
            "P*K=0": eq(Ps @ K, Z),
            "KP=0": eq(K @ P, Z),
            "JP=K+(I-Q)": eq(J @ P, K + (I - Q)),
            "P*J=K+(I-Q)": eq(Ps @ J, K + (I - Q)),
            "PJ=kQ": eq(P @ J, k * Q),
            "JP*=kQ": eq(J @ Ps, k * Q),
            "KP*=(k-1)P*": eq(K @ Ps, (k - 1) * Ps),
            "(I-Q)K=K": eq((I - Q) @ K, K),
            "K(I-Q)=K": eq(K @ (I - Q), K),
            "J=P+P*": eq(J, P + Ps),
            "K=R-I-J": eq(K, self.R - I - J),
        }


def aux_matrices(kappa: int) -> AuxMatrices:
    """Auxiliary matrices for a star with ``kappa`` leaves."""
    if int(kappa) != kappa or kappa < 2:
        raise DomainError(f"kappa must be an integer >= 2, got {kappa!r}")
    n = kappa + 1
    Q = np.zeros((n, n), dtype=np.int64)
    Q[0, 0] = 1
    P = np.zeros((n, n), dtype=np.int64)
    P[0, 1:] = 1
    J = P + P.T
    R = np.ones((n, n), dtype=np.int64)
    K = R - np.eye(n, dtype=np.int64) - J
    return AuxMatrices(int(kappa), Q, P, J, K, R)


@dataclass(frozen=True)
class ConditionalGaussian:
    """Law of a leaf given (center, other leaf) = (x, y) on the 2-star.

    The conditional mean is ``coeff_center * x + coeff_leaf * y``; the
    variance does not depend on the conditioning point.
    """

    coeff_center: float
    coeff_leaf: float
    variance: float

    def mean(self, x: float, y: float) -> float:
        return self.coeff_center * x + self.coeff_leaf * y


def conditional_gaussian(S: SymCov) -> ConditionalGaussian:
    """Conditional law of leaf 2 given ``(X_0, X_1)`` for a 2-star point."""
    if S.kappa != 2:
        raise DomainError("conditional_gaussian is defined for kappa == 2")
    if not is_strictly_pd(S):
        raise SingularCovarianceError(f"not strictly positive definite: {S}")
    a, b, c = S.a, S.b, S.c
    den = a * a - b * b
    return ConditionalGaussian(
        coeff_center=(a * b - b * c) / den,
        coeff_leaf=(a * c - b * b) / den,
        variance=a - (a * b * b - 2.0 * b * b * c + a * c * c) / den,
    )


def lambda_eps(
    sigma_cond: float,
    eps: float,
    mode: Literal["rederived", "paper-printed"] = "rederived",
) -> float:
    """Exponential-integrability constant of a conditional Gaussian.

    ``rederived`` gives ``(2/eps) log(1 / (1 - eps sigma))``, the exact value
    of ``(4/eps) log E exp(eps Z^2 / 2)`` for ``Z ~ N(0, sigma)``.
    ``paper-printed`` keeps an extra ``2 pi`` inside the logarithm.

    Raises
    ------
    DivergentIntegralError
        If ``eps >= 1 / sigma_cond``.
    """
    if not (sigma_cond > 0.0 and eps > 0.0):
        raise DomainError("sigma_cond and eps must be positive")
    x = eps * sigma_cond
    if x >= 1.0:
        raise DivergentIntegralError(f"eps * sigma = {x} >= 1: moment is infinite")
    base = -math.log1p(-x)
    if mode == "rederived":
        return 2.0 / eps * base
    if mode == "paper-printed":
        return 2.0 / eps * (math.log(2.0 * math.pi) + base)
    raise DomainError(f"unknown mode {mode!r}")


def is_star_symmetric(A: np.ndarray, atol: float = 1e-12) -> bool:
    """Whether a dense matrix is leaf-exchangeable and edge-symmetric."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 3:
        return False
    try:
        S = _project(A)
    except DomainError:
        return False
    return bool(np.max(np.abs(S.dense() - A)) <= atol)


def _project(A: np.ndarray) -> SymCov:
    k = A.shape[0] - 1
    # representative entries, so exact inputs round-trip exactly
    return make_symcov(k, float(A[0, 0]), float(A[0, 1]), float(A[1, 2]))


def from_dense(A: np.ndarray, atol: float = 1e-12) -> SymCov:
    """Inverse of :meth:`SymCov.dense` on the star-symmetric matrices.

    Raises
    ------
    DomainError
        If ``A`` is not leaf-exchangeable and edge-symmetric within ``atol``.
    """
    A = np.asarray(A, dtype=float)
    if not is_star_symmetric(A, atol):
        raise DomainError("matrix is not a symmetric star covariance")
    return _project(A)

"""Shared hypothesis strategies."""

from hypothesis import assume
from hypothesis import strategies as st

from lfe_lab.symcov import SymCov, is_strictly_pd, spectrum

reals = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)
kappas = st.integers(min_value=2, max_value=6)


@st.composite
def pd_symcov(draw, kappa=None):
    k = draw(kappas) if kappa is None else kappa
    a = draw(st.floats(min_value=0.05, max_value=3.0))
    b = draw(st.floats(min_value=-3.0, max_value=3.0))
    c = draw(st.floats(min_value=-3.0, max_value=3.0))
    S = SymCov(k, a, b, c)
    assume(is_strictly_pd(S))
    # keep away from the boundary so dense oracles stay well conditioned
    assume(spectrum(S)[0] > 1e-3)
    return S


@st.composite
def stable_pair(draw):
    alpha = draw(st.floats(min_value=0.2, max_value=5.0))
    frac = draw(st.floats(min_value=-0.95, max_value=0.95))
    return alpha, frac * alpha

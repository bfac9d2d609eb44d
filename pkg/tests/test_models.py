import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from barrier_moments.errors import ConfigurationError, DomainError, PreconditionError
from barrier_moments.models import (
    VG,
    MomentTable,
    PolynomialModel,
    TruncatedVG,
    apply_generator,
    truncate_for_barriers,
    vg_martingale_constant,
    vg_martingale_drift,
    vg_tail_mass,
    vg_truncated_moment,
)
from barrier_moments.oracles.montecarlo import simulate_terminal
from barrier_moments.oracles.quadrature import (
    check_martingale_constant,
    levy_quadrature,
    printed_martingale_constant,
)
from barrier_moments.poly import BiPoly, T, X


def gbm(b=0.1, sigma=0.1, x0=2.0):
    return PolynomialModel(BiPoly.monomial(0, 1, b), BiPoly.monomial(0, 2, sigma**2), BiPoly(), x0=x0)


def test_gbm_generator_is_diagonal():
    # (A) x^j = (b j + sigma^2 j (j-1) / 2) x^j
    for j in range(6):
        assert apply_generator(gbm(), 0, j).allclose(BiPoly.monomial(0, j, 0.1 * j + 0.005 * j * (j - 1)))


def test_generator_time_and_discount():
    m = gbm().with_discount(BiPoly.const(0.05))
    got = apply_generator(m, 2, 1)
    want = 2 * T * X + 0.1 * T**2 * X - 0.05 * T**2 * X
    assert got.allclose(want)


def test_cir_generator():
    m = PolynomialModel(0.5 * (1 - X), 0.04 * X, BiPoly(), BiPoly.const(0.1), x0=1.0)
    got = apply_generator(m, 0, 2)
    want = 2 * X * 0.5 * (1 - X) + 0.04 * X - 0.1 * X**2
    assert got.allclose(want)


def test_jump_generator_uses_uncompensated_moments():
    levy = VG(0.5, 8.0, 12.0)
    m = PolynomialModel(BiPoly.const(0.3), BiPoly(), BiPoly.const(1.0), levy=levy)
    got = apply_generator(m, 0, 2)
    want = 2 * 0.3 * X + 2 * levy.moment(1) * X + levy.moment(2)
    assert got.allclose(want)


def test_state_dependent_jump_scale():
    table = MomentTable((0.1, 0.2, 0.3))
    m = PolynomialModel(BiPoly(), BiPoly(), 1 + X, levy=table)
    got = apply_generator(m, 0, 2)
    want = 2 * X * 0.1 * (1 + X) + 0.2 * (1 + X) ** 2
    assert got.allclose(want)


def test_missing_moment_names_k():
    m = PolynomialModel(BiPoly(), BiPoly(), BiPoly.const(1.0), levy=MomentTable((0.1, 0.2)))
    with pytest.raises(ConfigurationError, match=r"c\(3\)"):
        apply_generator(m, 0, 3)


poly_coeffs = st.dictionaries(st.tuples(st.integers(0, 1), st.integers(0, 2)), st.floats(-2, 2), max_size=4)


@given(poly_coeffs, poly_coeffs, poly_coeffs, poly_coeffs, st.integers(0, 3), st.integers(0, 4))
def test_generator_linear_in_coefficients(d1, d2, s1, s2, i, j):
    # with r = 0 and no jumps, A_{m1 + m2} = A_{m1} + A_{m2} - d/dt
    m1 = PolynomialModel(BiPoly(d1), BiPoly(s1), BiPoly())
    m2 = PolynomialModel(BiPoly(d2), BiPoly(s2), BiPoly())
    m12 = PolynomialModel(BiPoly(d1) + BiPoly(d2), BiPoly(s1) + BiPoly(s2), BiPoly())
    m0 = PolynomialModel(BiPoly(), BiPoly(), BiPoly())
    lhs = apply_generator(m12, i, j)
    rhs = apply_generator(m1, i, j) + apply_generator(m2, i, j) - apply_generator(m0, i, j)
    assert lhs.allclose(rhs, atol=1e-9)


@given(st.integers(0, 3), st.integers(0, 6))
def test_generator_degree_growth(i, j):
    m = PolynomialModel(0.5 * (1 - X), 0.04 * X, BiPoly(), BiPoly.const(0.1))
    assert apply_generator(m, i, j).total_degree <= i + j


def test_vg_full_moments():
    v = VG(0.5, 8.0, 12.0)
    assert v.moment(1) == pytest.approx(0.5 * (1 / 12 - 1 / 8))
    assert v.moment(2) == pytest.approx(0.5 * (1 / 144 + 1 / 64))
    with pytest.raises(DomainError):
        v.moment(0)


def test_truncated_moments_approach_full_moments():
    v = VG(0.5, 8.0, 12.0)
    for k in range(1, 6):
        assert vg_truncated_moment(0.5, 8, 12, -50, 50, k) == pytest.approx(v.moment(k), rel=1e-12)


@given(
    st.floats(0.1, 2.0), st.floats(1.5, 15.0), st.floats(1.5, 15.0),
    st.floats(0.2, 4.0), st.floats(0.2, 4.0), st.integers(1, 8),
)
def test_truncated_moment_matches_quadrature(C, G, M, lm, lp, k):
    closed = vg_truncated_moment(C, G, M, -lm, lp, k)
    quad = levy_quadrature("moment", C, G, M, -lm, lp, k)
    assert closed == pytest.approx(quad, rel=1e-8, abs=1e-14)


@given(st.floats(0.1, 2.0), st.floats(1.5, 15.0), st.floats(1.5, 15.0), st.floats(0.2, 3.0))
def test_tail_mass_matches_quadrature(C, G, M, L):
    assert vg_tail_mass(C, G, M, -L, L) == pytest.approx(levy_quadrature("tail", C, G, M, -L, L), rel=1e-8)


@given(st.floats(0.1, 2.0), st.floats(0.5, 15.0), st.floats(1.2, 15.0))
def test_martingale_constant_matches_quadrature(C, G, M):
    assert vg_martingale_constant(C, G, M) == pytest.approx(levy_quadrature("exp", C, G, M), rel=1e-8)


def test_martingale_constant_symmetric_case():
    M = 10.0
    c = vg_martingale_constant(0.5, M, M)
    assert c == pytest.approx(0.5 * (math.log(M / (M - 1)) + math.log(M / (M + 1))))
    assert abs(vg_martingale_constant(0.5, 1e6, 1e6)) < 1e-11


def test_printed_variant_is_flagged(caplog):
    assert math.isnan(printed_martingale_constant(0.5, 8.0, 12.0))
    with caplog.at_level(logging.WARNING):
        chk = check_martingale_constant(0.5, 8.0, 12.0)
    assert not chk.printed_ok
    assert chk.rel_error < 1e-8
    assert "martingale constant" in caplog.text


def test_martingale_drift_needs_time_only_rate():
    with pytest.raises(DomainError):
        vg_martingale_drift(X, 0.5, 8, 12)
    d = vg_martingale_drift(0.05 + 0.05 * T**2, 0.5, 8, 12)
    assert d[(0, 0)] == pytest.approx(0.05 - vg_martingale_constant(0.5, 8, 12))


def test_truncation_kills_at_removed_rate():
    base = PolynomialModel(BiPoly.const(0.1), BiPoly(), BiPoly.const(1.0), levy=VG(0.5, 3.0, 6.0))
    m = truncate_for_barriers(base, (-1.0, 1.0), 1.0)
    assert isinstance(m.levy, TruncatedVG)
    assert m.levy.L_plus == pytest.approx(2.0) and m.levy.L_minus == pytest.approx(-2.0)
    lam = vg_tail_mass(0.5, 3.0, 6.0, -2.0, 2.0)
    assert m.discount[(0, 0)] == pytest.approx(lam)
    assert truncate_for_barriers(base, (-1.0, 1.0), 1.0, kill=False).discount.is_zero()


def test_truncation_scales_with_jump_intensity():
    base = PolynomialModel(BiPoly(), BiPoly(), BiPoly.const(2.0), levy=VG(0.5, 3.0, 6.0))
    m = truncate_for_barriers(base, (0.0, 1.0), 1.0)
    assert m.levy.L_plus == pytest.approx(0.5)


def test_truncation_preconditions():
    base = PolynomialModel(BiPoly(), BiPoly(), X, levy=VG(0.5, 3.0, 6.0))
    with pytest.raises(PreconditionError):
        truncate_for_barriers(base, (-1.0, 1.0), 1.0)
    with pytest.raises(PreconditionError):
        truncate_for_barriers(base, (0.0, math.inf), 1.0)
    no_jumps = PolynomialModel(BiPoly(), BiPoly.const(1.0), BiPoly())
    assert truncate_for_barriers(no_jumps, (0.0, 1.0), 1.0) is no_jumps


def test_simulated_vg_increments_match_generator():
    # for a Levy process: E[X_t] = x0 + t A(x)(x0) and Var[X_t] = t c(2)
    levy = VG(0.5, 8.0, 12.0)
    m = PolynomialModel(BiPoly.const(0.2), BiPoly(), BiPoly.const(1.0), levy=levy)
    t = 0.5
    xs = simulate_terminal(m, 0.0, 0.0, t, 5, 200_000, seed=11)
    mean = apply_generator(m, 0, 1)[(0, 0)] * t
    se = xs.std() / math.sqrt(xs.size)
    assert abs(xs.mean() - mean) < 4 * se
    assert xs.var() == pytest.approx(t * levy.moment(2), rel=0.02)


def test_exp_vg_discounted_price_is_martingale():
    C, G, M, r = 0.5, 8.0, 12.0, 0.05
    drift = vg_martingale_drift(BiPoly.const(r), C, G, M)
    m = PolynomialModel(drift, BiPoly(), BiPoly.const(1.0), levy=VG(C, G, M))
    xs = simulate_terminal(m, 0.0, 0.0, 1.0, 4, 200_000, seed=3)
    disc = np.exp(-r + xs)
    assert abs(disc.mean() - 1.0) < 4 * disc.std() / math.sqrt(xs.size)

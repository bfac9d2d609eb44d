import math

import numpy as np
import pytest
from scipy.integrate import quad

from barrier_moments import ContractSpec, gbm_double_knockout
from barrier_moments.errors import ConfigurationError, DomainError
from barrier_moments.moment_lp import rectangle, vsegment
from barrier_moments.oracles import (
    MCConfig,
    black_scholes_forward_call,
    gbm_double_barrier_exact,
    levy_quadrature,
    mc_price,
)
from barrier_moments.poly import BiPoly


def eigen_series_price(b, sigma, B_d, B_u, K, x0, T, terms=400):
    """Sine-eigenfunction expansion of the killed log-price density, integrated numerically."""
    lo, hi, y0, k = math.log(B_d), math.log(B_u), math.log(x0), math.log(K)
    w = hi - lo
    nu = b - 0.5 * sigma**2
    n = np.arange(1, terms + 1)
    decay = np.exp(-0.5 * sigma**2 * (n * math.pi / w) ** 2 * T)
    a0 = np.sin(n * math.pi * (y0 - lo) / w)

    def density(y):
        tilt = math.exp(nu / sigma**2 * (y - y0) - 0.5 * nu**2 * T / sigma**2)
        return tilt * (2 / w) * float(np.sum(a0 * np.sin(n * math.pi * (y - lo) / w) * decay))

    val, _ = quad(lambda y: (math.exp(y) - K) * density(y), k, hi, epsabs=1e-13, limit=400)
    return val


@pytest.mark.parametrize("b,sigma", [(0.1, 0.1), (0.2, 0.2), (0.05, 0.4)])
def test_image_series_matches_eigen_expansion(b, sigma):
    args = (b, sigma, 1.0, 5.0, 1.3, 2.0, 1.0)
    assert gbm_double_barrier_exact(*args) == pytest.approx(eigen_series_price(*args), abs=1e-9)


def test_exact_reference_values():
    assert round(gbm_double_barrier_exact(0.1, 0.1, 1.0, 5.0, 1.3, 2.0, 1.0), 4) == 0.9103
    assert round(gbm_double_barrier_exact(0.2, 0.2, 1.0, 5.0, 1.3, 2.0, 1.0), 4) == 1.1421


def test_far_barriers_recover_forward_call():
    v = gbm_double_barrier_exact(0.1, 0.3, 1e-4, 1e4, 1.3, 2.0, 1.0)
    assert v == pytest.approx(black_scholes_forward_call(0.1, 0.3, 1.3, 2.0, 1.0), rel=1e-10)


def test_exact_edge_cases():
    assert gbm_double_barrier_exact(0.1, 0.2, 1.0, 5.0, 5.0, 2.0, 1.0) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ConfigurationError):
        gbm_double_barrier_exact(0.1, 0.2, 1.0, 5.0, 6.0, 2.0, 1.0)


def test_exact_non_convergence_guard(monkeypatch):
    from barrier_moments.errors import NumericalError
    from barrier_moments.oracles import exact

    monkeypatch.setattr(exact, "TERM_TOL", -1.0)
    monkeypatch.setattr(exact, "MAX_TERMS", 5)
    with pytest.raises(NumericalError) as info:
        exact.gbm_double_barrier_exact(0.1, 0.2, 1.0, 5.0, 1.3, 2.0, 1.0)
    assert info.value.estimate == pytest.approx(0.9, abs=0.2)


def test_quadrature_domain_errors():
    with pytest.raises(DomainError):
        levy_quadrature("moment", 0.5, 8, 12, -1, 1, k=0)
    with pytest.raises(DomainError):
        levy_quadrature("exp", 0.5, 8, 0.9)
    with pytest.raises(DomainError):
        levy_quadrature("wobble", 0.5, 8, 12)


def test_mc_config_validation():
    with pytest.raises(ConfigurationError):
        MCConfig(paths=0)
    with pytest.raises(ConfigurationError):
        MCConfig(paths=11, antithetic=True)
    with pytest.raises(ConfigurationError):
        MCConfig(scheme="milstein")


def test_mc_reproducible(vg_case1):
    cfg = MCConfig(paths=30_000, steps_per_year=100, seed=5)
    a = mc_price(vg_case1.sim_model, vg_case1.contract, cfg)
    b = mc_price(vg_case1.sim_model, vg_case1.contract, cfg)
    assert a == b
    c = mc_price(vg_case1.sim_model, vg_case1.contract, MCConfig(paths=30_000, steps_per_year=100, seed=6))
    assert c.estimate != a.estimate


def test_mc_zero_payoff(gbm_case1):
    zero = ContractSpec(
        gbm_case1.contract.barriers, 1.0,
        terminal=((vsegment(1.0, 1.0, 5.0), BiPoly()),),
        running=((rectangle(0.0, 1.0, 1.0, 5.0), BiPoly()),),
    )
    res = mc_price(gbm_case1.sim_model, zero, MCConfig(paths=1000, steps_per_year=50))
    assert res.estimate == 0.0 and res.std_error == 0.0


def test_antithetic_reduces_standard_error(gbm_case1):
    wins = 0
    for rep in range(10):
        plain = mc_price(gbm_case1.sim_model, gbm_case1.contract, MCConfig(20_000, 50, seed=100 + rep))
        anti = mc_price(
            gbm_case1.sim_model, gbm_case1.contract, MCConfig(20_000, 50, seed=100 + rep, antithetic=True)
        )
        wins += anti.std_error <= plain.std_error
    assert wins >= 9


def test_discrete_monitoring_bias_direction():
    # tight barriers so that monitoring frequency matters
    case = gbm_double_knockout(0.05, 0.3, 1.5, 2.6, 1.8, 2.0, 1.0)
    est = [mc_price(case.sim_model, case.contract, MCConfig(100_000, s, seed=9)) for s in (250, 1000, 4000)]
    for a, b in zip(est, est[1:]):
        assert b.estimate <= a.estimate + 3 * math.hypot(a.std_error, b.std_error)
    exact = gbm_double_barrier_exact(0.05, 0.3, 1.5, 2.6, 1.8, 2.0, 1.0)
    assert est[0].estimate > exact


@pytest.mark.parametrize("b,sigma", [(0.1, 0.1), (0.2, 0.2)])
def test_mc_agrees_with_exact(b, sigma):
    case = gbm_double_knockout(b, sigma, 1.0, 5.0, 1.3, 2.0, 1.0)
    res = mc_price(case.sim_model, case.contract, MCConfig(200_000, 1000, seed=21))
    exact = gbm_double_barrier_exact(b, sigma, 1.0, 5.0, 1.3, 2.0, 1.0)
    bias_allowance = 5e-4
    assert abs(res.estimate - exact) <= 3 * res.std_error + bias_allowance


def test_cir_full_truncation_keeps_running(cir_case1):
    res = mc_price(cir_case1.sim_model, cir_case1.contract, MCConfig(20_000, 250), state_floor=0.0)
    assert 0.9 < res.estimate < 1.0


def test_moment_estimates_satisfy_mass_row(gbm_case1):
    from barrier_moments.moment_lp import build_lp
    from barrier_moments.oracles import mc_moment_estimates

    lp = build_lp(gbm_case1.model, gbm_case1.pieces, gbm_case1.objective, 4, "min")
    est = mc_moment_estimates(
        gbm_case1.sim_model, lp.layout, gbm_case1.contract.barriers, 1.0,
        MCConfig(20_000, 100, scheme="log-euler"),
    )
    A = lp.A_eq.toarray()
    resid = np.abs(A @ est.mean - lp.b_eq)
    assert np.all(resid <= 4 * est.std_error(A) + 1e-9 * np.abs(A).max(axis=1))
    assert est.mean.shape == (lp.n_vars,)
    with pytest.raises(ConfigurationError):
        two_occ = list(gbm_case1.pieces) + [gbm_case1.pieces[-1].__class__("mu2", rectangle(0, 1, 1, 5), "occupation")]
        from barrier_moments.moment_lp import Layout

        mc_moment_estimates(gbm_case1.sim_model, Layout(tuple(two_occ), {p.name: 2 for p in two_occ}),
                            gbm_case1.contract.barriers, 1.0, MCConfig(100, 10))

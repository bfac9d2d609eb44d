import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from barrier_moments import compute_bounds
from barrier_moments.errors import ConfigurationError
from barrier_moments.moment_lp import build_lp
from barrier_moments.pricing import bounds_ladder
from barrier_moments.simplex import simplex
from barrier_moments.solvers import default_backend, solve_bounds, solve_lp


def test_simplex_textbook():
    # max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
    res = simplex([-3, -5], A_ub=[[1, 0], [0, 2], [3, 2]], b_ub=[4, 12, 18])
    assert res.status == "optimal"
    assert res.fun == pytest.approx(-36)
    assert np.allclose(res.x, [2, 6])


def test_simplex_infeasible_and_unbounded():
    assert simplex([1], A_eq=[[1]], b_eq=[-1]).status == "infeasible"
    assert simplex([-1], A_ub=[[-1]], b_ub=[0]).status == "unbounded"


@given(st.integers(0, 10_000))
def test_simplex_agrees_with_highs_on_random_lps(seed):
    rng = np.random.default_rng(seed)
    n, m_eq, m_ub = 5, 2, 4
    x_feas = rng.random(n)
    A_eq = rng.normal(size=(m_eq, n))
    A_ub = rng.normal(size=(m_ub, n))
    b_eq = A_eq @ x_feas
    b_ub = A_ub @ x_feas + rng.random(m_ub)
    c = rng.normal(size=n)
    A_box, b_box = np.eye(n), np.full(n, 3.0)
    A_ub2, b_ub2 = np.vstack([A_ub, A_box]), np.concatenate([b_ub, b_box])
    ours = simplex(c, A_eq, b_eq, A_ub2, b_ub2)
    ref = linprog(c, A_ub=A_ub2, b_ub=b_ub2, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert ours.status == "optimal" and ref.status == 0
    assert ours.fun == pytest.approx(ref.fun, abs=1e-7)


@pytest.mark.parametrize("N", [3, 4, 5, 6])
def test_backends_agree_on_small_moment_lps(gbm_case1, N):
    obj = gbm_case1.objective
    for sense in ("min", "max"):
        lp = build_lp(gbm_case1.model, gbm_case1.pieces, obj, N, sense)
        values = [solve_lp(lp, b).value for b in ("highs-ds", "highs", "simplex")]
        assert max(values) - min(values) < 1e-6


def test_env_backend(monkeypatch):
    monkeypatch.setenv("BARRIER_MOMENTS_SOLVER", "highs")
    assert default_backend() == "highs"
    monkeypatch.setenv("BARRIER_MOMENTS_SOLVER", "cplex")
    with pytest.raises(ConfigurationError):
        default_backend()


def test_solve_bounds_argument_order(gbm_case1):
    obj = gbm_case1.objective
    lo = build_lp(gbm_case1.model, gbm_case1.pieces, obj, 3, "min")
    hi = build_lp(gbm_case1.model, gbm_case1.pieces, obj, 3, "max")
    with pytest.raises(ConfigurationError):
        solve_bounds(hi, lo)
    res = solve_bounds(lo, hi)
    assert res.ok and res.consistent and res.midpoint is not None


def test_ladder_order_independent_of_workers(vg_case1):
    serial = bounds_ladder(vg_case1, [6, 4, 5])
    threaded = bounds_ladder(vg_case1, [6, 4, 5], workers=3)
    assert [r.N for r in threaded] == [6, 4, 5]
    assert [(r.lower, r.upper) for r in serial] == [(r.lower, r.upper) for r in threaded]


def test_bounds_are_reproducible(cir_case1):
    a, b = compute_bounds(cir_case1, 6), compute_bounds(cir_case1, 6)
    assert (a.lower, a.upper) == (b.lower, b.upper)

"""Fast invariant checks run by ``barrier-moments selftest``."""

from __future__ import annotations

import math

import numpy as np

from .certificates import interval_certificate
from .contracts import gbm_double_knockout
from .models import vg_tail_mass, vg_truncated_moment
from .moment_lp import hausdorff_rows_1d
from .oracles.exact import black_scholes_forward_call, gbm_double_barrier_exact
from .oracles.quadrature import levy_quadrature
from .poly import AffineMap1D, T, X, poly_affine_sub
from .pricing import bounds_ladder


def _poly_roundtrip():
    p = (1 + 2 * T - X) ** 3 * X
    m = AffineMap1D(0.3, 1.7)
    back = poly_affine_sub(poly_affine_sub(p, m, m.inverse()), m.inverse(), m)
    return back.allclose(p), ""


def _hausdorff_uniform():
    N = 8
    moments = [1.0 / (k + 1) for k in range(N + 1)]
    worst = min(sum(c * moments[k] for k, c in row.items()) for row in hausdorff_rows_1d(N))
    return worst >= -1e-12, f"min row value {worst:.2e}"


def _certificates():
    rng = np.random.default_rng(7)
    w = rng.dirichlet(np.ones(3))
    pts = rng.random(3)
    good = [float(np.sum(w * pts**k)) for k in range(9)]
    bad = list(good)
    bad[2] = 0.5 * good[1] ** 2 / good[0]
    return interval_certificate(good) and not interval_certificate(bad), ""


def _quadrature():
    C, G, M = 0.5, 8.0, 12.0
    rel = max(
        abs(vg_truncated_moment(C, G, M, -2, 2, k) / levy_quadrature("moment", C, G, M, -2, 2, k) - 1)
        for k in range(1, 9)
    )
    lam = vg_tail_mass(C, 3.0, 6.0, -1.0, 1.0)
    rel = max(rel, abs(lam / levy_quadrature("tail", C, 3.0, 6.0, -1.0, 1.0) - 1))
    return rel < 1e-8, f"max rel diff {rel:.1e}"


def _exact_far_barriers():
    v = gbm_double_barrier_exact(0.1, 0.3, 1e-3, 1e3, 1.3, 2.0, 1.0)
    ref = black_scholes_forward_call(0.1, 0.3, 1.3, 2.0, 1.0)
    return math.isclose(v, ref, rel_tol=1e-9), f"{v:.8f} vs {ref:.8f}"


def _gbm_ladder():
    case = gbm_double_knockout(0.1, 0.1, 1.0, 5.0, 1.3, 2.0, 1.0)
    res = bounds_ladder(case, range(4, 9))
    mono = all(b.lower >= a.lower - 1e-7 and b.upper <= a.upper + 1e-7 for a, b in zip(res, res[1:]))
    exact = gbm_double_barrier_exact(0.1, 0.1, 1.0, 5.0, 1.3, 2.0, 1.0)
    sandwich = all(r.lower - 1e-7 <= exact <= r.upper + 1e-7 for r in res)
    return mono and sandwich, f"N=8 [{res[-1].lower:.4f}, {res[-1].upper:.4f}] exact {exact:.4f}"


CHECKS = (
    ("polynomial affine round trip", _poly_roundtrip),
    ("Hausdorff rows accept uniform moments", _hausdorff_uniform),
    ("PSD certificates", _certificates),
    ("closed forms match quadrature", _quadrature),
    ("image series matches Black-Scholes with far barriers", _exact_far_barriers),
    ("GBM bounds monotone and bracketing", _gbm_ladder),
)


def run_selftest() -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, do not abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out

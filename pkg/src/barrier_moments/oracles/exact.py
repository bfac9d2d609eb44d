"""Image-series price of a double knock-out call under GBM (undiscounted)."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import log_ndtr

from ..errors import ConfigurationError, NumericalError

MAX_TERMS = 10_000
TERM_TOL = 1e-12


def _log_gauss_mass(lo: float, hi: float) -> float:
    """``log(Phi(hi) - Phi(lo))`` without cancellation in either tail."""
    if hi <= lo:
        return -math.inf
    if lo > 0:
        lo, hi = -hi, -lo
    a, b = log_ndtr(lo), log_ndtr(hi)
    if a - b > -1e-300:
        return -math.inf
    return float(b + np.log1p(-math.exp(a - b)))


def _tilted_mass(a: float, m: float, s: float, lo: float, hi: float) -> float:
    """``int_lo^hi e^{a y} N(y; m, s^2) dy``."""
    shift = m + a * s * s
    lg = _log_gauss_mass((lo - shift) / s, (hi - shift) / s)
    if lg == -math.inf:
        return 0.0
    return math.exp(a * m + 0.5 * a * a * s * s + lg)


def gbm_double_barrier_exact(b, sigma, B_d, B_u, K, x0, T) -> float:
    """``E[(S_T - K)^+ ; S stays in [B_d, B_u] on [0, T]]`` for ``dS = b S dt + sigma S dW``.

    Uses the method of images for Brownian motion with drift killed at two
    levels in log space; the terms are summed outward until both directions
    fall below 1e-12.
    """
    if not (0 < B_d < B_u) or not B_d <= K <= B_u:
        raise ConfigurationError("need 0 < B_d <= K <= B_u and B_d < B_u")
    if not B_d < x0 < B_u:
        return 0.0
    lo, hi, y0, k = math.log(B_d), math.log(B_u), math.log(x0), math.log(K)
    w = hi - lo
    nu = b - 0.5 * sigma**2
    beta = nu / sigma**2
    s = sigma * math.sqrt(T)
    pref = -0.5 * nu * nu * T / sigma**2 - beta * y0

    def term(n: int) -> float:
        val = 0.0
        for m, sign in ((y0 + 2 * n * w, 1.0), (2 * lo - y0 + 2 * n * w, -1.0)):
            val += sign * (
                _tilted_mass(1.0 + beta, m, s, k, hi) - K * _tilted_mass(beta, m, s, k, hi)
            )
        return val * math.exp(pref)

    total = term(0)
    for n in range(1, MAX_TERMS):
        up, down = term(n), term(-n)
        total += up + down
        if abs(up) < TERM_TOL and abs(down) < TERM_TOL:
            return total
    raise NumericalError("image series did not converge", estimate=total)


def black_scholes_forward_call(b, sigma, K, x0, T) -> float:
    """Undiscounted ``E[(S_T - K)^+]`` without barriers."""
    sd = sigma * math.sqrt(T)
    d1 = (math.log(x0 / K) + (b + 0.5 * sigma**2) * T) / sd
    d2 = d1 - sd
    Phi = lambda z: 0.5 * math.erfc(-z / math.sqrt(2.0))
    return x0 * math.exp(b * T) * Phi(d1) - K * Phi(d2)

"""Polynomial jump-diffusions, their generator on monomials, and Levy truncation.

The jump part uses the uncompensated convention

    B f(t, x) = int [f(t, x + lambda(t, x) y) - f(t, x)] Lambda(dy),

so ``drift`` is the already-adjusted drift of the process. For a monomial
``t^i x^j`` this gives ``t^i sum_k C(j, k) x^(j-k) lambda^k c(k)`` with
``c(k)`` the k-th moment of the Levy measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Union

import numpy as np

from .errors import ConfigurationError, DomainError, PreconditionError
from .poly import BiPoly, binom, poly_diff
from .special import exp1, gammainc_lower

DEFAULT_MOMENT_CAP = 32


@dataclass(frozen=True)
class VG:
    """Variance gamma Levy density ``C e^{-M y}/y`` (y > 0), ``C e^{-G|y|}/|y|`` (y < 0)."""

    C: float
    G: float
    M: float

    def __post_init__(self):
        if min(self.C, self.G, self.M) <= 0:
            raise DomainError("VG parameters C, G, M must be positive")

    def moment(self, k: int) -> float:
        if k < 1:
            raise DomainError("VG has infinite activity at the origin; c(0) diverges")
        g = math.gamma(k)
        return self.C * g * (self.M**-k + (-1) ** k * self.G**-k)


@dataclass(frozen=True)
class TruncatedVG:
    """VG density restricted to jumps in ``[L_minus, L_plus]``.

    ``moments`` caches c(1)..c(cap); ``lambda_star`` is the removed mass.
    """

    C: float
    G: float
    M: float
    L_minus: float
    L_plus: float
    cap: int = DEFAULT_MOMENT_CAP
    moments: tuple[float, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if not self.L_minus < 0 < self.L_plus:
            raise DomainError("truncation needs L_minus < 0 < L_plus")
        if min(self.C, self.G, self.M) <= 0:
            raise DomainError("VG parameters C, G, M must be positive")
        if not self.moments:
            cache = tuple(
                vg_truncated_moment(self.C, self.G, self.M, self.L_minus, self.L_plus, k)
                for k in range(1, self.cap + 1)
            )
            object.__setattr__(self, "moments", cache)

    def moment(self, k: int) -> float:
        if k < 1:
            raise DomainError("VG has infinite activity at the origin; c(0) diverges")
        if k <= len(self.moments):
            return self.moments[k - 1]
        return vg_truncated_moment(self.C, self.G, self.M, self.L_minus, self.L_plus, k)

    @cached_property
    def lambda_star(self) -> float:
        return vg_tail_mass(self.C, self.G, self.M, self.L_minus, self.L_plus)

    @property
    def base(self) -> VG:
        return VG(self.C, self.G, self.M)


@dataclass(frozen=True)
class MomentTable:
    """Levy measure given only through its moments ``c[k-1] = c(k)``."""

    c: tuple[float, ...]
    lambda_star: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        if self.lambda_star < 0:
            raise DomainError("lambda_star must be non-negative")

    def moment(self, k: int) -> float:
        if k < 1 or k > len(self.c):
            raise ConfigurationError(f"Levy moment c({k}) is not available in the moment table")
        return self.c[k - 1]


LevyMeasureSpec = Union[None, VG, TruncatedVG, MomentTable]


@dataclass(frozen=True)
class PolynomialModel:
    """``dX = b dt + sigma dW + lambda dJ`` with discount rate ``r``, all polynomial in (t, x)."""

    drift: BiPoly
    sigma2: BiPoly
    jump_scale: BiPoly = field(default_factory=lambda: BiPoly.const(1.0))
    discount: BiPoly = field(default_factory=BiPoly)
    levy: LevyMeasureSpec = None
    x0: float = 0.0
    t0: float = 0.0

    def with_discount(self, r: BiPoly) -> "PolynomialModel":
        return replace(self, discount=r)

    @property
    def has_jumps(self) -> bool:
        return self.levy is not None and not self.jump_scale.is_zero()


def apply_generator(model: PolynomialModel, i: int, j: int) -> BiPoly:
    """Expand ``(A - r) t^i x^j`` as a polynomial in (t, x)."""
    f = BiPoly.monomial(i, j)
    out = poly_diff(f, "t") - model.discount * f
    if j >= 1:
        out = out + model.drift * poly_diff(f, "x")
    if j >= 2:
        out = out + 0.5 * model.sigma2 * poly_diff(f, "x", 2)
    if model.has_jumps and j >= 1:
        lam_pow = BiPoly.const(1.0)
        for k in range(1, j + 1):
            lam_pow = lam_pow * model.jump_scale
            out = out + binom(j, k) * model.levy.moment(k) * BiPoly.monomial(i, j - k) * lam_pow
    return out


def vg_truncated_moment(C: float, G: float, M: float, L_minus: float, L_plus: float, k: int) -> float:
    """k-th moment of the VG density restricted to ``[L_minus, L_plus]``."""
    if k < 1:
        raise DomainError("infinite activity at origin: c(0) of a VG measure diverges")
    up = gammainc_lower(k, M * L_plus) / M**k if L_plus > 0 else 0.0
    down = gammainc_lower(k, G * -L_minus) / G**k if L_minus < 0 else 0.0
    return C * (up + (-1) ** k * down)


def vg_tail_mass(C: float, G: float, M: float, L_minus: float, L_plus: float) -> float:
    """VG mass outside ``[L_minus, L_plus]``, i.e. the rate of barrier-crossing jumps."""
    if not L_minus < 0 < L_plus:
        raise DomainError("tail mass needs L_minus < 0 < L_plus")
    return C * (exp1(M * L_plus) + exp1(G * -L_minus))


def vg_martingale_constant(C: float, G: float, M: float) -> float:
    """``int (e^y - 1) eta(dy)`` for the VG density (Frullani integrals)."""
    if M <= 1:
        raise DomainError("exp(X) is not integrable unless M > 1")
    return C * (math.log(M / (M - 1.0)) + math.log(G / (G + 1.0)))


def vg_martingale_drift(r_poly: BiPoly, C: float, G: float, M: float) -> BiPoly:
    """Drift making ``exp(-alpha_t + X_t)`` a martingale under VG jumps: ``r(t) - c``."""
    if r_poly.deg_x > 0:
        raise DomainError("martingale drift expects a discount depending on t only")
    return r_poly - vg_martingale_constant(C, G, M)


def min_on_box(p: BiPoly, t_lo: float, t_hi: float, x_lo: float, x_hi: float, n: int = 201) -> float:
    """Grid minimum of ``p`` over a box (exact for constants)."""
    if p.is_constant():
        return p[(0, 0)]
    tt, xx = np.meshgrid(np.linspace(t_lo, t_hi, n), np.linspace(x_lo, x_hi, n))
    return float(np.min(p(tt, xx)))


def truncate_for_barriers(
    model: PolynomialModel,
    barriers: tuple[float, float],
    T: float,
    cap: int = DEFAULT_MOMENT_CAP,
    kill: bool = True,
) -> PolynomialModel:
    """Remove jumps that always knock out the contract and kill at their rate.

    Jumps of J beyond ``L = +-(b_plus - b_minus) / min lambda`` push X out of the
    barrier interval, so the Levy measure is restricted to ``[L_minus, L_plus]``
    and the removed mass ``lambda_star`` is added to the discount rate.
    With ``kill=False`` the discount is left alone; the caller must then apply
    the survival factor ``exp(-lambda_star T)`` itself.
    """
    b_minus, b_plus = barriers
    if not (math.isfinite(b_minus) and math.isfinite(b_plus)):
        raise PreconditionError("unbounded barrier interval is not supported by the LP path")
    if b_minus >= b_plus:
        raise PreconditionError("barrier interval must have b_minus < b_plus")
    if not model.has_jumps:
        return model
    lam_min = min_on_box(model.jump_scale, 0.0, T, b_minus, b_plus)
    if lam_min <= 0:
        raise PreconditionError(f"jump scale must be positive on the domain (min {lam_min:g})")
    width = b_plus - b_minus
    L_plus, L_minus = width / lam_min, -width / lam_min
    levy = model.levy
    if isinstance(levy, TruncatedVG):
        levy = levy.base
    if not isinstance(levy, VG):
        raise ConfigurationError(f"cannot truncate Levy measure of type {type(levy).__name__}")
    trunc = TruncatedVG(levy.C, levy.G, levy.M, L_minus, L_plus, cap=cap)
    if not kill:
        return replace(model, levy=trunc)
    return replace(model, levy=trunc, discount=model.discount + trunc.lambda_star)

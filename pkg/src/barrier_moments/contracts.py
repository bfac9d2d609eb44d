"""Payoff decompositions and the four reference case studies.

A contract is a knock-out on ``[B_d, B_u]`` with a piecewise-polynomial
terminal payoff on ``{T} x [B_d, B_u]`` and a piecewise-polynomial running
payoff on ``[0, T] x [B_d, B_u]``. Each case builder returns the LP model
(Levy measure truncated where needed), the untruncated model for simulation,
the contract, and the measure pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .models import VG, PolynomialModel, truncate_for_barriers, vg_martingale_drift, vg_truncated_moment
from .moment_lp import MeasurePiece, MomentObjective, SupportSet, hsegment, rectangle, vsegment
from .poly import BiPoly, X

_TOL = 1e-12


@dataclass(frozen=True)
class ContractSpec:
    barriers: tuple[float, float]
    maturity: float
    terminal: tuple[tuple[SupportSet, BiPoly], ...]
    running: tuple[tuple[SupportSet, BiPoly], ...] = ()
    discount_factor: float = 1.0

    def __post_init__(self):
        lo, hi = self.barriers
        if not lo < hi:
            raise ConfigurationError("barriers must satisfy B_d < B_u")
        if self.maturity <= 0:
            raise ConfigurationError("maturity must be positive")
        check_partition(self)

    def terminal_payoff(self, x) -> np.ndarray:
        return _piecewise(self.terminal, self.maturity, np.asarray(x, float))

    def running_payoff(self, t, x) -> np.ndarray:
        return _piecewise(self.running, t, np.asarray(x, float))


def _piecewise(parts, t, x):
    out = np.zeros(np.broadcast(np.asarray(t), x).shape)
    done = np.zeros(out.shape, bool)
    for support, poly in parts:
        hit = support.contains(t, x) & ~done
        if hit.any():
            out = np.where(hit, poly(t, x), out)
            done |= hit
    return out


def check_partition(contract: ContractSpec) -> None:
    """Terminal supports tile {T} x [B_d, B_u]; running supports tile the rectangle."""
    lo, hi = contract.barriers
    T = contract.maturity
    segs = sorted((s.x_lo, s.x_hi) for s, _ in contract.terminal)
    for s, _ in contract.terminal:
        if s.kind not in ("vsegment", "point") or abs(s.t_lo - T) > _TOL:
            raise ConfigurationError("terminal pieces must lie on t = T")
    _check_cover(segs, lo, hi, "terminal")
    if contract.running:
        for s, _ in contract.running:
            if abs(s.t_lo) > _TOL or abs(s.t_hi - T) > _TOL:
                raise ConfigurationError("running pieces must span [0, T] in time")
        _check_cover(sorted((s.x_lo, s.x_hi) for s, _ in contract.running), lo, hi, "running")


def _check_cover(segs, lo, hi, what):
    if not segs or abs(segs[0][0] - lo) > _TOL or abs(segs[-1][1] - hi) > _TOL:
        raise ConfigurationError(f"{what} pieces must cover [{lo}, {hi}]")
    for (a0, a1), (b0, b1) in zip(segs, segs[1:]):
        if abs(a1 - b0) > _TOL:
            raise ConfigurationError(f"{what} pieces overlap or leave a gap near x={a1}")


def payoff_to_objective(contract: ContractSpec, pieces: list[MeasurePiece]) -> MomentObjective:
    """Attach each payoff polynomial to the measure piece with the same support."""
    terms: dict[str, BiPoly] = {}
    for parts, role in ((contract.terminal, "exit"), (contract.running, "occupation")):
        for support, poly in parts:
            match = [p for p in pieces if p.support == support and p.role == role]
            if not match:
                raise ConfigurationError(f"no {role} piece with support {support}")
            if poly.is_zero():
                continue
            name = match[0].name
            terms[name] = terms.get(name, BiPoly()) + poly
    return MomentObjective(terms, contract.discount_factor)


@dataclass(frozen=True)
class PricingCase:
    name: str
    model: PolynomialModel
    contract: ContractSpec
    pieces: list[MeasurePiece]
    sim_model: PolynomialModel
    reference: float | None = None
    reference_se: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def objective(self) -> MomentObjective:
        return payoff_to_objective(self.contract, self.pieces)


def _order(B_d, K, B_u, x0):
    if not B_d < B_u:
        raise ConfigurationError("need B_d < B_u")
    if K is not None and not B_d <= K <= B_u:
        raise ConfigurationError("need B_d <= K <= B_u")
    if not B_d < x0 < B_u:
        raise ConfigurationError("initial point must lie strictly inside the barriers")


def _knockout_call(B_d, B_u, K, T, pieces_factor=1.0):
    low, high = vsegment(T, B_d, K), vsegment(T, K, B_u)
    contract = ContractSpec(
        (B_d, B_u), T,
        terminal=((low, BiPoly()), (high, X - K)),
        running=((rectangle(0.0, T, B_d, B_u), BiPoly()),),
        discount_factor=pieces_factor,
    )
    return contract, low, high


def gbm_double_knockout(b, sigma, B_d, B_u, K, x0, T) -> PricingCase:
    """Double knock-out call under GBM, undiscounted: ``E[(S_T - K)^+ ; tau >= T]``."""
    _order(B_d, K, B_u, x0)
    model = PolynomialModel(
        drift=BiPoly.monomial(0, 1, b),
        sigma2=BiPoly.monomial(0, 2, sigma**2),
        jump_scale=BiPoly(),
        x0=x0,
    )
    contract, low, high = _knockout_call(B_d, B_u, K, T)
    pieces = [
        MeasurePiece("nu_up", hsegment(0.0, T, B_u)),
        MeasurePiece("nu_down", hsegment(0.0, T, B_d)),
        MeasurePiece("nu_T_low", low),
        MeasurePiece("nu_T_high", high),
        MeasurePiece("mu", rectangle(0.0, T, B_d, B_u), "occupation"),
    ]
    params = dict(b=b, sigma=sigma, B_d=B_d, B_u=B_u, K=K, x0=x0, T=T)
    return PricingCase("gbm-dko", model, contract, pieces, model, params=params)


def vg_double_knockout(
    b, C, G, M, B_d, B_u, K, x0, T, pstar_shortcut=False, drift_convention="levy-ito"
) -> PricingCase:
    """Double knock-out call on ``dX = b dt + dZ`` with Z a VG Levy process.

    With ``drift_convention="levy-ito"`` (default) ``b`` is the drift in the
    Levy-Ito form, where jumps in (-1, 1) are compensated, so the generator
    drift is ``b - int_{-1}^{1} y eta(dy)``. With ``"uncompensated"`` ``b`` is
    used in the generator as given.

    By default big jumps are handled by killing (discount raised by the removed
    Levy mass). ``pstar_shortcut`` instead leaves the discount at zero and
    multiplies the optimum by ``p* = exp(-lambda_star T)``, which is exact only
    because the payoff sits on ``t = T``.
    """
    _order(B_d, K, B_u, x0)
    if drift_convention == "levy-ito":
        b_gen = b - vg_truncated_moment(C, G, M, -1.0, 1.0, 1)
    elif drift_convention == "uncompensated":
        b_gen = b
    else:
        raise ConfigurationError(f"unknown drift convention {drift_convention!r}")
    base = PolynomialModel(
        drift=BiPoly.const(b_gen),
        sigma2=BiPoly(),
        jump_scale=BiPoly.const(1.0),
        levy=VG(C, G, M),
        x0=x0,
    )
    model = truncate_for_barriers(base, (B_d, B_u), T, kill=not pstar_shortcut)
    L = model.levy.L_plus
    pstar = math.exp(-model.levy.lambda_star * T)
    contract, low, high = _knockout_call(B_d, B_u, K, T, pstar if pstar_shortcut else 1.0)
    pieces = [
        MeasurePiece("nu_up", rectangle(0.0, T, B_u, B_u + L)),
        MeasurePiece("nu_down", rectangle(0.0, T, B_d - L, B_d)),
        MeasurePiece("nu_T_low", low),
        MeasurePiece("nu_T_high", high),
        MeasurePiece("mu", rectangle(0.0, T, B_d, B_u), "occupation"),
    ]
    params = dict(
        b=b, generator_drift=b_gen, C=C, G=G, M=M, B_d=B_d, B_u=B_u, K=K, x0=x0, T=T, L=L, p_star=pstar
    )
    return PricingCase("vg-dko", model, contract, pieces, base, params=params)


def cir_american_corridor(a, b, sigma, r, B_d, B_u, x0, T) -> PricingCase:
    """Discounted running payment of one unit per time while the CIR rate stays in the corridor."""
    if a <= 0 or b <= 0:
        raise ConfigurationError("CIR needs a > 0 and b > 0")
    _order(B_d, None, B_u, x0)
    model = PolynomialModel(
        drift=BiPoly({(0, 0): a * b, (0, 1): -a}),
        sigma2=BiPoly.monomial(0, 1, sigma**2),
        jump_scale=BiPoly(),
        discount=BiPoly.const(r),
        x0=x0,
    )
    occ = rectangle(0.0, T, B_d, B_u)
    term = vsegment(T, B_d, B_u)
    contract = ContractSpec(
        (B_d, B_u), T,
        terminal=((term, BiPoly()),),
        running=((occ, BiPoly.const(1.0)),),
    )
    pieces = [
        MeasurePiece("nu_up", hsegment(0.0, T, B_u)),
        MeasurePiece("nu_down", hsegment(0.0, T, B_d)),
        MeasurePiece("nu_T", term),
        MeasurePiece("mu", occ, "occupation"),
    ]
    params = dict(a=a, b=b, sigma=sigma, r=r, B_d=B_d, B_u=B_u, x0=x0, T=T)
    return PricingCase("cir-corridor", model, contract, pieces, model, params=params)


def expvg_double_no_touch(C, G, M, r_b, r_s, B_d, B_u, S0, T) -> PricingCase:
    """Pays one at T if ``S = exp(X)`` stays in ``[B_d, B_u]``; discount ``r_b + r_s t^2``.

    Works in log space with the martingale drift ``r(t) - c``.
    """
    if min(B_d, S0) <= 0:
        raise ConfigurationError("exponential model needs positive barriers and spot")
    lo, hi, x0 = math.log(B_d), math.log(B_u), math.log(S0)
    _order(lo, None, hi, x0)
    r = BiPoly({(0, 0): r_b, (2, 0): r_s})
    base = PolynomialModel(
        drift=vg_martingale_drift(r, C, G, M),
        sigma2=BiPoly(),
        jump_scale=BiPoly.const(1.0),
        discount=r,
        levy=VG(C, G, M),
        x0=x0,
    )
    model = truncate_for_barriers(base, (lo, hi), T)
    L = model.levy.L_plus
    term = vsegment(T, lo, hi)
    occ = rectangle(0.0, T, lo, hi)
    contract = ContractSpec(
        (lo, hi), T,
        terminal=((term, BiPoly.const(1.0)),),
        running=((occ, BiPoly()),),
    )
    pieces = [
        MeasurePiece("nu_down", rectangle(0.0, T, lo - L, lo)),
        MeasurePiece("nu_up", rectangle(0.0, T, hi, hi + L)),
        MeasurePiece("nu_T", term),
        MeasurePiece("mu", occ, "occupation"),
    ]
    params = dict(C=C, G=G, M=M, r_b=r_b, r_s=r_s, B_d=B_d, B_u=B_u, S0=S0, T=T, L=L)
    return PricingCase("expvg-dnt", model, contract, pieces, base, params=params)

"""Adaptive quadrature of VG Levy integrals, independent of the closed forms."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal

from scipy.integrate import quad

from ..errors import DomainError, NumericalError

log = logging.getLogger(__name__)

RTOL = 1e-10
_QUAD_EPSREL = 1e-13


def _check(val, err, what):
    if err > RTOL * abs(val) + 1e-300:
        raise NumericalError(f"quadrature for {what} reached only {err:.3g}", estimate=val)
    return val


def _one_side(g: Callable[[float], float], rate: float, a: float, b: float, what: str) -> float:
    """``int_a^b g(y) e^{-rate y} / y dy`` for ``0 <= a < b <= inf``.

    The part below ``min(b, 1)`` starting at 0 is mapped by ``y = e^{-u}`` to
    remove the 1/y endpoint singularity.
    """
    if b <= a:
        return 0.0
    total = 0.0
    if a == 0.0:
        cut = min(b, 1.0)
        f = lambda u: g(math.exp(-u)) * math.exp(-rate * math.exp(-u))
        val, err = quad(f, -math.log(cut), math.inf, epsabs=0.0, epsrel=_QUAD_EPSREL, limit=500)
        total += _check(val, err, what)
        a = cut
        if b <= a:
            return total
    # shift to the lower limit so the exponential scale sits at the origin
    f = lambda s: g(a + s) * math.exp(-rate * s) / (a + s)
    val, err = quad(f, 0.0, b - a, epsabs=0.0, epsrel=_QUAD_EPSREL, limit=500)
    return total + _check(val, err, what) * math.exp(-rate * a)


def levy_quadrature(
    kind: Literal["moment", "tail", "exp"],
    C: float,
    G: float,
    M: float,
    L_minus: float = -math.inf,
    L_plus: float = math.inf,
    k: int = 1,
) -> float:
    """VG integrals by quadrature.

    ``moment``: ``int_{L_minus}^{L_plus} y^k eta(dy)`` (k >= 1)
    ``tail``:   ``eta(R \\ [L_minus, L_plus])``
    ``exp``:    ``int (e^y - 1) eta(dy)`` over R (needs M > 1)
    """
    if kind == "moment":
        if k < 1:
            raise DomainError("moment order must be >= 1")
        up = _one_side(lambda y: y**k, M, 0.0, L_plus, "moment+")
        down = _one_side(lambda y: y**k, G, 0.0, -L_minus, "moment-")
        return C * (up + (-1) ** k * down)
    if kind == "tail":
        if not L_minus < 0 < L_plus:
            raise DomainError("tail mass needs L_minus < 0 < L_plus")
        up = _one_side(lambda y: 1.0, M, L_plus, math.inf, "tail+") if math.isfinite(L_plus) else 0.0
        down = _one_side(lambda y: 1.0, G, -L_minus, math.inf, "tail-") if math.isfinite(L_minus) else 0.0
        return C * (up + down)
    if kind == "exp":
        if M <= 1:
            raise DomainError("exp(X) is not integrable unless M > 1")
        # (e^y - 1) e^{-M y} = (1 - e^{-y}) e^{-(M-1) y}
        up = _one_side(lambda y: -math.expm1(-y), M - 1.0, 0.0, math.inf, "exp+")
        down = _one_side(lambda y: math.expm1(-y), G, 0.0, math.inf, "exp-")
        return C * (up + down)
    raise DomainError(f"unknown integrand kind {kind!r}")


def printed_martingale_constant(C: float, G: float, M: float) -> float:
    """Sign-flipped variant ``C (log(G/(1+G)) + log(M/(1-M)))`` of the closed form; NaN when M > 1."""
    arg = M / (1.0 - M)
    if arg <= 0:
        return math.nan
    return C * (math.log(G / (1.0 + G)) + math.log(arg))


@dataclass(frozen=True)
class MartingaleCheck:
    closed_form: float
    quadrature: float
    printed: float
    rel_error: float
    printed_ok: bool


def check_martingale_constant(C: float, G: float, M: float, rtol: float = 1e-8) -> MartingaleCheck:
    """Compare the closed-form ``c`` with quadrature and flag the sign-flipped variant.

    A warning is logged whenever the variant is undefined or disagrees.
    """
    from ..models import vg_martingale_constant

    closed = vg_martingale_constant(C, G, M)
    quad_val = levy_quadrature("exp", C, G, M)
    printed = printed_martingale_constant(C, G, M)
    rel = abs(closed - quad_val) / max(abs(quad_val), 1e-300)
    printed_ok = math.isfinite(printed) and abs(printed - quad_val) <= rtol * abs(quad_val)
    if not printed_ok:
        log.warning(
            "martingale constant: the variant C[log(G/(1+G)) + log(M/(1-M))] gives %s, "
            "quadrature gives %.12g; using C[log(M/(M-1)) + log(G/(G+1))] = %.12g",
            "NaN (log of a negative number)" if not math.isfinite(printed) else f"{printed:.12g}",
            quad_val, closed,
        )
    return MartingaleCheck(closed, quad_val, printed, rel, printed_ok)

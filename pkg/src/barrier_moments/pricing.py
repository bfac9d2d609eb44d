"""Convenience drivers: bounds for one N, or a ladder of N values."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable

from .contracts import PricingCase
from .moment_lp import build_lp
from .solvers import BoundsResult, solve_bounds


def compute_bounds(case: PricingCase, N: int, backend: str | None = None, overflow: str = "drop") -> BoundsResult:
    objective = case.objective
    lp_min = build_lp(case.model, case.pieces, objective, N, "min", overflow=overflow)
    lp_max = build_lp(case.model, case.pieces, objective, N, "max", overflow=overflow)
    return solve_bounds(lp_min, lp_max, backend)


def bounds_ladder(
    case: PricingCase,
    Ns: Iterable[int],
    backend: str | None = None,
    overflow: str = "drop",
    workers: int = 1,
) -> list[BoundsResult]:
    """Bounds for every N, returned in the order of ``Ns`` whatever the completion order."""
    Ns = list(Ns)
    if workers <= 1:
        return [compute_bounds(case, N, backend, overflow) for N in Ns]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda N: compute_bounds(case, N, backend, overflow), Ns))

"""LP solve adapter and the min/max bound driver.

The adapter is the only place an external solver is touched. Backends:

* ``highs-ds``  - HiGHS dual simplex through scipy (default)
* ``highs``     - HiGHS with its own method choice
* ``highs-ipm`` - HiGHS interior point
* ``simplex``   - the internal dense simplex (small problems only)

``BARRIER_MOMENTS_SOLVER`` overrides the default backend.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import ConfigurationError
from .moment_lp import MomentLP
from .simplex import simplex

FEAS_TOL = 1e-9
BACKENDS = ("highs-ds", "highs", "highs-ipm", "simplex")
_SCIPY_STATUS = {0: "optimal", 2: "infeasible", 3: "unbounded"}


def default_backend() -> str:
    name = os.environ.get("BARRIER_MOMENTS_SOLVER", "highs-ds")
    if name not in BACKENDS:
        raise ConfigurationError(f"unknown LP backend {name!r}; choose from {BACKENDS}")
    return name


@dataclass
class LPSolution:
    status: str
    value: float | None
    x: np.ndarray | None
    message: str = ""


def _equilibrate(A: sp.csr_matrix, b: np.ndarray):
    if A.shape[0] == 0:
        return A, b
    scale = np.asarray(abs(A).max(axis=1).todense()).ravel()
    scale[scale == 0] = 1.0
    D = sp.diags(1.0 / scale)
    return (D @ A).tocsr(), b / scale


def solve_lp(lp: MomentLP, backend: str | None = None) -> LPSolution:
    """Solve one moment LP; ``value`` includes the external factor."""
    backend = backend or default_backend()
    sign = 1.0 if lp.sense == "min" else -1.0
    A_eq, b_eq = _equilibrate(lp.A_eq, lp.b_eq)
    A_ub, b_ub = _equilibrate(lp.A_ub, lp.b_ub)
    cost = sign * lp.c

    if backend == "simplex":
        res = simplex(cost, A_eq.toarray(), b_eq, A_ub.toarray(), b_ub, tol=FEAS_TOL)
        if res.status != "optimal":
            return LPSolution(res.status, None, None, f"internal simplex: {res.status}")
        return LPSolution("optimal", lp.objective_value(res.x), res.x)

    if backend not in BACKENDS:
        raise ConfigurationError(f"unknown LP backend {backend!r}")
    options = {
        "primal_feasibility_tolerance": FEAS_TOL,
        "dual_feasibility_tolerance": FEAS_TOL,
        "presolve": True,
    }
    res = linprog(
        cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
        bounds=(0, None), method=backend, options=options,
    )
    status = _SCIPY_STATUS.get(res.status, "numerical-failure")
    if status != "optimal":
        return LPSolution(status, None, None, f"{backend}: {res.message}")
    return LPSolution("optimal", lp.objective_value(res.x), np.asarray(res.x), res.message)


@dataclass
class BoundsResult:
    N: int
    lower: float | None
    upper: float | None
    status_lower: str
    status_upper: str
    wall_time: float
    messages: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status_lower == "optimal" and self.status_upper == "optimal"

    @property
    def midpoint(self) -> float | None:
        return 0.5 * (self.lower + self.upper) if self.ok else None

    @property
    def consistent(self) -> bool:
        if not self.ok:
            return True
        return self.lower <= self.upper + 1e-9 * max(1.0, abs(self.upper))


def solve_bounds(lp_min: MomentLP, lp_max: MomentLP, backend: str | None = None) -> BoundsResult:
    """Lower bound from the min program, upper bound from the max program."""
    if lp_min.sense != "min" or lp_max.sense != "max":
        raise ConfigurationError("solve_bounds expects (min program, max program)")
    if lp_min.N != lp_max.N:
        raise ConfigurationError("min and max programs must share N")
    t0 = time.perf_counter()
    lo = solve_lp(lp_min, backend)
    hi = solve_lp(lp_max, backend)
    return BoundsResult(
        N=lp_min.N,
        lower=lo.value,
        upper=hi.value,
        status_lower=lo.status,
        status_upper=hi.status,
        wall_time=time.perf_counter() - t0,
        messages=tuple(s.message for s in (lo, hi) if s.status != "optimal"),
    )

"""Dense two-phase primal simplex for small LPs.

Fallback for environments without a production solver and an independent
check on small problems. Solves ``min c.x`` s.t. ``A_eq x = b_eq``,
``A_ub x <= b_ub``, ``x >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SimplexResult:
    status: str  # optimal | infeasible | unbounded | numerical-failure
    x: np.ndarray | None
    fun: float | None
    iterations: int


def _pivot(tab: np.ndarray, basis: np.ndarray, r: int, c: int) -> None:
    tab[r] /= tab[r, c]
    col = tab[:, c].copy()
    col[r] = 0.0
    tab -= np.outer(col, tab[r])
    basis[r] = c


def _reinvert(tab: np.ndarray, basis: np.ndarray, F: np.ndarray, cost: np.ndarray) -> None:
    """Rebuild the tableau from the original data to shed accumulated rounding."""
    m = F.shape[0]
    try:
        tab[:m] = np.linalg.solve(F[:, basis], F)
    except np.linalg.LinAlgError:
        return
    tab[m, :-1] = cost
    tab[m, -1] = 0.0
    tab[m] -= cost[basis] @ tab[:m]


def _run(tab, basis, n_cols, tol, max_iter, it0, allowed, F, cost, refresh=50):
    """Iterate on the objective row tab[-1]; only ``allowed`` columns may enter."""
    it = it0
    degenerate = 0
    while it < max_iter:
        if (it - it0) % refresh == 0:
            _reinvert(tab, basis, F, cost)
        red = tab[-1, :n_cols].copy()
        red[~allowed] = 0.0
        if degenerate > 50:
            # Bland's rule once stalling sets in
            cand = np.flatnonzero(red < -tol)
            if cand.size == 0:
                return "optimal", it
            c = int(cand[0])
        else:
            c = int(np.argmin(red))
            if red[c] >= -tol:
                return "optimal", it
        colv = tab[:-1, c]
        pos = colv > max(tol, 1e-9 * np.abs(colv).max())
        if not pos.any():
            return "unbounded", it
        rhs = np.maximum(tab[:-1, -1], 0.0)
        ratios = np.full(colv.shape, np.inf)
        ratios[pos] = rhs[pos] / colv[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
        if degenerate > 50:
            r = int(ties[np.argmin(basis[ties])])
        else:
            r = int(ties[np.argmax(colv[ties])])
        degenerate = degenerate + 1 if best <= tol else 0
        _pivot(tab, basis, r, c)
        it += 1
    return "numerical-failure", it


def simplex(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, tol=1e-9, max_iter=50_000) -> SimplexResult:
    c = np.asarray(c, float)
    n = c.size
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, float)
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, float)
    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    m = m_eq + m_ub

    # [x | slacks | artificials | rhs]
    A = np.zeros((m, n + m_ub))
    A[:m_eq, :n] = A_eq
    A[m_eq:, :n] = A_ub
    A[m_eq:, n:] = np.eye(m_ub)
    b = np.concatenate([b_eq, b_ub])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    n_struct = n + m_ub
    ncols = n_struct + m
    F = np.zeros((m, ncols + 1))
    F[:, :n_struct] = A
    F[:, n_struct:ncols] = np.eye(m)
    F[:, -1] = b
    tab = np.zeros((m + 1, ncols + 1))
    basis = np.arange(n_struct, ncols)

    # phase 1: minimize the sum of artificials
    cost1 = np.zeros(ncols)
    cost1[n_struct:] = 1.0
    allowed = np.ones(ncols, bool)
    allowed[n_struct:] = False
    status, it = _run(tab, basis, ncols, tol, max_iter, 0, allowed, F, cost1)
    if status != "optimal":
        return SimplexResult("numerical-failure", None, None, it)
    _reinvert(tab, basis, F, cost1)
    if -tab[-1, -1] > tol * max(1.0, np.abs(b).max(initial=0.0)) * 10:
        return SimplexResult("infeasible", None, None, it)

    # drive remaining artificials out of the basis where possible
    for r in range(m):
        if basis[r] >= n_struct:
            row = tab[r, :n_struct]
            nz = np.flatnonzero(np.abs(row) > 1e-7)
            if nz.size:
                _pivot(tab, basis, r, int(nz[np.argmax(np.abs(row[nz]))]))

    # phase 2
    cost2 = np.zeros(ncols)
    cost2[:n] = c
    allowed = np.zeros(ncols, bool)
    allowed[:n_struct] = True
    status, it = _run(tab, basis, ncols, tol, max_iter, it, allowed, F, cost2)
    if status != "optimal":
        return SimplexResult(status, None, None, it)
    _reinvert(tab, basis, F, cost2)
    x = np.zeros(ncols)
    x[basis] = tab[:m, -1]
    return SimplexResult("optimal", x[:n], float(c @ x[:n]), it)

"""Moment and localizing matrices as positive-semidefiniteness certificates.

Sequences are either 1-D arrays ``m[k] = int x^k dm`` or, for two variables,
mappings ``{(i, j): int t^i x^j dm}``. Matrices are indexed by the graded
monomial basis ``1, t, x, t^2, t x, x^2, ...`` (just ``1, x, x^2, ...`` in 1-D).
"""

from __future__ import annotations

from typing import Mapping, Sequence, Union

import numpy as np

from .errors import DimensionError
from .poly import BiPoly

MomentSeq = Union[Sequence[float], np.ndarray, Mapping[tuple[int, int], float]]


def graded_basis(r: int, nvars: int) -> list[tuple[int, int]]:
    """Exponents of all monomials of degree <= r in graded order."""
    if nvars == 1:
        return [(0, j) for j in range(r + 1)]
    return [(d - j, j) for d in range(r + 1) for j in range(d + 1)]


def _lookup(seq: MomentSeq):
    if isinstance(seq, Mapping):
        return 2, lambda a: seq[a]
    arr = np.asarray(seq, float)

    def get(a):
        if a[0] != 0:
            raise KeyError(a)
        return arr[a[1]]

    return 1, get


def _degree_available(seq: MomentSeq) -> int:
    if isinstance(seq, Mapping):
        # largest d such that every moment of degree <= d is present
        d = 0
        while all((d - j, j) in seq for j in range(d + 1)):
            d += 1
        return d - 1
    return len(seq) - 1


def moment_matrix(seq: MomentSeq, r: int) -> np.ndarray:
    """``M_r(m)[a, b] = m_{a + b}`` over the graded basis of degree r."""
    if _degree_available(seq) < 2 * r:
        raise DimensionError(f"moment matrix of order {r} needs moments up to degree {2 * r}")
    nvars, get = _lookup(seq)
    basis = graded_basis(r, nvars)
    return np.array([[get((a[0] + b[0], a[1] + b[1])) for b in basis] for a in basis])


def localizing_matrix(seq: MomentSeq, q: BiPoly, r: int) -> np.ndarray:
    """``M_r(q, m)[a, b] = sum_g q_g m_{a + b + g}``.

    For a 1-D sequence ``q`` must be a polynomial in x alone.
    """
    nvars, get = _lookup(seq)
    if nvars == 1 and q.deg_t > 0:
        raise DimensionError("a 1-D sequence needs a localizing polynomial in x only")
    need = 2 * r + q.total_degree
    if _degree_available(seq) < need:
        raise DimensionError(f"localizing matrix of order {r} needs moments up to degree {need}")
    basis = graded_basis(r, nvars)
    out = np.zeros((len(basis), len(basis)))
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            out[i, j] = sum(v * get((a[0] + b[0] + g[0], a[1] + b[1] + g[1])) for g, v in q.items())
    return out


def psd_certificate(matrix: np.ndarray, rel_tol: float = 1e-9) -> bool:
    """True if the smallest eigenvalue is >= ``-rel_tol * trace``."""
    m = np.asarray(matrix, float)
    m = 0.5 * (m + m.T)
    if m.size == 0:
        return True
    scale = max(np.trace(np.abs(np.diag(np.diag(m)))), 1e-300)
    return bool(np.linalg.eigvalsh(m)[0] >= -rel_tol * scale)


def interval_certificate(seq: Sequence[float], a: float = 0.0, b: float = 1.0) -> bool:
    """PSD test for moments of a measure on ``[a, b]``: ``M_r(m)`` and ``M_{r-1}((b-x)(x-a), m)``.

    Uses the largest r supported by the sequence length.
    """
    n = len(seq) - 1
    r = n // 2
    ok = psd_certificate(moment_matrix(seq, r))
    if r >= 1:
        q = BiPoly({(0, 0): -a * b, (0, 1): a + b, (0, 2): -1.0})
        ok = ok and psd_certificate(localizing_matrix(seq, q, r - 1))
    return ok

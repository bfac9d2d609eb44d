"""Sparse bivariate polynomials in (t, x).

Every generator, payoff and model coefficient in the package is a ``BiPoly``.
Coefficients are floats keyed by exponent pairs ``(i, j)`` meaning ``t**i * x**j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

# Coefficients below this fraction of the largest one are dropped.
REL_DROP = 1e-14


@lru_cache(maxsize=None)
def pascal(n: int) -> tuple[tuple[int, ...], ...]:
    """Rows 0..n of Pascal's triangle in exact integer arithmetic."""
    rows = [(1,)]
    for _ in range(n):
        prev = rows[-1]
        rows.append((1,) + tuple(prev[k] + prev[k + 1] for k in range(len(prev) - 1)) + (1,))
    return tuple(rows)


def binom(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return pascal(max(n, 24))[n][k]


@dataclass(frozen=True)
class AffineMap1D:
    """The map ``s -> offset + scale * s``."""

    offset: float
    scale: float

    def __post_init__(self):
        if self.scale == 0:
            raise ValueError("affine map scale must be non-zero")

    def __call__(self, s):
        return self.offset + self.scale * s

    def inverse(self) -> "AffineMap1D":
        return AffineMap1D(-self.offset / self.scale, 1.0 / self.scale)

    @classmethod
    def identity(cls) -> "AffineMap1D":
        return cls(0.0, 1.0)

    @classmethod
    def unit_to(cls, lo: float, hi: float) -> "AffineMap1D":
        """Map [0, 1] onto [lo, hi]."""
        return cls(lo, hi - lo)


class BiPoly:
    """Immutable sparse polynomial ``sum c[i, j] t**i x**j``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[tuple[int, int], float] | None = None):
        c = {}
        for (i, j), v in (coeffs or {}).items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent {(i, j)}")
            v = float(v)
            if v != 0.0:
                c[(int(i), int(j))] = c.get((int(i), int(j)), 0.0) + v
        if c:
            cutoff = REL_DROP * max(abs(v) for v in c.values())
            c = {k: v for k, v in c.items() if abs(v) > cutoff}
        object.__setattr__(self, "_c", c)

    def __setattr__(self, name, value):
        raise AttributeError("BiPoly is immutable")

    # construction helpers
    @classmethod
    def const(cls, value: float) -> "BiPoly":
        return cls({(0, 0): value})

    @classmethod
    def monomial(cls, i: int, j: int, coeff: float = 1.0) -> "BiPoly":
        return cls({(i, j): coeff})

    @classmethod
    def in_t(cls, coeffs: Iterable[float]) -> "BiPoly":
        """Polynomial in t alone from ascending coefficients."""
        return cls({(i, 0): v for i, v in enumerate(coeffs)})

    @classmethod
    def in_x(cls, coeffs: Iterable[float]) -> "BiPoly":
        """Polynomial in x alone from ascending coefficients."""
        return cls({(0, j): v for j, v in enumerate(coeffs)})

    # accessors
    @property
    def coeffs(self) -> dict[tuple[int, int], float]:
        return dict(self._c)

    def items(self):
        return self._c.items()

    def __getitem__(self, key: tuple[int, int]) -> float:
        return self._c.get(key, 0.0)

    def __len__(self):
        return len(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def is_constant(self) -> bool:
        return all(k == (0, 0) for k in self._c)

    @property
    def deg_t(self) -> int:
        return max((i for i, _ in self._c), default=0)

    @property
    def deg_x(self) -> int:
        return max((j for _, j in self._c), default=0)

    @property
    def total_degree(self) -> int:
        return max((i + j for i, j in self._c), default=0)

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        out = np.zeros(np.broadcast(t, x).shape)
        for (i, j), v in self._c.items():
            out = out + v * t**i * x**j
        return out if out.ndim else float(out)

    # arithmetic
    def __add__(self, other) -> "BiPoly":
        other = _lift(other)
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0.0) + v
        return BiPoly(c)

    __radd__ = __add__

    def __neg__(self) -> "BiPoly":
        return BiPoly({k: -v for k, v in self._c.items()})

    def __sub__(self, other) -> "BiPoly":
        return self + (-_lift(other))

    def __rsub__(self, other) -> "BiPoly":
        return _lift(other) - self

    def __mul__(self, other) -> "BiPoly":
        if isinstance(other, (int, float, np.floating, np.integer)):
            return BiPoly({k: v * other for k, v in self._c.items()})
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "BiPoly":
        if k < 0:
            raise ValueError("negative power")
        out = BiPoly.const(1.0)
        for _ in range(k):
            out = poly_mul(out, self)
        return out

    def __eq__(self, other):
        if not isinstance(other, BiPoly):
            try:
                other = _lift(other)
            except TypeError:
                return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def allclose(self, other: "BiPoly", atol: float = 1e-10) -> bool:
        keys = set(self._c) | set(other._c)
        return all(abs(self[k] - other[k]) <= atol for k in keys)

    def __repr__(self):
        if not self._c:
            return "BiPoly(0)"
        terms = []
        for (i, j), v in sorted(self._c.items()):
            mono = "".join(
                s for s in (
                    "" if i == 0 else ("t" if i == 1 else f"t^{i}"),
                    "" if j == 0 else ("x" if j == 1 else f"x^{j}"),
                )
            )
            terms.append(f"{v:g}{'*' + mono if mono else ''}")
        return "BiPoly(" + " + ".join(terms) + ")"


def _lift(p) -> BiPoly:
    if isinstance(p, BiPoly):
        return p
    if isinstance(p, (int, float, np.floating, np.integer)):
        return BiPoly.const(float(p))
    raise TypeError(f"cannot treat {type(p).__name__} as a polynomial")


T = BiPoly.monomial(1, 0)
X = BiPoly.monomial(0, 1)


def poly_mul(p: BiPoly, q: BiPoly) -> BiPoly:
    c: dict[tuple[int, int], float] = {}
    for (i1, j1), a in p.items():
        for (i2, j2), b in q.items():
            k = (i1 + i2, j1 + j2)
            c[k] = c.get(k, 0.0) + a * b
    return BiPoly(c)


def poly_diff(p: BiPoly, var: str, order: int = 1) -> BiPoly:
    """Formal derivative of ``p`` with respect to ``var`` ('t' or 'x')."""
    if var not in ("t", "x"):
        raise ValueError(f"unknown variable {var!r}")
    if order < 0:
        raise ValueError("order must be non-negative")
    c = {}
    for (i, j), v in p.items():
        e = i if var == "t" else j
        if e < order:
            continue
        fall = 1
        for r in range(order):
            fall *= e - r
        k = (i - order, j) if var == "t" else (i, j - order)
        c[k] = v * fall
    return BiPoly(c)


def _affine_powers(m: AffineMap1D, n: int) -> list[list[float]]:
    # (offset + scale*s)^e expanded in s, for e = 0..n
    rows = pascal(max(n, 1))
    return [
        [rows[e][r] * m.offset ** (e - r) * m.scale**r for r in range(e + 1)]
        for e in range(n + 1)
    ]


def poly_affine_sub(p: BiPoly, map_t: AffineMap1D, map_x: AffineMap1D) -> BiPoly:
    """Return ``p(map_t(s), map_x(y))`` expanded in the new variables (s, y)."""
    pt = _affine_powers(map_t, p.deg_t)
    px = _affine_powers(map_x, p.deg_x)
    c: dict[tuple[int, int], float] = {}
    for (i, j), v in p.items():
        for a, ca in enumerate(pt[i]):
            if ca == 0.0:
                continue
            for b, cb in enumerate(px[j]):
                k = (a, b)
                c[k] = c.get(k, 0.0) + v * ca * cb
    return BiPoly(c)

"""Finite moment linear programs for stopped polynomial jump-diffusions.

Each restricted measure lives on a box (possibly degenerate in t or x). Its
LP variables are the moments of the affinely rescaled measure on the unit box,
so every variable sits in ``[0, mass]`` and the Hausdorff inequalities keep
unit-size coefficients. Raw moments, needed by the adjoint rows and the payoff
objective, are obtained by pulling polynomials back through the box map.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError
from .models import PolynomialModel, apply_generator, min_on_box
from .poly import AffineMap1D, BiPoly, binom, poly_affine_sub

log = logging.getLogger(__name__)

Role = Literal["exit", "occupation"]
Sense = Literal["min", "max"]


@dataclass(frozen=True)
class SupportSet:
    """Closed box ``[t_lo, t_hi] x [x_lo, x_hi]``; a zero-width side is a point."""

    t_lo: float
    t_hi: float
    x_lo: float
    x_hi: float

    def __post_init__(self):
        vals = (self.t_lo, self.t_hi, self.x_lo, self.x_hi)
        if not all(np.isfinite(vals)):
            raise ConfigurationError("support bounds must be finite")
        if self.t_lo > self.t_hi or self.x_lo > self.x_hi:
            raise ConfigurationError(f"support bounds out of order: {vals}")

    @property
    def t_width(self) -> float:
        return self.t_hi - self.t_lo

    @property
    def x_width(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def free_t(self) -> bool:
        return self.t_width > 0

    @property
    def free_x(self) -> bool:
        return self.x_width > 0

    @property
    def dim(self) -> int:
        return int(self.free_t) + int(self.free_x)

    @property
    def kind(self) -> str:
        return {
            (True, True): "rectangle",
            (True, False): "hsegment",
            (False, True): "vsegment",
            (False, False): "point",
        }[(self.free_t, self.free_x)]

    def contains(self, t, x, tol: float = 1e-12):
        t = np.asarray(t)
        x = np.asarray(x)
        return (
            (t >= self.t_lo - tol) & (t <= self.t_hi + tol)
            & (x >= self.x_lo - tol) & (x <= self.x_hi + tol)
        )

    def to_unit(self, t, x):
        """Rescaled coordinates in [0, 1]^2 (zero on a degenerate side)."""
        s = (np.asarray(t, float) - self.t_lo) / self.t_width if self.free_t else np.zeros_like(t, float)
        y = (np.asarray(x, float) - self.x_lo) / self.x_width if self.free_x else np.zeros_like(x, float)
        return s, y


def rectangle(t_lo: float, t_hi: float, x_lo: float, x_hi: float) -> SupportSet:
    return SupportSet(t_lo, t_hi, x_lo, x_hi)


def hsegment(t_lo: float, t_hi: float, x: float) -> SupportSet:
    """Horizontal segment ``[t_lo, t_hi] x {x}`` (a barrier hit over time)."""
    return SupportSet(t_lo, t_hi, x, x)


def vsegment(t: float, x_lo: float, x_hi: float) -> SupportSet:
    """Vertical segment ``{t} x [x_lo, x_hi]`` (the maturity slice)."""
    return SupportSet(t, t, x_lo, x_hi)


@dataclass(frozen=True)
class MeasurePiece:
    name: str
    support: SupportSet
    role: Role = "exit"

    def __post_init__(self):
        if self.role not in ("exit", "occupation"):
            raise ConfigurationError(f"unknown measure role {self.role!r}")

    @property
    def dim(self) -> int:
        return self.support.dim

    def indices(self, N: int) -> list[tuple[int, int]]:
        """Scaled-moment keys ``(p, q)`` of total degree <= N on the free axes."""
        s = self.support
        if s.free_t and s.free_x:
            return [(p, q) for p in range(N + 1) for q in range(N + 1 - p)]
        if s.free_t:
            return [(p, 0) for p in range(N + 1)]
        if s.free_x:
            return [(0, q) for q in range(N + 1)]
        return [(0, 0)]


def moment_count(dim: int, N: int) -> int:
    return {0: 1, 1: N + 1, 2: (N + 1) * (N + 2) // 2}[dim]


def pullback(p: BiPoly, support: SupportSet) -> BiPoly:
    """Express ``p`` on ``support`` in unit coordinates (s, y).

    ``int p dm`` equals ``sum coeff[(a, b)] * mtilde[a, b]``. Degenerate axes are
    evaluated at their fixed value, so only exponent 0 survives on them.
    """
    mt = AffineMap1D(support.t_lo, support.t_width if support.free_t else 1.0)
    mx = AffineMap1D(support.x_lo, support.x_width if support.free_x else 1.0)
    q = poly_affine_sub(p, mt, mx)
    return BiPoly({
        (a, b): v for (a, b), v in q.items()
        if (a == 0 or support.free_t) and (b == 0 or support.free_x)
    })


def rescale_maps(piece: MeasurePiece, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Triangular maps between raw and scaled moments of one piece.

    Returns ``(raw_from_scaled, scaled_from_raw)`` on the ordering of
    ``piece.indices(N)``. Raw moments along a degenerate axis are collapsed to
    exponent zero, so for a point the map is plain evaluation.
    """
    s = piece.support
    keys = piece.indices(N)
    pos = {k: n for n, k in enumerate(keys)}
    fwd = np.zeros((len(keys), len(keys)))
    back = np.zeros((len(keys), len(keys)))
    inv_t = AffineMap1D(-s.t_lo / s.t_width, 1.0 / s.t_width) if s.free_t else AffineMap1D.identity()
    inv_x = AffineMap1D(-s.x_lo / s.x_width, 1.0 / s.x_width) if s.free_x else AffineMap1D.identity()
    for n, (i, j) in enumerate(keys):
        for k, v in pullback(BiPoly.monomial(i, j), s).items():
            fwd[n, pos[k]] += v
        for k, v in poly_affine_sub(BiPoly.monomial(i, j), inv_t, inv_x).items():
            back[n, pos[k]] += v
    return fwd, back


def hausdorff_rows_1d(N: int) -> list[dict[int, float]]:
    """Rows ``sum_j C(n, j) (-1)^j m_{j+k} >= 0`` for all n + k <= N."""
    rows = []
    for n in range(N + 1):
        for k in range(N + 1 - n):
            rows.append({j + k: float(binom(n, j) * (-1) ** j) for j in range(n + 1)})
    return rows


def hausdorff_rows_2d(N: int) -> list[dict[tuple[int, int], float]]:
    """Rows ``sum_{i<=m, j<=n} C(m,i) C(n,j) (-1)^(i+j) m_{i+l, j+k} >= 0``, m+n+k+l <= N.

    The first index is the t-direction, matching ``m_{i+l, j+k}``.
    """
    rows = []
    for m in range(N + 1):
        for n in range(N + 1 - m):
            for k in range(N + 1 - m - n):
                for l in range(N + 1 - m - n - k):
                    rows.append({
                        (i + l, j + k): float(binom(m, i) * binom(n, j) * (-1) ** (i + j))
                        for i in range(m + 1) for j in range(n + 1)
                    })
    return rows


def hausdorff_rows(piece: MeasurePiece, N: int) -> list[dict[tuple[int, int], float]]:
    s = piece.support
    if s.dim == 2:
        return hausdorff_rows_2d(N)
    if s.dim == 0:
        return [{(0, 0): 1.0}]
    wrap = (lambda k: (k, 0)) if s.free_t else (lambda k: (0, k))
    return [{wrap(k): v for k, v in row.items()} for row in hausdorff_rows_1d(N)]


@dataclass
class Layout:
    """Column positions of each piece's scaled moments."""

    pieces: tuple[MeasurePiece, ...]
    degrees: dict[str, int]
    columns: dict[str, dict[tuple[int, int], int]] = field(default_factory=dict)
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        col = 0
        for p in self.pieces:
            if p.name in self.columns:
                raise ConfigurationError(f"duplicate piece name {p.name!r}")
            keys = p.indices(self.degrees[p.name])
            self.columns[p.name] = {k: col + n for n, k in enumerate(keys)}
            self.names.extend(f"{p.name}[{a},{b}]" for a, b in keys)
            col += len(keys)

    @property
    def size(self) -> int:
        return len(self.names)

    def piece(self, name: str) -> MeasurePiece:
        for p in self.pieces:
            if p.name == name:
                return p
        raise ConfigurationError(f"no measure piece named {name!r}")

    def functional(self, name: str, poly: BiPoly) -> dict[int, float] | None:
        """Columns/coefficients of ``int poly d(piece)``; None if a moment is missing."""
        piece = self.piece(name)
        cols = self.columns[name]
        out: dict[int, float] = {}
        for k, v in pullback(poly, piece.support).items():
            if k not in cols:
                return None
            out[cols[k]] = out.get(cols[k], 0.0) + v
        return out


@dataclass
class MomentLP:
    """One finite LP: ``opt c.z`` s.t. ``A_eq z = b_eq``, ``A_ub z <= b_ub``, ``z >= 0``."""

    N: int
    sense: Sense
    layout: Layout
    c: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    eq_labels: list[str]
    ub_labels: list[str]
    dropped_rows: list[tuple[int, int]] = field(default_factory=list)
    factor: float = 1.0

    @property
    def n_vars(self) -> int:
        return self.layout.size

    def objective_value(self, z: np.ndarray) -> float:
        return self.factor * float(self.c @ z)

    def piece_moments(self, z: np.ndarray, name: str, N: int | None = None) -> dict[tuple[int, int], float]:
        """Raw moments ``int t^i x^j`` of one piece recovered from a solution vector."""
        N = self.layout.degrees[name] if N is None else N
        out = {}
        for i in range(N + 1):
            for j in range(N + 1 - i):
                f = self.layout.functional(name, BiPoly.monomial(i, j))
                if f is not None:
                    out[(i, j)] = sum(v * z[c] for c, v in f.items())
        return out


@dataclass(frozen=True)
class MomentObjective:
    """Payoff as polynomial weights per piece: ``L = factor * sum_pieces int poly d(piece)``."""

    terms: Mapping[str, BiPoly]
    factor: float = 1.0


def generator_excess(model: PolynomialModel, N: int) -> int:
    """How far ``(A - r) t^i x^j`` overshoots total degree ``i + j`` for i + j <= N."""
    excess = 0
    for i in range(N + 1):
        for j in range(N + 1 - i):
            g = apply_generator(model, i, j)
            if not g.is_zero():
                excess = max(excess, g.total_degree - (i + j))
    return excess


def adjoint_rows(model: PolynomialModel, layout: Layout, N: int):
    """Basic adjoint equation for every monomial ``t^i x^j`` with ``i + j <= N``.

    Row (i, j): ``sum_exit int t^i x^j dnu - sum_occ int (A - r) t^i x^j dmu = t0^i x0^j``.
    Rows whose generator output needs occupation moments beyond the layout are
    dropped and reported.
    """
    exit_names = [p.name for p in layout.pieces if p.role == "exit"]
    occ_names = [p.name for p in layout.pieces if p.role == "occupation"]
    rows, rhs, labels, dropped = [], [], [], []
    for i in range(N + 1):
        for j in range(N + 1 - i):
            mono = BiPoly.monomial(i, j)
            gen = apply_generator(model, i, j)
            row: dict[int, float] = {}
            ok = True
            for name, sign, poly in (
                [(n, 1.0, mono) for n in exit_names] + [(n, -1.0, gen) for n in occ_names]
            ):
                f = layout.functional(name, poly)
                if f is None:
                    ok = False
                    break
                for c, v in f.items():
                    row[c] = row.get(c, 0.0) + sign * v
            if not ok:
                dropped.append((i, j))
                continue
            rows.append(row)
            rhs.append(model.t0**i * model.x0**j)
            labels.append(f"adjoint[{i},{j}]")
    if not rows:
        raise ConfigurationError("every adjoint row exceeds the moment cap")
    if dropped:
        log.debug("dropped %d adjoint rows for degree overflow at N=%d", len(dropped), N)
    return rows, np.asarray(rhs, float), labels, dropped


def _to_csr(rows: Sequence[Mapping[int, float]], n_cols: int) -> sp.csr_matrix:
    r_idx, c_idx, vals = [], [], []
    for r, row in enumerate(rows):
        for c, v in row.items():
            if v != 0.0:
                r_idx.append(r)
                c_idx.append(c)
                vals.append(v)
    return sp.csr_matrix((vals, (r_idx, c_idx)), shape=(len(rows), n_cols))


def build_lp(
    model: PolynomialModel,
    pieces: Sequence[MeasurePiece],
    objective: MomentObjective,
    N: int,
    sense: Sense,
    overflow: Literal["drop", "extend"] = "drop",
    mass_bound: bool = True,
) -> MomentLP:
    """Assemble the moment LP of order N.

    ``overflow="drop"`` keeps every measure at degree N and omits adjoint rows
    that would need higher occupation moments. ``"extend"`` instead raises the
    occupation pieces' degree by the generator's degree excess.
    """
    if sense not in ("min", "max"):
        raise ConfigurationError(f"unknown sense {sense!r}")
    if N < 0:
        raise ConfigurationError("N must be non-negative")
    if not any(p.role == "occupation" for p in pieces):
        raise ConfigurationError("at least one occupation piece is required")
    names = {p.name for p in pieces}
    for name in objective.terms:
        if name not in names:
            raise ConfigurationError(f"objective references unknown piece {name!r}")

    extra = generator_excess(model, N) if overflow == "extend" else 0
    degrees = {p.name: N + (extra if p.role == "occupation" else 0) for p in pieces}
    layout = Layout(tuple(pieces), degrees)
    n = layout.size

    eq_rows, b_eq, eq_labels, dropped = adjoint_rows(model, layout, N)

    ub_rows: list[dict[int, float]] = []
    ub_rhs: list[float] = []
    ub_labels: list[str] = []
    for p in pieces:
        cols = layout.columns[p.name]
        deg = degrees[p.name]
        for r, row in enumerate(hausdorff_rows(p, deg)):
            # stored as -row <= 0
            ub_rows.append({cols[k]: -v for k, v in row.items()})
            ub_rhs.append(0.0)
            ub_labels.append(f"hausdorff[{p.name}#{r}]")
        c00 = cols[(0, 0)]
        for k, c in cols.items():
            if k != (0, 0):
                ub_rows.append({c: 1.0, c00: -1.0})
                ub_rhs.append(0.0)
                ub_labels.append(f"box[{p.name}{list(k)}]")
        if mass_bound and p.role == "occupation":
            s = p.support
            if min_on_box(model.discount, s.t_lo, s.t_hi, s.x_lo, s.x_hi) >= 0:
                ub_rows.append({c00: 1.0})
                ub_rhs.append(max(s.t_width, 0.0))
                ub_labels.append(f"mass[{p.name}]")

    c = np.zeros(n)
    for name, poly in objective.terms.items():
        f = layout.functional(name, poly)
        if f is None:
            raise ConfigurationError(
                f"objective on {name!r} has degree {poly.total_degree} > moment cap {degrees[name]}"
            )
        for col, v in f.items():
            c[col] += v

    return MomentLP(
        N=N,
        sense=sense,
        layout=layout,
        c=c,
        A_eq=_to_csr(eq_rows, n),
        b_eq=b_eq,
        A_ub=_to_csr(ub_rows, n),
        b_ub=np.asarray(ub_rhs, float),
        eq_labels=eq_labels,
        ub_labels=ub_labels,
        dropped_rows=dropped,
        factor=objective.factor,
    )

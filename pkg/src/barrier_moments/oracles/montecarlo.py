"""Euler Monte Carlo for knock-out contracts on polynomial jump-diffusions.

The diffusion part is stepped by Euler with full truncation of the variance
(``sqrt(max(sigma2, 0))``). VG jumps are exact per step as the difference of
two gamma variates. Barriers are monitored at grid times only, which biases
knock-out prices upward. Discount and running payoff integrals use the
trapezoid rule; at the exit step the state is clipped back to the barrier
interval for evaluating ``r`` and ``g``.

Paths are simulated in fixed-size blocks; block ``i`` draws from a Philox
stream keyed by ``(seed, i)`` so results do not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..contracts import ContractSpec
from ..errors import ConfigurationError
from ..models import VG, PolynomialModel
from ..moment_lp import Layout, MeasurePiece

BLOCK = 20_000
SCHEMES = ("euler", "log-euler")


@dataclass(frozen=True)
class MCConfig:
    paths: int = 100_000
    steps_per_year: int = 1000
    seed: int = 20240601
    antithetic: bool = False
    scheme: str = "euler"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.paths < 1 or self.steps_per_year < 1:
            raise ConfigurationError("paths and steps_per_year must be >= 1")
        if self.antithetic and self.paths % 2:
            raise ConfigurationError("antithetic sampling needs an even path count")


@dataclass(frozen=True)
class MCResult:
    estimate: float
    std_error: float
    paths: int


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & (2**64 - 1), block])))


def _blocks(total: int, size: int = BLOCK):
    start, i = 0, 0
    while start < total:
        n = min(size, total - start)
        yield i, n
        start += n
        i += 1


def _levy_of(model: PolynomialModel) -> VG | None:
    if not model.has_jumps:
        return None
    if not isinstance(model.levy, VG):
        raise ConfigurationError(
            f"cannot simulate Levy measure {type(model.levy).__name__}; pass the untruncated model"
        )
    return model.levy


def _increments(rng, n, dt, levy, antithetic):
    half = n // 2 if antithetic else n
    z = rng.standard_normal(half)
    if antithetic:
        z = np.concatenate([z, -z])
    dw = math.sqrt(dt) * z
    if levy is None:
        return dw, None
    gp = rng.gamma(levy.C * dt, 1.0 / levy.M, half)
    gm = rng.gamma(levy.C * dt, 1.0 / levy.G, half)
    jumps = gp - gm
    if antithetic:
        jumps = np.concatenate([jumps, jumps])
    return dw, jumps


StepHook = Callable[..., None]


def _euler_step(model, t, x, dt, dw, jumps, state_floor, scheme):
    n = x.shape[0]
    xs = x if state_floor is None else np.maximum(x, state_floor)
    var = np.maximum(np.broadcast_to(model.sigma2(t, xs), (n,)), 0.0)
    if scheme == "log-euler":
        # Euler on log X; exact for geometric Brownian motion, needs X > 0
        mu = model.drift(t, xs) / xs - 0.5 * var / xs**2
        x_new = x * np.exp(mu * dt + np.sqrt(var) / xs * dw)
    else:
        x_new = x + model.drift(t, xs) * dt + np.sqrt(var) * dw
    if jumps is not None:
        x_new = x_new + model.jump_scale(t, x) * jumps
    return x_new


def _simulate_block(
    model: PolynomialModel,
    barriers: tuple[float, float],
    T: float,
    n_steps: int,
    n: int,
    rng: np.random.Generator,
    antithetic: bool,
    state_floor: float | None,
    on_step: StepHook | None = None,
    scheme: str = "euler",
):
    """Run one block; returns (alive at T, x_T, discount at T, running integral of hook)."""
    lo, hi = barriers
    levy = _levy_of(model)
    dt = T / n_steps
    x = np.full(n, float(model.x0))
    alive = np.ones(n, bool)
    alpha = np.zeros(n)
    t = float(model.t0)
    r_prev = np.broadcast_to(model.discount(t, x), (n,)).astype(float)
    for step in range(n_steps):
        t1 = model.t0 + (step + 1) * dt
        dw, jumps = _increments(rng, n, dt, levy, antithetic)
        x_new = _euler_step(model, t, x, dt, dw, jumps, state_floor, scheme)
        x_new = np.where(alive, x_new, x)
        out = (x_new < lo) | (x_new > hi)
        exiting = alive & out
        xc = np.clip(x_new, lo, hi)
        r_new = np.broadcast_to(model.discount(t1, xc), (n,)).astype(float)
        alpha_new = np.where(alive, alpha + 0.5 * (r_prev + r_new) * dt, alpha)
        if on_step is not None:
            on_step(t, t1, x, x_new, xc, alive, exiting, np.exp(-alpha), np.exp(-alpha_new))
        alive = alive & ~out
        x, alpha, r_prev, t = x_new, alpha_new, r_new, t1
    return alive, x, np.exp(-alpha)


def mc_price(
    model: PolynomialModel,
    contract: ContractSpec,
    config: MCConfig,
    state_floor: float | None = None,
) -> MCResult:
    """Monte Carlo estimate of the knock-out contract value.

    ``state_floor`` (e.g. 0 for CIR) floors the state inside drift and
    variance evaluations, i.e. the full-truncation scheme.
    """
    T = contract.maturity
    n_steps = max(1, round(config.steps_per_year * T))
    has_running = any(not g.is_zero() for _, g in contract.running)
    sums = []
    for block, n in _blocks(config.paths):
        rng = block_rng(config.seed, block)
        running = np.zeros(n)

        def hook(t, t1, x, x_new, xc, alive, exiting, d0, d1):
            if has_running:
                g0 = contract.running_payoff(t, np.clip(x, *contract.barriers))
                g1 = contract.running_payoff(t1, xc)
                running[:] += np.where(alive, 0.5 * (d0 * g0 + d1 * g1) * (t1 - t), 0.0)

        alive, x_T, disc = _simulate_block(
            model, contract.barriers, T, n_steps, n, rng, config.antithetic, state_floor, hook,
            config.scheme,
        )
        payoff = running + np.where(alive, disc * contract.terminal_payoff(x_T), 0.0)
        if config.antithetic:
            payoff = 0.5 * (payoff[: n // 2] + payoff[n // 2:])
        sums.append((payoff.size, payoff.sum(), np.square(payoff).sum()))
    # block order is fixed, so this reduction is deterministic
    cnt = sum(s[0] for s in sums)
    mean = math.fsum(s[1] for s in sums) / cnt
    sq = math.fsum(s[2] for s in sums) / cnt
    var = max(sq - mean * mean, 0.0) * cnt / max(cnt - 1, 1)
    est = mean * contract.discount_factor
    return MCResult(est, math.sqrt(var / cnt) * abs(contract.discount_factor), config.paths)


@dataclass
class MomentEstimate:
    """Monte Carlo mean and covariance of LP variables (scaled moments)."""

    mean: np.ndarray
    cov: np.ndarray
    paths: int

    def std_error(self, w: np.ndarray) -> np.ndarray:
        """Standard errors of the linear functionals in the rows of ``w``."""
        w = np.atleast_2d(np.asarray(w))
        return np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", w, self.cov, w), 0.0) / self.paths)


def _project(support, t, x):
    return np.clip(t, support.t_lo, support.t_hi), np.clip(x, support.x_lo, support.x_hi)


def _assign(pieces: Sequence[MeasurePiece], t, x):
    """Index of the nearest exit piece for each exit point (first wins ties)."""
    dist = np.stack([
        np.hypot(*(np.subtract(_project(p.support, t, x), (t, x))))
        for p in pieces
    ])
    return np.argmin(dist, axis=0)


def _step_weights(support, t_grid: np.ndarray, P: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact integrals of ``s^p (1 - theta)`` and ``s^p theta`` over each grid step.

    ``s`` is the unit time coordinate of ``support`` and ``theta`` the linear
    interpolation weight within the step, so a piecewise-linear integrand is
    integrated exactly against every time monomial.
    """
    nodes, wts = np.polynomial.legendre.leggauss(P // 2 + 2)
    theta = 0.5 * (nodes + 1.0)
    dt = np.diff(t_grid)
    tt = t_grid[:-1, None] + dt[:, None] * theta[None, :]
    sv = (tt - support.t_lo) / support.t_width if support.free_t else np.zeros_like(tt)
    powers = sv[..., None] ** np.arange(P + 1)
    w = 0.5 * wts[None, :, None] * dt[:, None, None]
    W0 = np.sum(w * (1.0 - theta)[None, :, None] * powers, axis=1)
    W1 = np.sum(w * theta[None, :, None] * powers, axis=1)
    return W0, W1


def mc_moment_estimates(
    model: PolynomialModel,
    layout: Layout,
    barriers: tuple[float, float],
    T: float,
    config: MCConfig,
    state_floor: float | None = None,
    time_chunk: int = 50,
) -> MomentEstimate:
    """Estimate every scaled moment variable of ``layout`` by simulation.

    Exit points are attributed to the nearest exit piece and projected onto
    it. Occupation moments integrate the discounted path, linearly
    interpolated between grid points, exactly against each time monomial.
    Only a single occupation piece is supported.
    """
    exit_pieces = [p for p in layout.pieces if p.role == "exit"]
    occ = [p for p in layout.pieces if p.role == "occupation"]
    if len(occ) != 1:
        raise ConfigurationError("moment estimation supports exactly one occupation piece")
    occ = occ[0]
    occ_keys = list(layout.columns[occ.name])
    occ_cols = np.array([layout.columns[occ.name][k] for k in occ_keys])
    occ_p = np.array([k[0] for k in occ_keys])
    occ_q = np.array([k[1] for k in occ_keys])
    P, Q = int(occ_p.max()), int(occ_q.max())
    n_steps = max(1, round(config.steps_per_year * T))
    t_grid = model.t0 + np.arange(n_steps + 1) * (T / n_steps)
    W0, W1 = _step_weights(occ.support, t_grid, P)
    nv = layout.size
    total = np.zeros(nv)
    outer = np.zeros((nv, nv))

    for block, n in _blocks(config.paths):
        rng = block_rng(config.seed, block)
        F = np.zeros((n, nv))
        # occupation sums laid out (p, path * q) so each flush is one GEMM
        occF = np.zeros((P + 1, n * (Q + 1)))
        buf0 = np.zeros((time_chunk, n, Q + 1))
        buf1 = np.zeros((time_chunk, n, Q + 1))
        state = {"k": 0, "start": 0}

        def flush():
            k, st = state["k"], state["start"]
            if k:
                occF[:] += W0[st:st + k].T @ buf0[:k].reshape(k, -1)
                occF[:] += W1[st:st + k].T @ buf1[:k].reshape(k, -1)
            state["start"] += k
            state["k"] = 0

        def powers(out, w, y):
            out[:, 0] = w
            for q in range(1, Q + 1):
                np.multiply(out[:, q - 1], y, out=out[:, q])

        def record_exit(idx, t_ex, x_ex, disc):
            which = _assign(exit_pieces, t_ex, x_ex)
            for j, p in enumerate(exit_pieces):
                sel = which == j
                if not sel.any():
                    continue
                tp, xp = _project(p.support, t_ex[sel], x_ex[sel])
                s_, y_ = p.support.to_unit(tp, xp)
                for key, col in layout.columns[p.name].items():
                    F[idx[sel], col] += disc[sel] * s_ ** key[0] * y_ ** key[1]

        def hook(t, t1, x, x_new, xc, alive, exiting, d0, d1):
            _, y0 = occ.support.to_unit(t, np.clip(x, occ.support.x_lo, occ.support.x_hi))
            _, y1 = occ.support.to_unit(t1, xc)
            w0 = np.where(alive, d0, 0.0)
            w1 = np.where(alive, d1, 0.0)
            k = state["k"]
            powers(buf0[k], w0, y0)
            powers(buf1[k], w1, y1)
            state["k"] += 1
            if state["k"] == time_chunk:
                flush()
            ex = np.flatnonzero(exiting)
            if ex.size:
                record_exit(ex, np.full(ex.size, t1), x_new[ex], d1[ex])

        alive, x_T, disc = _simulate_block(
            model, barriers, T, n_steps, n, rng, False, state_floor, hook, config.scheme
        )
        flush()
        surv = np.flatnonzero(alive)
        if surv.size:
            record_exit(surv, np.full(surv.size, T), x_T[surv], disc[surv])
        occ3 = occF.reshape(P + 1, n, Q + 1)
        F[:, occ_cols] = occ3[occ_p, :, occ_q].T
        total += F.sum(axis=0)
        outer += F.T @ F
    mean = total / config.paths
    cov = (outer / config.paths - np.outer(mean, mean)) * config.paths / max(config.paths - 1, 1)
    return MomentEstimate(mean, cov, config.paths)


def simulate_terminal(
    model: PolynomialModel,
    t_start: float,
    x_start: float,
    horizon: float,
    n_steps: int,
    paths: int,
    seed: int,
) -> np.ndarray:
    """Unstopped Euler paths from ``(t_start, x_start)``; returns X at ``t_start + horizon``."""
    levy = _levy_of(model)
    out = []
    dt = horizon / n_steps
    for block, n in _blocks(paths):
        rng = block_rng(seed, block)
        x = np.full(n, float(x_start))
        t = t_start
        for _ in range(n_steps):
            dw, jumps = _increments(rng, n, dt, levy, False)
            x, t = _euler_step(model, t, x, dt, dw, jumps, None, "euler"), t + dt
        out.append(x)
    return np.concatenate(out)

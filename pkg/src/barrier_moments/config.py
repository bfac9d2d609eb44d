"""Run configurations as INI text, with one section per component.

Layout::

    [run]       example, n_min, n_max, output (text|csv), workers, overflow
    [model]     model parameters of the chosen example
    [contract]  barriers, maturity and strike
    [solver]    backend, pstar_shortcut
    [oracle]    kind (none|mc|exact), reference, mc settings

For ``example = custom`` the model is a pure diffusion given by polynomial
strings in ``t`` and ``x`` (``drift``, ``sigma2``, ``discount``) and the
contract by ``terminal`` and ``running`` payoff polynomials; an optional
``kink`` makes the terminal payoff zero below that level.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import sympy

from .contracts import (
    ContractSpec,
    PricingCase,
    cir_american_corridor,
    expvg_double_no_touch,
    gbm_double_knockout,
    vg_double_knockout,
)
from .errors import ConfigurationError
from .models import PolynomialModel
from .moment_lp import MeasurePiece, hsegment, rectangle, vsegment
from .oracles.montecarlo import SCHEMES, MCConfig
from .poly import BiPoly
from .solvers import BACKENDS

EXAMPLES = ("gbm-dko", "vg-dko", "cir-corridor", "expvg-dnt", "custom")
ORACLES = ("none", "mc", "exact")
OUTPUTS = ("text", "csv")
N_LIMITS = (2, 20)

# (section, key) -> unit comment written next to the value
_SCHEMA: dict[str, dict[str, tuple[tuple[str, str], ...]]] = {
    "gbm-dko": {
        "model": (("b", "drift rate per year"), ("sigma", "volatility per sqrt(year)"), ("x0", "initial price")),
        "contract": (("B_d", "lower barrier"), ("B_u", "upper barrier"), ("K", "strike"), ("T", "years")),
    },
    "vg-dko": {
        "model": (
            ("b", "Levy-Ito drift per year"), ("C", "VG activity per year"), ("G", "negative-jump decay"),
            ("M", "positive-jump decay"), ("x0", "initial state"),
        ),
        "contract": (("B_d", "lower barrier"), ("B_u", "upper barrier"), ("K", "strike"), ("T", "years")),
    },
    "cir-corridor": {
        "model": (
            ("a", "mean-reversion speed per year"), ("b", "long-run level"), ("sigma", "volatility"),
            ("r", "discount rate per year"), ("x0", "initial rate"),
        ),
        "contract": (("B_d", "lower barrier"), ("B_u", "upper barrier"), ("T", "years")),
    },
    "expvg-dnt": {
        "model": (
            ("C", "VG activity per year"), ("G", "negative-jump decay"), ("M", "positive-jump decay"),
            ("r_b", "base rate per year"), ("r_s", "rate slope per year^3"), ("S0", "initial price"),
        ),
        "contract": (("B_d", "lower barrier (price)"), ("B_u", "upper barrier (price)"), ("T", "years")),
    },
    "custom": {
        "model": (
            ("drift", "polynomial in t, x"), ("sigma2", "polynomial in t, x"),
            ("discount", "polynomial in t, x"), ("x0", "initial state"),
        ),
        "contract": (
            ("B_d", "lower barrier"), ("B_u", "upper barrier"), ("T", "years"),
            ("terminal", "polynomial in x"), ("kink", "terminal payoff is zero below this level"),
            ("running", "polynomial in t, x"),
        ),
    },
}
_STRING_KEYS = {"drift", "sigma2", "discount", "terminal", "running"}
_OPTIONAL = {("custom", "kink"), ("custom", "discount"), ("custom", "running"), ("custom", "sigma2")}


@dataclass(frozen=True)
class RunConfig:
    example: str
    model: Mapping[str, object]
    contract: Mapping[str, object]
    n_min: int = 4
    n_max: int = 8
    oracle: str = "none"
    reference: float | None = None
    mc: MCConfig = field(default_factory=MCConfig)
    output: str = "text"
    backend: str | None = None
    pstar_shortcut: bool = False
    workers: int = 1
    overflow: str = "drop"

    def __post_init__(self):
        if self.example not in EXAMPLES:
            raise ConfigurationError(f"unknown example {self.example!r}; choose from {EXAMPLES}")
        lo, hi = N_LIMITS
        if not (lo <= self.n_min <= self.n_max <= hi):
            raise ConfigurationError(f"need {lo} <= n_min <= n_max <= {hi}, got [{self.n_min}, {self.n_max}]")
        if self.oracle not in ORACLES:
            raise ConfigurationError(f"unknown oracle {self.oracle!r}; choose from {ORACLES}")
        if self.oracle == "exact" and self.example != "gbm-dko":
            raise ConfigurationError("the exact oracle exists only for gbm-dko")
        if self.output not in OUTPUTS:
            raise ConfigurationError(f"unknown output format {self.output!r}")
        if self.backend is not None and self.backend not in BACKENDS:
            raise ConfigurationError(f"unknown solver backend {self.backend!r}; choose from {BACKENDS}")
        if self.overflow not in ("drop", "extend"):
            raise ConfigurationError("overflow must be 'drop' or 'extend'")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        schema = _SCHEMA[self.example]
        for section, given in (("model", self.model), ("contract", self.contract)):
            known = {k for k, _ in schema[section]}
            extra = set(given) - known
            if extra:
                raise ConfigurationError(f"unknown [{section}] keys for {self.example}: {sorted(extra)}")
            missing = {k for k in known if (self.example, k) not in _OPTIONAL} - set(given)
            if missing:
                raise ConfigurationError(f"missing [{section}] keys for {self.example}: {sorted(missing)}")

    @property
    def Ns(self) -> list[int]:
        return list(range(self.n_min, self.n_max + 1))

    def with_updates(self, **kw) -> "RunConfig":
        return replace(self, **kw)


def parse_polynomial(text: str) -> BiPoly:
    """Parse a polynomial in ``t`` and ``x`` such as ``"0.1*x - 2*t*x**2"``."""
    t, x = sympy.symbols("t x")
    try:
        expr = sympy.sympify(text, locals={"t": t, "x": x})
        poly = sympy.Poly(sympy.expand(expr), t, x)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError, SyntaxError) as exc:
        raise ConfigurationError(f"not a polynomial in t, x: {text!r}") from exc
    coeffs = {}
    for (i, j), c in poly.terms():
        try:
            coeffs[(int(i), int(j))] = float(c)
        except TypeError as exc:
            raise ConfigurationError(f"non-numeric coefficient {c} in {text!r}") from exc
    return BiPoly(coeffs)


def _number(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError(f"[{section}] {key} = {raw!r} is not a number") from None


def _bool(section: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"[{section}] {key} = {raw!r} is not a boolean")


def _int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"[{section}] {key} = {raw!r} is not an integer") from None


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str  # keep B_d / B_u case
    return cp


def loads(text: str) -> RunConfig:
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed configuration: {exc}") from exc
    unknown = set(cp.sections()) - {"run", "model", "contract", "solver", "oracle"}
    if unknown:
        raise ConfigurationError(f"unknown sections {sorted(unknown)}")
    if not cp.has_option("run", "example"):
        raise ConfigurationError("[run] example is required")
    example = cp.get("run", "example").strip()
    if example not in EXAMPLES:
        raise ConfigurationError(f"unknown example {example!r}; choose from {EXAMPLES}")

    def section(name):
        return dict(cp.items(name)) if cp.has_section(name) else {}

    params = {}
    for name in ("model", "contract"):
        params[name] = {
            k: (v.strip() if k in _STRING_KEYS else _number(name, k, v)) for k, v in section(name).items()
        }
    run = section("run")
    solver = section("solver")
    orc = section("oracle")
    known_run = {"example", "n_min", "n_max", "output", "workers", "overflow"}
    for name, sec, known in (
        ("run", run, known_run),
        ("solver", solver, {"backend", "pstar_shortcut"}),
        ("oracle", orc, {"kind", "reference", "paths", "steps_per_year", "seed", "antithetic", "scheme"}),
    ):
        extra = set(sec) - known
        if extra:
            raise ConfigurationError(f"unknown [{name}] keys {sorted(extra)}")
    mc_defaults = MCConfig()
    mc = MCConfig(
        paths=_int("oracle", "paths", orc.get("paths", str(mc_defaults.paths))),
        steps_per_year=_int("oracle", "steps_per_year", orc.get("steps_per_year", str(mc_defaults.steps_per_year))),
        seed=_int("oracle", "seed", orc.get("seed", str(mc_defaults.seed))),
        antithetic=_bool("oracle", "antithetic", orc.get("antithetic", "false")),
        scheme=orc.get("scheme", mc_defaults.scheme).strip(),
    )
    ref = orc.get("reference", "").strip()
    backend = solver.get("backend", "").strip() or None
    return RunConfig(
        example=example,
        model=params["model"],
        contract=params["contract"],
        n_min=_int("run", "n_min", run.get("n_min", "4")),
        n_max=_int("run", "n_max", run.get("n_max", "8")),
        oracle=orc.get("kind", "none").strip(),
        reference=_number("oracle", "reference", ref) if ref else None,
        mc=mc,
        output=run.get("output", "text").strip(),
        backend=backend,
        pstar_shortcut=_bool("solver", "pstar_shortcut", solver.get("pstar_shortcut", "false")),
        workers=_int("run", "workers", run.get("workers", "1")),
        overflow=run.get("overflow", "drop").strip(),
    )


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read configuration {path}: {exc}") from exc
    return loads(text)


def _fmt(v) -> str:
    # repr keeps the shortest round-tripping decimal for floats
    return v if isinstance(v, str) else repr(float(v))


def dumps(cfg: RunConfig) -> str:
    """Serialize to INI text; ``loads(dumps(cfg)) == cfg``."""
    out = io.StringIO()
    units = _SCHEMA[cfg.example]
    out.write("[run]\n")
    out.write(f"example = {cfg.example}\n")
    out.write(f"n_min = {cfg.n_min}  # lowest moment degree\n")
    out.write(f"n_max = {cfg.n_max}  # highest moment degree\n")
    out.write(f"output = {cfg.output}\n")
    out.write(f"workers = {cfg.workers}\n")
    out.write(f"overflow = {cfg.overflow}\n")
    for name, values in (("model", cfg.model), ("contract", cfg.contract)):
        out.write(f"\n[{name}]\n")
        for key, unit in units[name]:
            if key in values:
                out.write(f"{key} = {_fmt(values[key])}  # {unit}\n")
    out.write("\n[solver]\n")
    out.write(f"backend = {cfg.backend or ''}\n")
    out.write(f"pstar_shortcut = {str(cfg.pstar_shortcut).lower()}\n")
    out.write("\n[oracle]\n")
    out.write(f"kind = {cfg.oracle}\n")
    out.write(f"reference = {'' if cfg.reference is None else repr(cfg.reference)}\n")
    out.write(f"paths = {cfg.mc.paths}\n")
    out.write(f"steps_per_year = {cfg.mc.steps_per_year}  # monitoring dates per year\n")
    out.write(f"seed = {cfg.mc.seed}\n")
    out.write(f"antithetic = {str(cfg.mc.antithetic).lower()}\n")
    out.write(f"scheme = {cfg.mc.scheme}  # one of {', '.join(SCHEMES)}\n")
    return out.getvalue()


def _custom_case(model: Mapping, contract: Mapping) -> PricingCase:
    B_d, B_u, T = float(contract["B_d"]), float(contract["B_u"]), float(contract["T"])
    x0 = float(model["x0"])
    if not B_d < x0 < B_u:
        raise ConfigurationError("initial point must lie strictly inside the barriers")
    discount = parse_polynomial(str(model.get("discount", "0")))
    pm = PolynomialModel(
        drift=parse_polynomial(str(model["drift"])),
        sigma2=parse_polynomial(str(model.get("sigma2", "0"))),
        jump_scale=BiPoly(),
        discount=discount,
        x0=x0,
    )
    terminal = parse_polynomial(str(contract["terminal"]))
    if terminal.deg_t > 0:
        raise ConfigurationError("terminal payoff must be a polynomial in x only")
    running = parse_polynomial(str(contract.get("running", "0")))
    occ = rectangle(0.0, T, B_d, B_u)
    pieces = [
        MeasurePiece("nu_up", hsegment(0.0, T, B_u)),
        MeasurePiece("nu_down", hsegment(0.0, T, B_d)),
    ]
    kink = contract.get("kink")
    if kink is not None and B_d < float(kink) < B_u:
        K = float(kink)
        low, high = vsegment(T, B_d, K), vsegment(T, K, B_u)
        terms = ((low, BiPoly()), (high, terminal))
        pieces += [MeasurePiece("nu_T_low", low), MeasurePiece("nu_T_high", high)]
    else:
        seg = vsegment(T, B_d, B_u)
        terms = ((seg, terminal),)
        pieces.append(MeasurePiece("nu_T", seg))
    pieces.append(MeasurePiece("mu", occ, "occupation"))
    spec = ContractSpec((B_d, B_u), T, terminal=terms, running=((occ, running),))
    return PricingCase("custom", pm, spec, pieces, pm, params={**model, **contract})


def build_case(cfg: RunConfig) -> PricingCase:
    m, c = cfg.model, cfg.contract
    if cfg.example == "gbm-dko":
        return gbm_double_knockout(m["b"], m["sigma"], c["B_d"], c["B_u"], c["K"], m["x0"], c["T"])
    if cfg.example == "vg-dko":
        return vg_double_knockout(
            m["b"], m["C"], m["G"], m["M"], c["B_d"], c["B_u"], c["K"], m["x0"], c["T"],
            pstar_shortcut=cfg.pstar_shortcut,
        )
    if cfg.example == "cir-corridor":
        return cir_american_corridor(m["a"], m["b"], m["sigma"], m["r"], c["B_d"], c["B_u"], m["x0"], c["T"])
    if cfg.example == "expvg-dnt":
        return expvg_double_no_touch(m["C"], m["G"], m["M"], m["r_b"], m["r_s"], c["B_d"], c["B_u"], m["S0"], c["T"])
    return _custom_case(m, c)


def state_floor(cfg: RunConfig) -> float | None:
    """Full-truncation floor for simulation: CIR rates live on [0, inf)."""
    return 0.0 if cfg.example == "cir-corridor" else None


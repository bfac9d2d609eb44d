"""Command-line front end: ``price``, ``oracle``, ``export-lp`` and ``selftest``.

Exit codes: 0 success, 1 partial failure (some N or check failed),
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import config as cfgmod
from .config import RunConfig
from .contracts import PricingCase
from .errors import ConfigurationError
from .lp_export import write_mps
from .moment_lp import build_lp
from .oracles.exact import gbm_double_barrier_exact
from .oracles.montecarlo import mc_price
from .oracles.quadrature import check_martingale_constant
from .pricing import compute_bounds
from .solvers import BoundsResult

log = logging.getLogger("barrier_moments")

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2
MONO_SLACK = 1e-7


@dataclass(frozen=True)
class ReportRow:
    N: int
    result: BoundsResult | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.result is not None and self.result.ok


@dataclass
class Report:
    example: str
    rows: list[ReportRow]
    reference: float | None = None
    reference_se: float | None = None
    reference_kind: str = "none"
    notes: list[str] = field(default_factory=list)

    @property
    def failed(self) -> list[int]:
        return [r.N for r in self.rows if not r.ok]

    def monotone(self, slack: float = MONO_SLACK) -> tuple[bool, str]:
        good = [r.result for r in self.rows if r.ok]
        for a, b in zip(good, good[1:]):
            if b.lower < a.lower - slack:
                return False, f"lower bound decreases from N={a.N} to N={b.N}"
            if b.upper > a.upper + slack:
                return False, f"upper bound increases from N={a.N} to N={b.N}"
        for r in good:
            if r.lower > r.upper + slack:
                return False, f"lower bound exceeds upper bound at N={r.N}"
        return True, "monotone"

    @property
    def exit_code(self) -> int:
        return EXIT_PARTIAL if self.failed else EXIT_OK


def _solve_one(case: PricingCase, N: int, cfg: RunConfig) -> ReportRow:
    try:
        return ReportRow(N, compute_bounds(case, N, cfg.backend, cfg.overflow))
    except ConfigurationError:
        raise
    except Exception as exc:  # one failed N must not stop the ladder
        log.warning("N=%d failed: %s", N, exc)
        return ReportRow(N, None, str(exc))


def reference_value(cfg: RunConfig, case: PricingCase) -> tuple[float | None, float | None, str]:
    """Reference price for the relative-error column: (value, std error, kind)."""
    if cfg.oracle == "exact":
        p = case.params
        return gbm_double_barrier_exact(p["b"], p["sigma"], p["B_d"], p["B_u"], p["K"], p["x0"], p["T"]), None, "exact"
    if cfg.oracle == "mc":
        res = mc_price(case.sim_model, case.contract, cfg.mc, cfgmod.state_floor(cfg))
        return res.estimate, res.std_error, "mc"
    if cfg.reference is not None:
        return cfg.reference, None, "given"
    return None, None, "none"


def run(cfg: RunConfig, with_oracle: bool = True) -> Report:
    case = cfgmod.build_case(cfg)
    notes = []
    if cfg.example == "expvg-dnt":
        chk = check_martingale_constant(cfg.model["C"], cfg.model["G"], cfg.model["M"])
        if not chk.printed_ok:
            notes.append("sign-flipped martingale constant variant rejected; closed form matches quadrature")
    if cfg.example == "vg-dko":
        notes.append(f"p* = {case.params['p_star']:.4f}")
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(lambda N: _solve_one(case, N, cfg), cfg.Ns))
    else:
        rows = [_solve_one(case, N, cfg) for N in cfg.Ns]
    ref, se, kind = reference_value(cfg, case) if with_oracle else (None, None, "none")
    return Report(cfg.example, rows, ref, se, kind, notes)


def _rel(v: float | None, ref: float | None) -> float | None:
    if v is None or ref is None or ref == 0:
        return None
    return abs(v - ref) / abs(ref)


def _f(v: float | None, spec: str) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else format(v, spec)


def report_table(report: Report, timing: bool = True) -> list[dict[str, str]]:
    rows = []
    per_bound = report.reference_kind == "exact"
    for r in report.rows:
        res = r.result
        row = {"N": str(r.N)}
        if r.ok:
            row["lower"] = _f(res.lower, ".6f")
            row["upper"] = _f(res.upper, ".6f")
            row["status"] = "ok"
            row["rel_err"] = _f(_rel(res.midpoint, report.reference), ".4%")
            if per_bound:
                row["rel_err_lower"] = _f(_rel(res.lower, report.reference), ".4%")
                row["rel_err_upper"] = _f(_rel(res.upper, report.reference), ".4%")
        else:
            row.update(lower="", upper="", status="failed", rel_err="")
            if per_bound:
                row.update(rel_err_lower="", rel_err_upper="")
        if timing:
            row["seconds"] = _f(res.wall_time if res is not None else None, ".2f")
        rows.append(row)
    return rows


def format_report(report: Report, fmt: str = "text", timing: bool = True) -> str:
    rows = report_table(report, timing)
    cols = list(rows[0]) if rows else ["N"]
    verdict_ok, verdict = report.monotone()
    out = io.StringIO()
    if fmt == "csv":
        w = csv.DictWriter(out, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        out.write(f"# reference,{report.reference_kind},{_f(report.reference, '.6f')},{_f(report.reference_se, '.6f')}\n")
        out.write(f"# monotonicity,{verdict}\n")
        return out.getvalue()
    widths = {c: max(len(c), *(len(r[c]) for r in rows)) for c in cols}
    out.write(f"example: {report.example}\n")
    for n in report.notes:
        out.write(f"note: {n}\n")
    out.write("  ".join(c.rjust(widths[c]) for c in cols) + "\n")
    for r in rows:
        out.write("  ".join(r[c].rjust(widths[c]) for c in cols) + "\n")
    if report.reference is not None:
        se = "" if report.reference_se is None else f" (std error {report.reference_se:.6f})"
        out.write(f"reference ({report.reference_kind}): {report.reference:.6f}{se}\n")
    out.write(f"monotonicity: {verdict}\n")
    if report.failed:
        out.write(f"failed N: {', '.join(map(str, report.failed))}\n")
    return out.getvalue()


# ---------------------------------------------------------------- arguments

def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", nargs="?", help="INI run configuration")
    p.add_argument("--example", choices=cfgmod.EXAMPLES)
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--oracle", choices=cfgmod.ORACLES)
    p.add_argument("--reference", type=float)
    p.add_argument("--paths", type=int)
    p.add_argument("--steps-per-year", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--antithetic", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--scheme")
    p.add_argument("--format", dest="output", choices=cfgmod.OUTPUTS)
    p.add_argument("--backend")
    p.add_argument("--pstar-shortcut", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--workers", type=int)
    p.add_argument("--overflow", choices=("drop", "extend"))
    p.add_argument(
        "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override a [model] or [contract] value",
    )
    p.add_argument("--no-timing", action="store_true", help="omit wall-clock column (for golden files)")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        cfg = cfgmod.load(args.config)
    elif args.example:
        cfg = cfgmod.loads(Path(_bundled(args.example)).read_text())
    else:
        raise ConfigurationError("give a configuration file or --example")
    model, contract = dict(cfg.model), dict(cfg.contract)
    for item in args.set:
        key, sep, value = item.partition("=")
        section, dot, name = key.partition(".")
        if not sep or not dot or section not in ("model", "contract"):
            raise ConfigurationError(f"--set expects model.KEY=VALUE or contract.KEY=VALUE, got {item!r}")
        target = model if section == "model" else contract
        target[name] = value.strip() if name in cfgmod._STRING_KEYS else cfgmod._number(section, name, value)
    mc = cfg.mc
    mc_kw = {
        k: v for k, v in (
            ("paths", args.paths), ("steps_per_year", args.steps_per_year), ("seed", args.seed),
            ("antithetic", args.antithetic), ("scheme", args.scheme),
        ) if v is not None
    }
    if mc_kw:
        mc = replace(mc, **mc_kw)
    kw = {
        k: v for k, v in (
            ("n_min", args.n_min), ("n_max", args.n_max), ("oracle", args.oracle), ("reference", args.reference),
            ("output", args.output), ("backend", args.backend), ("pstar_shortcut", args.pstar_shortcut),
            ("workers", args.workers), ("overflow", args.overflow),
        ) if v is not None
    }
    if args.example and args.config and args.example != cfg.example:
        raise ConfigurationError("--example conflicts with the configuration file")
    return cfg.with_updates(model=model, contract=contract, mc=mc, **kw)


def _bundled(example: str) -> Path:
    from importlib import resources

    name = {"gbm-dko": "gbm_dko_case1", "vg-dko": "vg_dko_case1", "cir-corridor": "cir_corridor_case1",
            "expvg-dnt": "expvg_dnt_case1", "custom": "custom_ou"}[example]
    return Path(str(resources.files("barrier_moments") / "configs" / f"{name}.ini"))


# ------------------------------------------------------------------- verbs

def cmd_price(args) -> int:
    cfg = config_from_args(args)
    report = run(cfg)
    sys.stdout.write(format_report(report, cfg.output, timing=not args.no_timing))
    return report.exit_code


def cmd_oracle(args) -> int:
    cfg = config_from_args(args)
    if cfg.oracle == "none":
        cfg = cfg.with_updates(oracle="exact" if cfg.example == "gbm-dko" else "mc")
    case = cfgmod.build_case(cfg)
    t0 = time.perf_counter()
    value, se, kind = reference_value(cfg, case)
    elapsed = time.perf_counter() - t0
    line = {"example": cfg.example, "oracle": kind, "estimate": f"{value:.6f}", "std_error": _f(se, ".6f")}
    if kind == "mc":
        line["paths"] = str(cfg.mc.paths)
    if not args.no_timing:
        line["seconds"] = f"{elapsed:.2f}"
    if cfg.output == "csv":
        sys.stdout.write(",".join(line) + "\n" + ",".join(line.values()) + "\n")
    else:
        sys.stdout.write("  ".join(f"{k}={v}" for k, v in line.items()) + "\n")
    return EXIT_OK


def cmd_export_lp(args) -> int:
    cfg = config_from_args(args)
    case = cfgmod.build_case(cfg)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    objective = case.objective
    for N in cfg.Ns:
        for sense in ("min", "max"):
            lp = build_lp(case.model, case.pieces, objective, N, sense, overflow=cfg.overflow)
            path = write_mps(lp, outdir / f"{cfg.example}_N{N}_{sense}.mps", name=f"{cfg.example}_N{N}_{sense}")
            print(path)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_PARTIAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="barrier-moments", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("price", help="bounds ladder over N for a configuration")
    _add_run_flags(p)
    p.set_defaults(func=cmd_price)
    p = sub.add_parser("oracle", help="Monte Carlo or exact reference only")
    _add_run_flags(p)
    p.set_defaults(func=cmd_oracle)
    p = sub.add_parser("export-lp", help="write one MPS file per (N, sense)")
    _add_run_flags(p)
    p.add_argument("--outdir", default="lp_export")
    p.set_defaults(func=cmd_export_lp)
    p = sub.add_parser("selftest", help="quick invariant checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``fugitlab price|fugit|optionality|sweep|cases|figures``.

Exit codes: 0 on success, 1 on a configuration or input error, 2 on a
numerical failure (including any failed cell in a sweep).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .errors import CalibrationError, ConfigError, FugitlabError, InputError, StageError
from .european import price_european_closed
from .fugit import expected_fugit, omega_heuristic, stopping_distribution
from .lattice import Kind, LatticeConfig, OptionSpec, price_american, price_european_lattice
from .optionality import analyze
from .quadrature import gauss_hermite
from .rates import calibrate
from .scenarios import (
    emit_figure_data,
    load_config,
    load_figures,
    render_csv,
    run_cases,
    run_sweep,
    with_overrides,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors, so they exit with 1 rather than argparse's 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _is_config_error(exc: BaseException) -> bool:
    while isinstance(exc, StageError):
        exc = exc.cause
    return isinstance(exc, (ConfigError, InputError, CalibrationError))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _render(rows: list[dict[str, Any]], columns: list[str], fmt: str, header: dict[str, Any], precision: int = 4) -> str:
    if fmt == "json":
        return json.dumps({"provenance": header, "rows": [{c: r.get(c) for c in columns} for r in rows]}, indent=2) + "\n"
    return render_csv(columns, rows, header, precision)


# ---------------------------------------------------------------- shared flags


def _add_numerics(p: argparse.ArgumentParser, method: bool = False) -> None:
    p.add_argument("--config", help="scenario TOML file (shipped configs may be named without a path)")
    p.add_argument("--steps", type=int, help="lattice steps (default 2000)")
    p.add_argument("--quad-order", type=int, help="Gauss-Hermite order (default 20)")
    if method:
        p.add_argument("--method", choices=["single", "full"], help="integration over the stopping time")
    p.add_argument("--format", choices=["csv", "json"], help="output format (default csv)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for grid sweeps")


def _add_option(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("option (overrides the config's option block)")
    g.add_argument("--kind", choices=["call", "put"])
    g.add_argument("--spot", type=float)
    g.add_argument("--strike", type=float)
    g.add_argument("--maturity", type=float, help="years")
    g.add_argument("--vol", type=float, help="underlying volatility")
    g.add_argument("--r1", type=float, help="funding (domestic) rate")
    g.add_argument("--r2", type=float, help="carry (foreign rate or dividend yield)")


def _add_rate(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("rate model (overrides the config's rate block)")
    g.add_argument("--slot", choices=["r1", "r2"], help="which rate is stochastic")
    g.add_argument("--variant", help="bachelier, vasicek or lognormal")
    g.add_argument("--r0", type=float)
    g.add_argument("--r-bar", type=float, dest="r_bar")
    g.add_argument("--sigma-r", type=float, dest="sigma_r")
    g.add_argument("--kappa", type=float, help="Vasicek mean reversion")


def _base_config(args):
    return load_config(args.config) if args.config else None


def _option_from(args, cfg) -> OptionSpec:
    o = cfg.option if cfg else None
    strike = args.strike if args.strike is not None else (o.strike if o else 100.0)
    if args.spot is not None:
        spot = args.spot
    elif o:
        spot = o.strike * o.moneyness[0]
    else:
        spot = strike
    pick = lambda flag, attr, default: flag if flag is not None else (getattr(o, attr) if o else default)
    return OptionSpec(
        spot=spot,
        strike=strike,
        maturity=pick(args.maturity, "maturity", 1.0),
        volatility=pick(args.vol, "volatility", 0.40),
        r1=pick(args.r1, "r1", 0.0418),
        r2=pick(args.r2, "r2", 0.0),
        kind=Kind.parse(pick(args.kind, "kind", "put")),
    )


def _steps(args, cfg) -> LatticeConfig:
    if args.steps is not None:
        return LatticeConfig(args.steps)
    return LatticeConfig(cfg.numerics.steps if cfg else 2000)


def _fmt(args, cfg) -> str:
    return args.format or (cfg.output.format if cfg else "csv")


# ---------------------------------------------------------------- commands


def cmd_price(args) -> int:
    cfg = _base_config(args)
    spec = _option_from(args, cfg)
    lat = _steps(args, cfg)
    res = price_american(spec, lat)
    row = {
        **{k: v for k, v in asdict(spec).items() if k != "kind"},
        "kind": spec.kind.name.lower(),
        "american": res.price,
        "european_lattice": price_european_lattice(spec, lat),
        "european_closed": price_european_closed(spec).value,
        "q": res.q,
    }
    cols = ["kind", "spot", "strike", "maturity", "volatility", "r1", "r2", "american", "european_lattice", "european_closed", "q"]
    _emit(_render([row], cols, _fmt(args, cfg), {"engine": f"fugitlab {__version__}", "steps": lat.steps}), args.out)
    return EXIT_OK


def cmd_fugit(args) -> int:
    cfg = _base_config(args)
    spec = _option_from(args, cfg)
    lat = _steps(args, cfg)
    dist = stopping_distribution(spec, lat)
    conditional = not args.unconditional
    tau = expected_fugit(dist, conditional)
    header: dict[str, Any] = {
        "engine": f"fugitlab {__version__}",
        "steps": lat.steps,
        "tau_star_years": f"{tau:.6f}",
        "tau_star_months": f"{12 * tau:.6f}",
        "conditional": conditional,
        "exercise_probability": f"{dist.exercise_probability:.10f}",
        "no_exercise_mass": f"{dist.no_exercise_mass:.10f}",
    }
    if not args.no_omega:
        omega = omega_heuristic(spec, lat, args.rho_slot)
        header["omega_years"] = f"{omega:.6f}"
        header["omega_months"] = f"{12 * omega:.6f}"
    rows = [
        {"step": i, "time_years": float(t), "time_months": 12.0 * float(t), "mass": float(p)}
        for i, (t, p) in enumerate(zip(dist.times, dist.masses))
        if args.all_steps or p > 0.0
    ]
    _emit(_render(rows, ["step", "time_years", "time_months", "mass"], _fmt(args, cfg), header, precision=10), args.out)
    return EXIT_OK


def cmd_optionality(args) -> int:
    cfg = _base_config(args)
    spec = _option_from(args, cfg)
    lat = _steps(args, cfg)
    r = cfg.rate if cfg else None
    pick = lambda flag, attr, default: flag if flag is not None else (getattr(r, attr) if r else default)
    variant = args.variant or (r.variants[0] if r else "bachelier")
    sigma_r = args.sigma_r if args.sigma_r is not None else (r.sigma_r[0] if r else 0.0128)
    model = calibrate(variant, pick(args.r0, "r0", 0.01), pick(args.r_bar, "r_bar", 0.0418), sigma_r, spec.maturity, pick(args.kappa, "kappa", None))
    num = cfg.numerics if cfg else None
    order = args.quad_order or (num.quad_order if num else 20)
    method = args.method or (num.method if num else "single")
    rep = analyze(
        spec,
        model,
        args.slot or (r.slot if r else "r1"),
        lat,
        gauss_hermite(order),
        method,
        fugit_rate=num.fugit_rate if num else "r_bar",
        delta=num.delta if num else None,
    )
    row = rep.to_dict()
    row.pop("inputs")
    row["variant"] = model.variant.value
    row["sigma_r"] = sigma_r
    cols = ["variant", "sigma_r", "tau_star_years", "tau_star_months", "omega_years", "omega_months", "r_star",
            "o_a_star", "o_a_tilde", "o_e_tilde", "pi_a", "pi_a2", "pi_delta_a", "exercise_probability", "method"]
    header = {"engine": f"fugitlab {__version__}", "steps": lat.steps, "quad_order": order}
    _emit(_render([row], cols, _fmt(args, cfg), header, cfg.output.precision if cfg else 4), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.config:
        raise ConfigError("sweep requires --config")
    cfg = with_overrides(load_config(args.config), args.steps, args.quad_order, args.method)
    result = run_sweep(cfg, max(1, args.jobs))
    _emit(result.render(args.format), args.out or cfg.output.path)
    for r in result.errors:
        print(f"cell {r['cell']}: {r['error']}", file=sys.stderr)
    return EXIT_NUMERIC if result.errors else EXIT_OK


def cmd_cases(args) -> int:
    which = args.case or ["case1", "case1b", "case2"]
    res = run_cases(which, args.steps or 2000)
    cols = ["case", "description", "american", "european", "european_simple", "quoted_american", "quoted_european"]
    rows = [asdict(c) for c in res]
    _emit(_render(rows, cols, args.format or "csv", {"engine": f"fugitlab {__version__}"}), args.out)
    return EXIT_OK


def cmd_figures(args) -> int:
    figs = load_figures(args.config or "figures.toml")
    if args.steps is not None or args.quad_order is not None or args.method is not None:
        figs = [with_overrides(f, args.steps, args.quad_order, args.method) for f in figs]
    known = {f.figure for f in figs}
    unknown = set(args.only or []) - known
    if unknown:
        raise ConfigError(f"unknown figure ids: {sorted(unknown)}")
    written = emit_figure_data(figs, args.out or "figures", max(1, args.jobs), args.only)
    failed = 0
    for path, errors in written:
        print(f"{path}" + (f" ({errors} failed cells)" if errors else ""))
        failed += errors
    return EXIT_NUMERIC if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fugitlab", description="Hidden optionality of American options under stochastic rates.")
    parser.add_argument("--version", action="version", version=f"fugitlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("price", help="American and European prices at deterministic rates")
    _add_numerics(p)
    _add_option(p)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("fugit", help="stopping-time pmf, tau* and the rho-ratio duration")
    _add_numerics(p)
    _add_option(p)
    p.add_argument("--unconditional", action="store_true", help="count never-exercised paths at maturity")
    p.add_argument("--rho-slot", choices=["r1", "r2"], default="r2", help="rate moved for the rho ratio")
    p.add_argument("--no-omega", action="store_true", help="skip the rho-ratio duration")
    p.add_argument("--all-steps", action="store_true", help="also list steps with zero mass")
    p.set_defaults(func=cmd_fugit)

    p = sub.add_parser("optionality", help="pi_A, pi_A^(2) and pi_delta_a for one scenario")
    _add_numerics(p, method=True)
    _add_option(p)
    _add_rate(p)
    p.set_defaults(func=cmd_optionality)

    p = sub.add_parser("sweep", help="run every cell of a scenario grid")
    _add_numerics(p, method=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cases", help="the three deterministic rate-move cases")
    p.add_argument("--case", action="append", choices=["case1", "case1b", "case2"])
    p.add_argument("--steps", type=int)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_cases)

    p = sub.add_parser("figures", help="write one CSV per figure id")
    _add_numerics(p, method=True)
    p.add_argument("--only", action="append", help="figure id to emit (repeatable)")
    p.set_defaults(func=cmd_figures)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FugitlabError as exc:
        code = EXIT_CONFIG if _is_config_error(exc) else EXIT_NUMERIC
        print(f"fugitlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"fugitlab: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Scenario sweeps, the deterministic valuation cases and figure data.

A scenario file is a TOML tree with four blocks::

    [option]    kind, strike, maturity, volatility, r1, r2, moneyness = [...]
    [rate]      slot, variant (or list), r0, r_bar, sigma_r = [...], kappa
    [numerics]  steps, quad_order, method, fugit_rate, delta, rho_slot
    [output]    format, path, precision

plus top-level ``name``, ``target`` (the table or figure reproduced) and
``table`` (``optionality`` or ``stopping``).  A figures file holds a list of
such scenarios under ``[[figure]]`` with ``id``, ``x`` and ``y`` keys.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .errors import ConfigError, FugitlabError
from .european import price_european_closed
from .fugit import expected_fugit, stopping_distribution
from .lattice import Kind, LatticeConfig, OptionSpec, price_american, rho
from .optionality import analyze, fugit_spec
from .quadrature import Method, gauss_hermite
from .rates import DEFAULT_KAPPA, Variant, calibrate

OPTIONALITY_COLUMNS = [
    "cell",
    "moneyness",
    "spot",
    "variant",
    "sigma_r",
    "tau_star_years",
    "tau_star_months",
    "omega_years",
    "omega_months",
    "r_star",
    "o_a_star",
    "o_a_tilde",
    "o_e_tilde",
    "pi_a",
    "pi_a2",
    "pi_delta_a",
    "exercise_probability",
    "error",
]
STOPPING_COLUMNS = [
    "cell",
    "moneyness",
    "spot",
    "rho_a",
    "rho_e",
    "omega_years",
    "omega_months",
    "tau_star_years",
    "tau_star_months",
    "exercise_probability",
    "error",
]
# Columns printed with the price precision; everything else numeric gets more digits.
PRICE_COLUMNS = {"o_a_star", "o_a_tilde", "o_e_tilde", "pi_a", "pi_a2", "pi_delta_a", "rho_a", "rho_e"}
# Probabilities can be tiny, so they keep significant digits instead of decimals.
MASS_COLUMNS = {"mass"}


@dataclass(frozen=True)
class OptionBlock:
    kind: str = "put"
    strike: float = 100.0
    maturity: float = 1.0
    volatility: float = 0.40
    r1: float = 0.0
    r2: float = 0.0
    spot: float | None = None
    moneyness: tuple[float, ...] = (1.0,)


@dataclass(frozen=True)
class RateBlock:
    slot: str = "r1"
    variants: tuple[str, ...] = ("bachelier",)
    r0: float = 0.01
    r_bar: float = 0.0418
    sigma_r: tuple[float, ...] = (0.0128,)
    kappa: float = DEFAULT_KAPPA


@dataclass(frozen=True)
class NumericsBlock:
    steps: int = 2000
    quad_order: int = 20
    method: str = "single"
    fugit_rate: str = "r_bar"
    rho_slot: str = "r2"
    delta: float | None = None
    conditional: bool = True
    refine: bool = False


@dataclass(frozen=True)
class OutputBlock:
    format: str = "csv"
    path: str | None = None
    precision: int = 4


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    target: str
    table: str
    option: OptionBlock
    rate: RateBlock
    numerics: NumericsBlock
    output: OutputBlock
    # figure-only keys
    figure: str | None = None
    x: str | None = None
    y: str | None = None
    caption_benchmark: float | None = None

    def cells(self) -> list[dict[str, Any]]:
        out = []
        if self.table == "stopping":
            for m in self.option.moneyness:
                out.append({"moneyness": m})
        else:
            for m in self.option.moneyness:
                for v in self.rate.variants:
                    for s in self.rate.sigma_r:
                        out.append({"moneyness": m, "variant": v, "sigma_r": s})
        return [{"cell": i, **c} for i, c in enumerate(out)]

    def canonical(self) -> dict[str, Any]:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def _tuple(value, name: str, cast=float) -> tuple:
    if value is None:
        raise ConfigError(f"{name} is required")
    items = value if isinstance(value, list) else [value]
    try:
        return tuple(cast(v) for v in items)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _block(cls, raw: dict | None, name: str, **conv):
    raw = dict(raw or {})
    known = set(cls.__dataclass_fields__)
    unknown = set(raw) - known - set(conv)
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        if key in conv:
            target, fn = conv[key]
            kwargs[target] = fn(value)
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"[{name}]: {exc}") from None


def parse_config(raw: dict[str, Any]) -> ScenarioConfig:
    """Validate a raw TOML mapping into a ScenarioConfig."""
    option = _block(OptionBlock, raw.get("option"), "option", moneyness=("moneyness", lambda v: _tuple(v, "moneyness")))
    rate = _block(
        RateBlock,
        raw.get("rate"),
        "rate",
        variant=("variants", lambda v: _tuple(v, "variant", lambda s: Variant.parse(s).value)),
        sigma_r=("sigma_r", lambda v: _tuple(v, "sigma_r")),
    )
    numerics = _block(NumericsBlock, raw.get("numerics"), "numerics")
    output = _block(OutputBlock, raw.get("output"), "output")
    table = raw.get("table", "optionality")

    if table not in ("optionality", "stopping"):
        raise ConfigError(f"table must be 'optionality' or 'stopping', got {table!r}")
    if not option.moneyness:
        raise ConfigError("option.moneyness grid is empty")
    if table == "optionality" and not rate.sigma_r:
        raise ConfigError("rate.sigma_r grid is empty")
    if not rate.variants:
        raise ConfigError("rate.variant list is empty")
    if any(not math.isfinite(x) or x <= 0 for x in option.moneyness):
        raise ConfigError("moneyness values must be positive and finite")
    if any(not math.isfinite(x) or x < 0 for x in rate.sigma_r):
        raise ConfigError("sigma_r values must be non-negative and finite")
    if rate.slot not in ("r1", "r2") or numerics.rho_slot not in ("r1", "r2"):
        raise ConfigError("rate slots must be 'r1' or 'r2'")
    if numerics.method not in ("single", "full"):
        raise ConfigError(f"numerics.method must be 'single' or 'full', got {numerics.method!r}")
    if numerics.fugit_rate not in ("r_bar", "r0", "spec"):
        raise ConfigError(f"numerics.fugit_rate must be r_bar, r0 or spec, got {numerics.fugit_rate!r}")
    if output.format not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {output.format!r}")
    try:
        Kind.parse(option.kind)
    except FugitlabError as exc:
        raise ConfigError(str(exc)) from None
    unknown = set(raw) - {"name", "target", "table", "option", "rate", "numerics", "output", "id", "x", "y", "caption_benchmark"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    return ScenarioConfig(
        name=str(raw.get("name", raw.get("id", "scenario"))),
        target=str(raw.get("target", "")),
        table=table,
        option=option,
        rate=rate,
        numerics=numerics,
        output=output,
        figure=raw.get("id"),
        x=raw.get("x"),
        y=raw.get("y"),
        caption_benchmark=raw.get("caption_benchmark"),
    )


def resolve_config_path(path: str | Path) -> Path:
    """Return ``path`` if it exists, else the shipped config of that name."""
    p = Path(path)
    if p.exists():
        return p
    shipped = resources.files("fugitlab") / "configs" / p.name
    if shipped.is_file():
        return Path(str(shipped))
    raise ConfigError(f"config file not found: {path}")


def load_raw(path: str | Path) -> dict[str, Any]:
    p = resolve_config_path(path)
    try:
        return tomllib.loads(p.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from None


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(load_raw(path))


def load_figures(path: str | Path) -> list[ScenarioConfig]:
    raw = load_raw(path)
    figs = raw.get("figure")
    if not isinstance(figs, list):
        raise ConfigError("figures file must contain [[figure]] tables")
    return [parse_config(f) for f in figs]


# ---------------------------------------------------------------- cell runners


def _cell_spec(cfg: ScenarioConfig, moneyness: float) -> OptionSpec:
    o = cfg.option
    return OptionSpec(
        # The moneyness grid governs; option.spot is informational only.
        spot=o.strike * moneyness,
        strike=o.strike,
        maturity=o.maturity,
        volatility=o.volatility,
        r1=o.r1,
        r2=o.r2,
        kind=Kind.parse(o.kind),
    )


def _run_cell(args: tuple[ScenarioConfig, dict[str, Any]]) -> dict[str, Any]:
    cfg, cell = args
    row: dict[str, Any] = dict(cell)
    try:
        spec = _cell_spec(cfg, cell["moneyness"])
        row["spot"] = spec.spot
        lat = LatticeConfig(cfg.numerics.steps)
        if cfg.table == "stopping":
            model = calibrate(cfg.rate.variants[0], cfg.rate.r0, cfg.rate.r_bar, cfg.rate.sigma_r[0] if cfg.rate.sigma_r else 0.0, cfg.option.maturity, cfg.rate.kappa)
            base = fugit_spec(spec, model, cfg.rate.slot, cfg.numerics.fugit_rate)
            dist = stopping_distribution(base, lat)
            tau = expected_fugit(dist, cfg.numerics.conditional)
            ra = rho(base, lat, "american", cfg.numerics.rho_slot)
            re = rho(base, lat, "european", cfg.numerics.rho_slot)
            omega = base.maturity * ra / re
            row.update(
                rho_a=ra,
                rho_e=re,
                omega_years=omega,
                omega_months=12 * omega,
                tau_star_years=tau,
                tau_star_months=12 * tau,
                exercise_probability=dist.exercise_probability,
                error="",
            )
            return row
        model = calibrate(cell["variant"], cfg.rate.r0, cfg.rate.r_bar, cell["sigma_r"], cfg.option.maturity, cfg.rate.kappa)
        rep = analyze(
            spec,
            model,
            cfg.rate.slot,
            lat,
            gauss_hermite(cfg.numerics.quad_order),
            Method(cfg.numerics.method),
            fugit_rate=cfg.numerics.fugit_rate,
            delta=cfg.numerics.delta,
            conditional=cfg.numerics.conditional,
            refine=cfg.numerics.refine,
        )
        row.update(
            tau_star_years=rep.tau_star,
            tau_star_months=rep.tau_star_months,
            omega_years=rep.omega,
            omega_months=rep.omega_months,
            r_star=rep.r_star,
            o_a_star=rep.o_a_star,
            o_a_tilde=rep.o_a_tilde,
            o_e_tilde=rep.o_e_tilde,
            pi_a=rep.pi_a,
            pi_a2=rep.pi_a2,
            pi_delta_a=rep.pi_delta_a,
            exercise_probability=rep.exercise_probability,
            error="",
        )
    except FugitlabError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


@dataclass
class SweepResult:
    config: ScenarioConfig
    rows: list[dict[str, Any]]
    header: dict[str, Any] = field(default_factory=dict)

    @property
    def columns(self) -> list[str]:
        return STOPPING_COLUMNS if self.config.table == "stopping" else OPTIONALITY_COLUMNS

    @property
    def errors(self) -> list[dict[str, Any]]:
        return [r for r in self.rows if r.get("error")]

    def to_csv(self) -> str:
        return render_csv(self.columns, self.rows, self.header, self.config.output.precision)

    def to_json(self) -> str:
        payload = {"provenance": self.header, "rows": [{c: r.get(c) for c in self.columns} for r in self.rows]}
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"

    def render(self, fmt: str | None = None) -> str:
        return self.to_json() if (fmt or self.config.output.format) == "json" else self.to_csv()


def _fmt(value: Any, column: str, precision: int) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        if column in MASS_COLUMNS:
            return f"{value:.12g}"
        # Figure series are labelled "<column>[<series>]".
        digits = precision if column.split("[", 1)[0] in PRICE_COLUMNS else max(precision, 6)
        return f"{value:.{digits}f}"
    return str(value)


def render_csv(columns: list[str], rows: Iterable[dict[str, Any]], header: dict[str, Any], precision: int) -> str:
    buf = io.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c), c, precision) for c in columns])
    return buf.getvalue()


def provenance(cfg: ScenarioConfig) -> dict[str, Any]:
    return {
        "target": cfg.target or "-",
        "engine": f"fugitlab {__version__}",
        "config_sha256": cfg.digest(),
        "steps": cfg.numerics.steps,
        "quad_order": cfg.numerics.quad_order,
    }


def run_sweep(cfg: ScenarioConfig, jobs: int = 1) -> SweepResult:
    """Evaluate every cell of the grid; failures land in the ``error`` column.

    Cells may run in a process pool; output order is the cell index regardless.
    """
    cells = cfg.cells()
    tasks = [(cfg, c) for c in cells]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, tasks))
    else:
        rows = [_run_cell(t) for t in tasks]
    rows.sort(key=lambda r: r["cell"])
    return SweepResult(cfg, rows, provenance(cfg))


def with_overrides(cfg: ScenarioConfig, steps: int | None = None, quad_order: int | None = None, method: str | None = None) -> ScenarioConfig:
    from dataclasses import replace

    num = cfg.numerics
    num = replace(
        num,
        steps=steps if steps is not None else num.steps,
        quad_order=quad_order if quad_order is not None else num.quad_order,
        method=method if method is not None else num.method,
    )
    if num.method not in ("single", "full"):
        raise ConfigError(f"method must be 'single' or 'full', got {num.method!r}")
    return replace(cfg, numerics=num)


# ---------------------------------------------------------------- deterministic cases


@dataclass(frozen=True)
class CaseResult:
    case: str
    description: str
    american: float
    european: float
    quoted_american: float
    quoted_european: float
    european_simple: float


def run_cases(which: Iterable[str] = ("case1", "case1b", "case2"), steps: int = 2000) -> list[CaseResult]:
    """American vs European value after the rate moves of the three deterministic cases.

    Volatility is zero, so values are discounted intrinsic values.  Options on
    a forward are modelled with carry equal to the funding rate.
    ``european_simple`` repeats the European leg with simple annual
    compounding, for comparison with the round figures quoted for these cases.
    """
    lat = LatticeConfig(steps)
    table = {
        "case1": (
            "forward 140, funding and carry 10%: option on the forward",
            OptionSpec(140.0, 100.0, 1.0, 0.0, 0.10, 0.10, Kind.CALL),
            40.0,
            36.36,
            40.0 / 1.10,
        ),
        "case1b": (
            "forward falls to 126 with funding at 10%: option on the forward",
            OptionSpec(126.0, 100.0, 1.0, 0.0, 0.10, 0.10, Kind.CALL),
            26.0,
            23.64,
            26.0 / 1.10,
        ),
        "case2": (
            "spot 140, domestic 0%, foreign rate 20%: option on spot",
            OptionSpec(140.0, 100.0, 1.0, 0.0, 0.0, 0.20, Kind.CALL),
            40.0,
            16.0,
            140.0 / 1.20 - 100.0,
        ),
    }
    out = []
    for key in which:
        key = key.lower()
        if key not in table:
            raise ConfigError(f"unknown case {key!r}; expected one of {sorted(table)}")
        desc, spec, pa, pe, simple = table[key]
        out.append(
            CaseResult(
                case=key,
                description=desc,
                american=price_american(spec, lat).price,
                european=price_european_closed(spec).value,
                quoted_american=pa,
                quoted_european=pe,
                european_simple=simple,
            )
        )
    return out


# ---------------------------------------------------------------- figure data


def figure_csv(fig: ScenarioConfig, sweep: SweepResult) -> str:
    """Pivot a sweep into one x column and one y column per series."""
    prec = fig.output.precision
    header = {"figure": fig.figure, **sweep.header}
    if fig.caption_benchmark is not None:
        header["caption_o_a_star"] = f"{fig.caption_benchmark:.4f}"
    rows = sweep.rows
    if rows and fig.table == "optionality":
        at_center = [r for r in rows if r.get("moneyness") == 1.0 and r.get("o_a_star") is not None]
        if at_center:
            header["computed_o_a_star"] = f"{at_center[0]['o_a_star']:.4f}"

    if fig.table == "stopping":
        cols = ["moneyness", "omega_months", "tau_star_months"]
        return render_csv(cols, rows, header, prec)

    y = fig.y or "pi_a"
    if fig.x == "moneyness":
        series = list(dict.fromkeys((c["variant"], c["sigma_r"]) for c in fig.cells()))
        label = lambda v, s: f"{y}[{v},sigma_r={s:g}]" if len(series) > 1 else y
        cols = ["moneyness"] + [label(v, s) for v, s in series]
        pivot: dict[float, dict[str, Any]] = {}
        for r in rows:
            pivot.setdefault(r["moneyness"], {"moneyness": r["moneyness"]})[label(r["variant"], r["sigma_r"])] = r.get(y)
    else:
        series = list(dict.fromkeys((c["variant"], c["moneyness"]) for c in fig.cells()))
        label = lambda v, m: f"{y}[{v},S/K={m:g}]" if len(series) > 1 else y
        cols = ["sigma_r"] + [label(v, m) for v, m in series]
        pivot = {}
        for r in rows:
            pivot.setdefault(r["sigma_r"], {"sigma_r": r["sigma_r"]})[label(r["variant"], r["moneyness"])] = r.get(y)
    return render_csv(cols, list(pivot.values()), header, prec)


def emit_figure_data(
    figs: list[ScenarioConfig], out_dir: str | Path, jobs: int = 1, only: Iterable[str] | None = None
) -> list[tuple[Path, int]]:
    """Write ``<id>.csv`` per figure; returns (path, number of failed cells) pairs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    wanted = set(only) if only else None
    written = []
    for fig in figs:
        if wanted is not None and fig.figure not in wanted:
            continue
        sweep = run_sweep(fig, jobs)
        path = out_dir / f"{fig.figure}.csv"
        path.write_text(figure_csv(fig, sweep), encoding="utf-8")
        written.append((path, len(sweep.errors)))
    return written

"""Cox-Ross-Rubinstein binomial lattice for American and European options.

Rates are held flat over the life of the option.  ``r1`` is the funding
(discount) rate and ``r2`` the carry: a continuous dividend yield for equity
or the foreign rate for a currency pair.

The pricing kernel is vectorised across a batch of (r1, r2) pairs so that
quadrature integrators can price every rate node in a single rollback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Literal, Sequence

import numpy as np

from .errors import InputError, LatticeError

DEFAULT_STEPS = 2000
RHO_BUMP = 0.01

RateSlot = Literal["r1", "r2"]
Style = Literal["american", "european"]


class Kind(IntEnum):
    CALL = 1
    PUT = -1

    @classmethod
    def parse(cls, value: "Kind | str | int") -> "Kind":
        if isinstance(value, Kind):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise InputError(f"unknown option kind {value!r}; expected 'call' or 'put'") from None
        return cls(int(value))


@dataclass(frozen=True)
class OptionSpec:
    spot: float
    strike: float
    maturity: float
    volatility: float
    r1: float
    r2: float
    kind: Kind = Kind.PUT

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        for name in ("spot", "strike", "maturity", "volatility", "r1", "r2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InputError(f"{name} must be finite, got {value!r}")
        if self.spot <= 0 or self.strike <= 0:
            raise InputError(f"spot and strike must be positive (spot={self.spot}, strike={self.strike})")
        if self.maturity <= 0:
            raise InputError(f"maturity must be positive, got {self.maturity}")
        if self.volatility < 0:
            raise InputError(f"volatility must be non-negative, got {self.volatility}")

    @property
    def phi(self) -> int:
        return int(self.kind)

    def intrinsic(self, spot: float | None = None) -> float:
        s = self.spot if spot is None else spot
        return max(self.phi * (s - self.strike), 0.0)

    def with_rate(self, slot: RateSlot, value: float) -> "OptionSpec":
        check_slot(slot)
        return replace(self, **{slot: value})


def check_slot(slot: str) -> None:
    if slot not in ("r1", "r2"):
        raise InputError(f"rate slot must be 'r1' or 'r2', got {slot!r}")


@dataclass(frozen=True)
class LatticeConfig:
    steps: int = DEFAULT_STEPS

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise InputError(f"lattice steps must be a positive integer, got {self.steps!r}")


@dataclass
class LatticeResult:
    price: float
    u: float
    d: float
    q: float
    dt: float
    # exercise[i] is the boolean indicator I(i, j) for j = 0..i, i < n.
    exercise: list[np.ndarray] | None = field(default=None, repr=False)
    # Nodes at maturity with strictly positive payoff.
    terminal_itm: np.ndarray | None = field(default=None, repr=False)


def _parameters(spec: OptionSpec, n: int, r1: float, r2: float) -> tuple[float, float, float]:
    """Return (log u, log d, q) for one rate pair."""
    dt = spec.maturity / n
    if spec.volatility == 0.0:
        # Degenerate lattice: a single deterministic forward path.
        g = (r1 - r2) * dt
        return g, g, 1.0
    lu = spec.volatility * math.sqrt(dt)
    u, d = math.exp(lu), math.exp(-lu)
    if u == d:
        raise LatticeError(f"volatility={spec.volatility} is too small to separate up and down moves; use 0")
    q = (math.exp((r1 - r2) * dt) - d) / (u - d)
    if not 0.0 <= q <= 1.0:
        raise LatticeError(
            f"risk-neutral probability q={q:.6g} outside [0, 1]: volatility={spec.volatility} is too "
            f"small for r1={r1}, r2={r2} at dt={dt:.6g} (need sigma*sqrt(dt) >= |r1 - r2|*dt); "
            f"increase volatility or steps"
        )
    return lu, -lu, q


def _rollback(
    spec: OptionSpec,
    n: int,
    lu: float,
    ld: float,
    r1: np.ndarray,
    q: np.ndarray,
    american: bool,
    keep_grid: bool,
):
    """Backward induction for a batch of rate pairs sharing one node geometry."""
    dt = spec.maturity / n
    phi, strike = spec.phi, spec.strike
    # Node spot S exp(i ld + j (lu - ld)) from one exponent, so the central
    # node of a symmetric lattice lands exactly on the initial spot.
    steps = np.arange(n + 1) * (lu - ld)
    disc = np.array([math.exp(-r * dt) for r in r1])[:, None]
    q = q[:, None]
    p = 1.0 - q

    spots = spec.spot * np.exp(n * ld + steps)
    payoff = np.maximum(phi * (spots - strike), 0.0)
    values = np.broadcast_to(payoff, (len(r1), n + 1)).copy()
    grid: list[np.ndarray] | None = [None] * n if keep_grid else None  # type: ignore[list-item]

    for i in range(n - 1, -1, -1):
        cont = disc * (q * values[:, 1 : i + 2] + p * values[:, : i + 1])
        if american:
            spots = spec.spot * np.exp(i * ld + steps[: i + 1])
            intrinsic = np.maximum(phi * (spots - strike), 0.0)
            if keep_grid:
                # Ties go to exercise; zero-payoff nodes are never exercise nodes.
                grid[i] = (intrinsic > 0.0) & (intrinsic >= cont[0])
            values = np.maximum(cont, intrinsic)
        else:
            values = cont
    return values[:, 0], grid, payoff > 0.0


def price_batch(
    spec: OptionSpec,
    r1: Sequence[float] | np.ndarray,
    r2: Sequence[float] | np.ndarray,
    cfg: LatticeConfig = LatticeConfig(),
    style: Style = "american",
) -> np.ndarray:
    """Lattice prices of ``spec`` for each (r1[k], r2[k]) pair, holding the pair flat.

    Each entry is bit-identical to the corresponding scalar ``price_american`` /
    ``price_european_lattice`` call.
    """
    r1 = np.asarray(r1, dtype=float).ravel()
    r2 = np.asarray(r2, dtype=float).ravel()
    if r1.shape != r2.shape:
        raise InputError("r1 and r2 batches must have the same length")
    if not (np.all(np.isfinite(r1)) and np.all(np.isfinite(r2))):
        raise InputError("rates must be finite")
    n = cfg.steps
    american = style == "american"
    out = np.empty(len(r1))
    if spec.volatility == 0.0:
        for k in range(len(r1)):
            lu, ld, qk = _parameters(spec, n, r1[k], r2[k])
            out[k] = _rollback(spec, n, lu, ld, r1[k : k + 1], np.array([qk]), american, False)[0][0]
        return out
    qs = np.empty(len(r1))
    lu = ld = 0.0
    for k in range(len(r1)):
        lu, ld, qs[k] = _parameters(spec, n, r1[k], r2[k])
    if len(r1):
        out[:] = _rollback(spec, n, lu, ld, r1, qs, american, False)[0]
    return out


def price_american(spec: OptionSpec, cfg: LatticeConfig = LatticeConfig(), keep_grid: bool = False) -> LatticeResult:
    """American value by backward recursion on the CRR lattice.

    With ``keep_grid`` the early-exercise indicator is retained for every node
    before maturity (about n^2/2 booleans), which the stopping-time
    distribution consumes.
    """
    n = cfg.steps
    lu, ld, q = _parameters(spec, n, spec.r1, spec.r2)
    values, grid, itm = _rollback(spec, n, lu, ld, np.array([spec.r1]), np.array([q]), True, keep_grid)
    return LatticeResult(
        price=float(values[0]),
        u=math.exp(lu),
        d=math.exp(ld),
        q=q,
        dt=spec.maturity / n,
        exercise=grid,
        terminal_itm=itm if keep_grid else None,
    )


def price_european_lattice(spec: OptionSpec, cfg: LatticeConfig = LatticeConfig()) -> float:
    n = cfg.steps
    lu, ld, q = _parameters(spec, n, spec.r1, spec.r2)
    values, _, _ = _rollback(spec, n, lu, ld, np.array([spec.r1]), np.array([q]), False, False)
    return float(values[0])


def lattice_price(spec: OptionSpec, cfg: LatticeConfig = LatticeConfig(), style: Style = "american") -> float:
    if style == "american":
        return price_american(spec, cfg).price
    if style == "european":
        return price_european_lattice(spec, cfg)
    raise InputError(f"style must be 'american' or 'european', got {style!r}")


def mean_abs_bump(price_at, rate: float, bump: float = RHO_BUMP) -> float:
    """(|f(r+h) - f(r)| + |f(r-h) - f(r)|) / 2 for a rate-indexed price function."""
    base = price_at(rate)
    return (abs(price_at(rate + bump) - base) + abs(price_at(rate - bump) - base)) / 2.0


def rho(
    spec: OptionSpec,
    cfg: LatticeConfig = LatticeConfig(),
    style: Style = "american",
    slot: RateSlot = "r2",
    bump: float = RHO_BUMP,
) -> float:
    """Mean absolute price move for a +/- ``bump`` shift of one rate.

    This is a per-bump magnitude, not a derivative.  The default slot is the
    carry ``r2``.  ``style="european"`` uses the closed form, as the
    American/European ratio is taken against the analytic European rho.
    """
    check_slot(slot)
    if style == "american":
        rates = getattr(spec, slot) + np.array([0.0, bump, -bump])
        other = np.full(3, spec.r2 if slot == "r1" else spec.r1)
        r1, r2 = (rates, other) if slot == "r1" else (other, rates)
        base, up, down = price_batch(spec, r1, r2, cfg, "american")
        return (abs(up - base) + abs(down - base)) / 2.0
    if style == "european":
        from .european import price_european_closed

        return mean_abs_bump(lambda r: price_european_closed(spec.with_rate(slot, r)).value, getattr(spec, slot), bump)
    raise InputError(f"style must be 'american' or 'european', got {style!r}")

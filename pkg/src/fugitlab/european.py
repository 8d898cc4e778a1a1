"""Closed-form European prices with a continuous carry (Garman-Kohlhagen form)."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError
from .lattice import OptionSpec, RateSlot, check_slot

SQRT2 = math.sqrt(2.0)


def norm_cdf(x: float) -> float:
    # erfc keeps full relative precision in the lower tail.
    return 0.5 * math.erfc(-x / SQRT2)


@dataclass(frozen=True)
class EuropeanPrice:
    value: float
    d1: float
    d2: float


def price_european_closed(spec: OptionSpec) -> EuropeanPrice:
    """Black-Scholes-Merton value with forward F = S exp((r1 - r2) T), discounted at r1.

    Zero volatility returns the discounted intrinsic value of the forward
    (d1 = d2 = +/-inf by convention).
    """
    s, k, t, sig, r1, r2, phi = spec.spot, spec.strike, spec.maturity, spec.volatility, spec.r1, spec.r2, spec.phi
    df_dom = math.exp(-r1 * t)
    df_for = math.exp(-r2 * t)
    if sig == 0.0:
        fwd = s * df_for / df_dom
        value = df_dom * max(phi * (fwd - k), 0.0)
        edge = math.copysign(math.inf, fwd - k) if fwd != k else 0.0
        return EuropeanPrice(value, edge, edge)
    vol_t = sig * math.sqrt(t)
    d1 = (math.log(s / k) + (r1 - r2 + 0.5 * sig * sig) * t) / vol_t
    d2 = d1 - vol_t
    value = phi * (s * df_for * norm_cdf(phi * d1) - k * df_dom * norm_cdf(phi * d2))
    if not math.isfinite(value):
        raise InputError(f"closed-form price is not finite for {spec}")
    return EuropeanPrice(max(value, 0.0), d1, d2)


def stochastic_european(spec: OptionSpec, model, slot: RateSlot, rule) -> float:
    """Gauss-Hermite average of the closed form against the rate law at the contract maturity."""
    check_slot(slot)
    law = model.marginal_at(spec.maturity)
    if law.is_point_mass:
        return price_european_closed(spec.with_rate(slot, law.mean)).value
    rates = law.rates_at(rule.nodes)
    prices = [price_european_closed(spec.with_rate(slot, float(r))).value for r in rates]
    return rule.expectation(prices)

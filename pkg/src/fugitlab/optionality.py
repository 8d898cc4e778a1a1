"""Hidden-optionality measures for American options under stochastic rates.

``pi_a``       stochastic-rate American value minus the American value at the
               benchmark rate r* (the mean rate at the expected exercise time).
``pi_a2``      stochastic-rate American value minus the stochastic-rate
               European value (European leg integrated at maturity).
``pi_delta_a`` three-point curvature estimate from moving one rate by +/- delta.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Literal

import numpy as np

from .errors import InputError, StageError
from .european import stochastic_european
from .fugit import StoppingDistribution, expected_fugit, omega_heuristic, stopping_distribution
from .lattice import LatticeConfig, OptionSpec, RateSlot, check_slot, price_american, price_batch
from .quadrature import (
    Method,
    QuadratureRule,
    StochasticPriceResult,
    gauss_hermite,
    integrate_full_distribution,
    integrate_single_fugit,
)
from .rates import RateModel

FugitRate = Literal["r_bar", "r0", "spec"]


@dataclass
class OptionalityReport:
    o_a_star: float
    o_a_tilde: float
    o_e_tilde: float
    pi_a: float
    pi_a2: float
    pi_delta_a: float
    tau_star: float
    omega: float
    r_star: float
    exercise_probability: float
    method: str
    inputs: dict[str, Any] = field(default_factory=dict)

    @property
    def tau_star_months(self) -> float:
        return 12.0 * self.tau_star

    @property
    def omega_months(self) -> float:
        return 12.0 * self.omega

    def check(self) -> None:
        if self.pi_a != self.o_a_tilde - self.o_a_star:
            raise AssertionError("pi_a is not o_a_tilde - o_a_star")

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["tau_star_months"] = self.tau_star_months
        out["omega_months"] = self.omega_months
        return out


def _stage(name: str, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def fugit_spec(spec: OptionSpec, model: RateModel, slot: RateSlot, fugit_rate: FugitRate = "r_bar") -> OptionSpec:
    """Deterministic spec on which the stopping distribution is computed.

    ``r_bar`` sets the stochastic slot to the model's target mean, ``r0`` to
    its initial value and ``spec`` leaves the slot as given.
    """
    if fugit_rate == "spec":
        return spec
    if fugit_rate == "r_bar":
        if model.r_bar is None:
            raise InputError("rate model carries no target mean; use fugit_rate='r0' or 'spec'")
        return spec.with_rate(slot, model.r_bar)
    if fugit_rate == "r0":
        return spec.with_rate(slot, model.r0)
    raise InputError(f"unknown fugit_rate {fugit_rate!r}")


def benchmark_rate(model: RateModel, tau_star: float) -> float:
    """Mean of the rate at the expected exercise time."""
    return model.marginal_at(tau_star).mean


def mean_deviation(model: RateModel, t: float) -> float:
    """Mean absolute deviation of r(t) when its law is Gaussian, sd * sqrt(2 / pi)."""
    return model.marginal_at(t).sd * math.sqrt(2.0 / math.pi)


def pi_delta_a(
    spec: OptionSpec,
    slot: RateSlot,
    delta: float,
    cfg: LatticeConfig = LatticeConfig(),
    center: float | None = None,
    price_fn: Callable[[float], float] | None = None,
) -> float:
    """(O(c + delta) + O(c - delta)) / 2 - O(c), with c the current ``slot`` rate by default."""
    check_slot(slot)
    if delta < 0 or not math.isfinite(delta):
        raise InputError(f"delta must be a non-negative finite rate, got {delta}")
    c = getattr(spec, slot) if center is None else center
    if delta == 0.0:
        return 0.0
    if price_fn is None:
        rates = np.array([c + delta, c - delta, c])
        fixed = np.full(3, spec.r2 if slot == "r1" else spec.r1)
        up, down, mid = price_batch(spec, *((rates, fixed) if slot == "r1" else (fixed, rates)), cfg)
    else:
        up, down, mid = price_fn(c + delta), price_fn(c - delta), price_fn(c)
    return 0.5 * (up + down) - mid


def analyze(
    spec: OptionSpec,
    model: RateModel,
    slot: RateSlot = "r1",
    cfg: LatticeConfig = LatticeConfig(),
    rule: QuadratureRule | None = None,
    method: Method | str = Method.SINGLE_FUGIT,
    fugit_rate: FugitRate = "r_bar",
    delta: float | None = None,
    conditional: bool = True,
    refine: bool = False,
    with_omega: bool = True,
    with_european: bool = True,
    max_atoms: int | None = 64,
) -> OptionalityReport:
    """Full pipeline for one scenario.

    1. stopping pmf and tau* on the deterministic lattice (slot at ``fugit_rate``);
    2. r* = mean of the rate law at tau*;
    3. O_A(r*) on the lattice;
    4. the stochastic-rate American value by the chosen integration method;
    5. pi_A = difference of (4) and (3), plus pi_A^(2) and pi_delta_a.

    With ``refine`` the fugit is recomputed once at r* and steps 2-5 rerun.
    """
    check_slot(slot)
    method = Method(method)
    if method is Method.TWO_RATE:
        raise InputError("use quadrature.integrate_two_rates for two stochastic rates")
    rule = rule or gauss_hermite()

    base = _stage("fugit", fugit_spec, spec, model, slot, fugit_rate)
    dist: StoppingDistribution = _stage("fugit", stopping_distribution, base, cfg)
    tau = _stage("fugit", expected_fugit, dist, conditional)
    r_star = _stage("benchmark", benchmark_rate, model, tau)
    if refine:
        dist = _stage("fugit", stopping_distribution, spec.with_rate(slot, r_star), cfg)
        tau = _stage("fugit", expected_fugit, dist, conditional)
        r_star = _stage("benchmark", benchmark_rate, model, tau)

    star_spec = spec.with_rate(slot, r_star)
    o_a_star = _stage("benchmark", lambda: price_american(star_spec, cfg).price)

    if method is Method.SINGLE_FUGIT:
        res: StochasticPriceResult = _stage("integrate", integrate_single_fugit, spec, model, slot, tau, rule, cfg)
    else:
        res = _stage(
            "integrate", integrate_full_distribution, spec, model, slot, dist, rule, cfg, max_atoms=max_atoms
        )
    o_a_tilde = res.value

    o_e_tilde = _stage("european", stochastic_european, spec, model, slot, rule) if with_european else math.nan
    omega = _stage("omega", omega_heuristic, base, cfg) if with_omega else math.nan
    d = mean_deviation(model, tau) if delta is None else delta
    pda = _stage("pi_delta_a", pi_delta_a, spec, slot, d, cfg, center=r_star)

    report = OptionalityReport(
        o_a_star=o_a_star,
        o_a_tilde=o_a_tilde,
        o_e_tilde=o_e_tilde,
        pi_a=o_a_tilde - o_a_star,
        pi_a2=o_a_tilde - o_e_tilde,
        pi_delta_a=pda,
        tau_star=tau,
        omega=omega,
        r_star=r_star,
        exercise_probability=dist.exercise_probability,
        method=method.value,
        inputs={
            "spec": {**asdict(spec), "kind": spec.kind.name.lower()},
            "model": {**asdict(model), "variant": model.variant.value},
            "slot": slot,
            "steps": cfg.steps,
            "quad_order": rule.order,
            "fugit_rate": fugit_rate,
            "delta": d,
            "conditional": conditional,
            "refine": refine,
        },
    )
    return report


def pi_a(
    spec: OptionSpec,
    model: RateModel,
    slot: RateSlot = "r1",
    cfg: LatticeConfig = LatticeConfig(),
    rule: QuadratureRule | None = None,
    method: Method | str = Method.SINGLE_FUGIT,
    **kwargs,
) -> OptionalityReport:
    return analyze(spec, model, slot, cfg, rule, method, **kwargs)


def pi_a2(
    spec: OptionSpec,
    model: RateModel,
    slot: RateSlot = "r1",
    cfg: LatticeConfig = LatticeConfig(),
    rule: QuadratureRule | None = None,
    **kwargs,
) -> float:
    return analyze(spec, model, slot, cfg, rule, with_omega=False, **kwargs).pi_a2

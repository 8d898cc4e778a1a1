"""Gauss-Hermite integration of lattice prices against rate distributions.

Three estimators of the stochastic-rate American value are provided:

``integrate_single_fugit``
    one integral against the rate law at the expected exercise time;
``integrate_full_distribution``
    a mixture of such integrals over the whole stopping-time pmf;
``integrate_two_rates``
    a tensor rule over correlated (r1, r2) for each stopping-time atom.

Every sampled rate is held flat over the option's life and priced on the
deterministic-rate lattice.  Summation runs serially in node order, so the
result does not depend on how node prices were computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, QuadratureError
from .fugit import StoppingDistribution, compact
from .lattice import LatticeConfig, OptionSpec, RateSlot, check_slot, price_batch
from .rates import MarginalLaw, RateModel

DEFAULT_ORDER = 20
SQRT_PI = math.sqrt(math.pi)

# Maps arrays of (r1, r2) to American prices; the default is the batched lattice.
BatchPricer = Callable[[OptionSpec, np.ndarray, np.ndarray], np.ndarray]


class Method(str, Enum):
    SINGLE_FUGIT = "single"
    FULL_DISTRIBUTION = "full"
    TWO_RATE = "two-rate"


@dataclass(frozen=True)
class QuadratureRule:
    order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def expectation(self, values: Sequence[float]) -> float:
        """E[f(Z)] for Z ~ N(0, 1) given f evaluated at sqrt(2) * nodes."""
        total = 0.0
        for w, v in zip(self.weights, values):
            total += float(w) * float(v)
        return total / SQRT_PI


def gauss_hermite(order: int = DEFAULT_ORDER) -> QuadratureRule:
    """Physicists' Gauss-Hermite rule (weight exp(-x^2)) of the given order."""
    if int(order) != order or order < 1:
        raise QuadratureError(f"quadrature order must be a positive integer, got {order!r}")
    x, w = np.polynomial.hermite.hermgauss(int(order))
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(int(order), x, w)


@dataclass
class NodeEval:
    rate: float
    price: float
    weight: float
    rate2: float | None = None
    time: float | None = None


@dataclass
class StochasticPriceResult:
    value: float
    method: Method
    node_evaluations: int
    diagnostics: list[NodeEval] = field(default_factory=list, repr=False)

    def diagnostics_rows(self) -> list[dict]:
        return [
            {"node": i, "time": d.time, "rate": d.rate, "rate2": d.rate2, "weight": d.weight, "price": d.price}
            for i, d in enumerate(self.diagnostics)
        ]


def lattice_pricer(cfg: LatticeConfig) -> BatchPricer:
    def pricer(spec: OptionSpec, r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
        return price_batch(spec, r1, r2, cfg, "american")

    return pricer


def _price_nodes(spec: OptionSpec, slot: RateSlot, rates: np.ndarray, pricer: BatchPricer) -> np.ndarray:
    rates = np.asarray(rates, dtype=float)
    fixed = np.full(rates.shape, spec.r2 if slot == "r1" else spec.r1)
    r1, r2 = (rates, fixed) if slot == "r1" else (fixed, rates)
    try:
        return np.asarray(pricer(spec, r1, r2), dtype=float)
    except Exception as exc:
        # Locate the offending node for the message.
        for k in range(len(rates)):
            try:
                pricer(spec, r1[k : k + 1], r2[k : k + 1])
            except Exception:
                raise QuadratureError(f"lattice failed at node {k} ({slot}={rates[k]:.6g}): {exc}") from exc
        raise


def _integrate_law(
    spec: OptionSpec,
    slot: RateSlot,
    law: MarginalLaw,
    rule: QuadratureRule,
    pricer: BatchPricer,
    diagnostics: list[NodeEval],
) -> tuple[float, int]:
    if law.is_point_mass:
        price = float(_price_nodes(spec, slot, np.array([law.mean]), pricer)[0])
        diagnostics.append(NodeEval(law.mean, price, 1.0, time=law.horizon))
        return price, 1
    rates = law.rates_at(rule.nodes)
    prices = _price_nodes(spec, slot, rates, pricer)
    for r, p, w in zip(rates, prices, rule.weights):
        diagnostics.append(NodeEval(float(r), float(p), float(w) / SQRT_PI, time=law.horizon))
    return rule.expectation(prices), len(rates)


def integrate_single_fugit(
    spec: OptionSpec,
    model: RateModel,
    slot: RateSlot,
    tau_star: float,
    rule: QuadratureRule | None = None,
    cfg: LatticeConfig = LatticeConfig(),
    pricer: BatchPricer | None = None,
) -> StochasticPriceResult:
    """Average of American prices over the law of the ``slot`` rate at ``tau_star``."""
    check_slot(slot)
    rule = rule or gauss_hermite()
    pricer = pricer or lattice_pricer(cfg)
    diag: list[NodeEval] = []
    value, count = _integrate_law(spec, slot, model.marginal_at(tau_star), rule, pricer, diag)
    return StochasticPriceResult(value, Method.SINGLE_FUGIT, count, diag)


def integrate_full_distribution(
    spec: OptionSpec,
    model: RateModel,
    slot: RateSlot,
    dist: StoppingDistribution,
    rule: QuadratureRule | None = None,
    cfg: LatticeConfig = LatticeConfig(),
    pricer: BatchPricer | None = None,
    min_mass: float = 1e-6,
    max_atoms: int | None = 64,
) -> StochasticPriceResult:
    """Mixture over stopping-time atoms of single-fugit integrals.

    The no-exercise mass is folded into the maturity atom.  Contract maturity
    stays at T for every atom; only the horizon of the rate law moves.
    """
    check_slot(slot)
    rule = rule or gauss_hermite()
    pricer = pricer or lattice_pricer(cfg)
    atoms = compact(dist, min_mass=min_mass, max_atoms=max_atoms, fold_no_exercise=True)
    if not atoms:
        raise QuadratureError("stopping distribution is empty")
    diag: list[NodeEval] = []
    total, count = 0.0, 0
    for t, p in atoms:
        value, c = _integrate_law(spec, slot, model.marginal_at(t), rule, pricer, diag)
        total += p * value
        count += c
    return StochasticPriceResult(total, Method.FULL_DISTRIBUTION, count, diag)


def _correlated_pairs(rule: QuadratureRule, rho: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standard-normal pairs (z1, z2) with correlation rho and their normalised weights."""
    z = math.sqrt(2.0) * np.asarray(rule.nodes)
    w = np.asarray(rule.weights) / SQRT_PI
    if abs(rho) == 1.0:
        return z, rho * z, w
    z1 = np.repeat(z, len(z))
    z_other = np.tile(z, len(z))
    z2 = rho * z1 + math.sqrt(1.0 - rho * rho) * z_other
    return z1, z2, np.outer(w, w).ravel()


def integrate_two_rates(
    spec: OptionSpec,
    model1: RateModel,
    model2: RateModel,
    correlation: float,
    dist: StoppingDistribution | Sequence[tuple[float, float]],
    rule: QuadratureRule | None = None,
    cfg: LatticeConfig = LatticeConfig(),
    pricer: BatchPricer | None = None,
    min_mass: float = 1e-6,
    max_atoms: int | None = 16,
) -> StochasticPriceResult:
    """Both rates stochastic, joined by a Gaussian copula on their generating normals.

    ``dist`` is a stopping distribution or an explicit list of (time, mass)
    atoms.  Perfect (anti-)correlation collapses to a one-dimensional rule.
    """
    if not math.isfinite(correlation) or abs(correlation) > 1.0:
        raise InputError(f"correlation must lie in [-1, 1], got {correlation}")
    rule = rule or gauss_hermite()
    pricer = pricer or lattice_pricer(cfg)
    if isinstance(dist, StoppingDistribution):
        atoms = compact(dist, min_mass=min_mass, max_atoms=max_atoms, fold_no_exercise=True)
    else:
        atoms = [(float(t), float(p)) for t, p in dist]
    if not atoms:
        raise QuadratureError("stopping distribution is empty")
    z1, z2, w = _correlated_pairs(rule, correlation)
    diag: list[NodeEval] = []
    total, count = 0.0, 0
    for t, p in atoms:
        r1 = np.asarray(model1.marginal_at(t).from_standard(z1), dtype=float)
        r2 = np.asarray(model2.marginal_at(t).from_standard(z2), dtype=float)
        prices = np.asarray(pricer(spec, r1, r2), dtype=float)
        inner = 0.0
        for a, b, wk, v in zip(r1, r2, w, prices):
            inner += float(wk) * float(v)
            diag.append(NodeEval(float(a), float(v), float(wk), rate2=float(b), time=t))
        total += p * inner
        count += len(prices)
    return StochasticPriceResult(total, Method.TWO_RATE, count, diag)

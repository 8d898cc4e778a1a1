"""Short-rate models calibrated by matching the mean and standard deviation at a horizon.

Three dynamics are supported:

* Bachelier: ``dr = mu dt + sigma dW``
* Vasicek:   ``dr = kappa (theta - r) dt + sigma dW``
* Lognormal: ``dr / r = mu dt + sigma dW``

Each model exposes its exact marginal law at any horizon.  Gaussian laws are
parameterised by (mean, sd); lognormal laws by the (loc, scale) of the
generating normal, so quadrature always runs in a Gaussian variable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CalibrationError, InputError

DEFAULT_KAPPA = 0.5


class Variant(str, Enum):
    BACHELIER = "bachelier"
    VASICEK = "vasicek"
    LOGNORMAL = "lognormal"

    @classmethod
    def parse(cls, value: "Variant | str") -> "Variant":
        if isinstance(value, Variant):
            return value
        aliases = {"normal": "bachelier", "hull-white": "vasicek", "hull_white": "vasicek", "gbm": "lognormal"}
        key = str(value).strip().lower()
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise InputError(f"unknown rate model {value!r}") from None


class Family(str, Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"


@dataclass(frozen=True)
class MarginalLaw:
    family: Family
    loc: float
    scale: float
    horizon: float

    @property
    def is_point_mass(self) -> bool:
        return self.scale == 0.0

    @property
    def mean(self) -> float:
        if self.family is Family.NORMAL:
            return self.loc
        return math.exp(self.loc + 0.5 * self.scale**2)

    @property
    def sd(self) -> float:
        if self.family is Family.NORMAL:
            return self.scale
        return self.mean * math.sqrt(math.expm1(self.scale**2))

    def from_standard(self, z):
        """Map standard-normal draws ``z`` to rates."""
        z = np.asarray(z, dtype=float)
        g = self.loc + self.scale * z
        return g if self.family is Family.NORMAL else np.exp(g)

    def rates_at(self, hermite_nodes):
        """Rates at Gauss-Hermite nodes (weight exp(-x^2)): z = sqrt(2) x."""
        return self.from_standard(math.sqrt(2.0) * np.asarray(hermite_nodes, dtype=float))

    def pdf(self, r):
        r = np.asarray(r, dtype=float)
        if self.scale == 0.0:
            raise InputError("point-mass law has no density")
        if self.family is Family.NORMAL:
            return np.exp(-0.5 * ((r - self.loc) / self.scale) ** 2) / (self.scale * math.sqrt(2 * math.pi))
        out = np.zeros_like(r)
        pos = r > 0
        x = np.log(r[pos])
        out[pos] = np.exp(-0.5 * ((x - self.loc) / self.scale) ** 2) / (r[pos] * self.scale * math.sqrt(2 * math.pi))
        return out


@dataclass(frozen=True)
class RateModel:
    variant: Variant
    r0: float
    sigma: float
    mu: float = 0.0
    kappa: float = 0.0
    theta: float = 0.0
    horizon: float = 1.0
    # calibration targets, echoed in reports
    r_bar: float | None = None
    sigma_r: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        for name in ("r0", "sigma", "mu", "kappa", "theta", "horizon"):
            if not math.isfinite(getattr(self, name)):
                raise InputError(f"rate model {name} must be finite")
        if self.sigma < 0:
            raise InputError(f"diffusion sigma must be non-negative, got {self.sigma}")
        if self.variant is Variant.LOGNORMAL and self.r0 <= 0:
            raise InputError(f"lognormal rate model requires r0 > 0, got {self.r0}")
        if self.variant is Variant.VASICEK and self.kappa <= 0:
            raise InputError(f"Vasicek requires kappa > 0, got {self.kappa}")

    def marginal_at(self, t: float) -> MarginalLaw:
        return marginal_at(self, t)

    def mean_at(self, t: float) -> float:
        return mean_at(self, t)


def calibrate(
    variant: Variant | str,
    r0: float,
    r_bar: float,
    sigma_r: float,
    horizon: float = 1.0,
    kappa: float | None = None,
) -> RateModel:
    """Choose drift/diffusion so that r(horizon) has mean ``r_bar`` and sd ``sigma_r``."""
    variant = Variant.parse(variant)
    if not all(math.isfinite(x) for x in (r0, r_bar, sigma_r, horizon)):
        raise CalibrationError("calibration inputs must be finite")
    if sigma_r < 0:
        raise CalibrationError(f"target sd must be non-negative, got sigma_r={sigma_r}")
    if horizon <= 0:
        raise CalibrationError(f"horizon must be positive, got {horizon}")
    T = horizon

    if variant is Variant.BACHELIER:
        return RateModel(variant, r0, sigma_r / math.sqrt(T), mu=(r_bar - r0) / T, horizon=T, r_bar=r_bar, sigma_r=sigma_r)

    if variant is Variant.VASICEK:
        k = DEFAULT_KAPPA if kappa is None else kappa
        if not k > 0:
            raise CalibrationError(f"Vasicek calibration requires kappa > 0, got {k}")
        decay = math.exp(-k * T)
        theta = (r_bar - r0 * decay) / -math.expm1(-k * T)
        sigma = sigma_r * math.sqrt(2.0 * k / -math.expm1(-2.0 * k * T))
        return RateModel(variant, r0, sigma, kappa=k, theta=theta, horizon=T, r_bar=r_bar, sigma_r=sigma_r)

    if r0 <= 0:
        raise CalibrationError(f"lognormal calibration requires r0 > 0, got {r0}")
    if r_bar <= 0:
        raise CalibrationError(f"lognormal calibration requires a positive target mean, got r_bar={r_bar}")
    # Mean r0 exp(mu t); the -sigma^2/2 term sits in the exponent of the solution.
    mu = math.log(r_bar / r0) / T
    sigma = math.sqrt(math.log1p((sigma_r / r_bar) ** 2) / T)
    return RateModel(variant, r0, sigma, mu=mu, horizon=T, r_bar=r_bar, sigma_r=sigma_r)


def marginal_at(model: RateModel, t: float) -> MarginalLaw:
    """Exact law of r(t) given r(0) = r0."""
    if t < 0:
        raise InputError(f"horizon must be non-negative, got {t}")
    if t > model.horizon * (1 + 1e-12):
        warnings.warn(f"rate law evaluated at t={t} beyond calibration horizon {model.horizon}", stacklevel=2)
    v = model.variant
    if v is Variant.BACHELIER:
        return MarginalLaw(Family.NORMAL, model.r0 + model.mu * t, model.sigma * math.sqrt(t), t)
    if v is Variant.VASICEK:
        k = model.kappa
        mean = model.theta + (model.r0 - model.theta) * math.exp(-k * t)
        var = model.sigma**2 / (2 * k) * -math.expm1(-2 * k * t)
        return MarginalLaw(Family.NORMAL, mean, math.sqrt(var), t)
    s = model.sigma
    return MarginalLaw(Family.LOGNORMAL, math.log(model.r0) + (model.mu - 0.5 * s * s) * t, s * math.sqrt(t), t)


def mean_at(model: RateModel, t: float) -> float:
    v = model.variant
    if v is Variant.BACHELIER:
        return model.r0 + model.mu * t
    if v is Variant.VASICEK:
        return model.theta + (model.r0 - model.theta) * math.exp(-model.kappa * t)
    return model.r0 * math.exp(model.mu * t)


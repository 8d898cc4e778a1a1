"""Distribution of the optimal exercise time (the stochastic fugit) on the CRR lattice.

The pmf is obtained by pushing reach probabilities forward from the root
under the risk-neutral branch probabilities and absorbing them at the first
node flagged for exercise by the backward recursion.  Mass that survives to
maturity is absorbed only at in-the-money terminal nodes; what is left is
the probability of never exercising.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, NoExerciseSupportError
from .lattice import LatticeConfig, OptionSpec, RateSlot, price_american, rho

PMF_TOL = 1e-10


@dataclass(frozen=True)
class StoppingDistribution:
    times: np.ndarray
    masses: np.ndarray
    no_exercise_mass: float
    maturity: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if times.shape != masses.shape or times.ndim != 1:
            raise InputError("times and masses must be 1-D arrays of equal length")
        if np.any(masses < 0) or self.no_exercise_mass < -PMF_TOL:
            raise InputError("stopping masses must be non-negative")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise InputError("stopping times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "masses", masses)

    @property
    def exercise_probability(self) -> float:
        return float(self.masses.sum())

    @property
    def total_mass(self) -> float:
        return self.exercise_probability + self.no_exercise_mass

    @classmethod
    def point_mass(cls, t: float, maturity: float | None = None) -> "StoppingDistribution":
        return cls(np.array([t]), np.array([1.0]), 0.0, t if maturity is None else maturity)


@dataclass(frozen=True)
class FugitSummary:
    tau_star: float
    omega: float
    exercise_probability: float

    @property
    def tau_star_months(self) -> float:
        return 12.0 * self.tau_star

    @property
    def omega_months(self) -> float:
        return 12.0 * self.omega


def propagate(exercise: Sequence[np.ndarray], terminal_itm: np.ndarray, q: float) -> tuple[np.ndarray, float]:
    """Forward reach-probability recursion over a precomputed exercise grid.

    Returns (P_f, no-exercise mass) with P_f indexed by time step 0..n.
    """
    n = len(exercise)
    pf = np.zeros(n + 1)
    reach = np.array([1.0])
    for i in range(n):
        stop = exercise[i]
        pf[i] = reach[stop].sum()
        live = np.where(stop, 0.0, reach)
        nxt = np.zeros(i + 2)
        nxt[1:] += q * live
        nxt[:-1] += (1.0 - q) * live
        reach = nxt
    pf[n] = reach[terminal_itm].sum()
    return pf, float(reach[~terminal_itm].sum())


def stopping_distribution(spec: OptionSpec, cfg: LatticeConfig = LatticeConfig()) -> StoppingDistribution:
    lat = price_american(spec, cfg, keep_grid=True)
    pf, rest = propagate(lat.exercise, lat.terminal_itm, lat.q)
    times = np.arange(cfg.steps + 1) * lat.dt
    return StoppingDistribution(times, pf, rest, spec.maturity)


def expected_fugit(dist: StoppingDistribution, conditional: bool = True) -> float:
    """Expected exercise time in years.

    The default conditions on exercise.  ``conditional=False`` instead gives
    the unconditional mean with never-exercised paths counted at maturity.
    """
    if conditional:
        mass = dist.exercise_probability
        if mass <= 0.0:
            raise NoExerciseSupportError("no exercise support: the option is never exercised on this lattice")
        return float(np.dot(dist.times, dist.masses) / mass)
    total = dist.total_mass
    if total <= 0.0:
        raise NoExerciseSupportError("stopping distribution carries no mass")
    return float((np.dot(dist.times, dist.masses) + dist.maturity * dist.no_exercise_mass) / total)


def omega_heuristic(spec: OptionSpec, cfg: LatticeConfig = LatticeConfig(), slot: RateSlot = "r2") -> float:
    """Effective duration T * rho_A / rho_E, clamped to [0, T]."""
    rho_a = rho(spec, cfg, "american", slot)
    rho_e = rho(spec, cfg, "european", slot)
    if rho_e == 0.0:
        raise NoExerciseSupportError("European rho is zero; omega ratio undefined")
    omega = spec.maturity * rho_a / rho_e
    if omega > spec.maturity:
        warnings.warn(f"omega {omega:.6g} exceeds maturity; clamped", stacklevel=2)
        omega = spec.maturity
    return max(omega, 0.0)


def summarize(spec: OptionSpec, cfg: LatticeConfig = LatticeConfig(), conditional: bool = True) -> FugitSummary:
    dist = stopping_distribution(spec, cfg)
    return FugitSummary(expected_fugit(dist, conditional), omega_heuristic(spec, cfg), dist.exercise_probability)


def compact(
    dist: StoppingDistribution | Sequence[tuple[float, float]],
    min_mass: float = 1e-6,
    max_atoms: int | None = None,
    fold_no_exercise: bool = True,
) -> list[tuple[float, float]]:
    """Reduce a pmf to a short list of (time, mass) atoms.

    Atoms lighter than ``min_mass`` are merged into the nearest retained atom.
    If more than ``max_atoms`` remain, atoms are pooled into equal-width time
    buckets placed at their mass-weighted mean time, which preserves both the
    total mass and the mean.
    """
    if isinstance(dist, StoppingDistribution):
        times = list(dist.times)
        masses = list(dist.masses)
        if fold_no_exercise and dist.no_exercise_mass > 0:
            if times and math.isclose(times[-1], dist.maturity, rel_tol=1e-12, abs_tol=1e-15):
                masses[-1] += dist.no_exercise_mass
            else:
                times.append(dist.maturity)
                masses.append(dist.no_exercise_mass)
        horizon = dist.maturity
    else:
        pairs = [(float(t), float(p)) for t, p in dist]
        times = [t for t, _ in pairs]
        masses = [p for _, p in pairs]
        horizon = max(times) if times else 0.0

    atoms = [(t, p) for t, p in zip(times, masses) if p > 0.0]
    if not atoms:
        return []
    keep = [a for a in atoms if a[1] >= min_mass] or [max(atoms, key=lambda a: a[1])]
    kept_t = np.array([t for t, _ in keep])
    kept_p = np.array([p for _, p in keep])
    for t, p in atoms:
        if p < min_mass and not (len(keep) == 1 and t == keep[0][0]):
            kept_p[int(np.argmin(np.abs(kept_t - t)))] += p
    out = list(zip(kept_t.tolist(), kept_p.tolist()))

    if max_atoms is not None and len(out) > max_atoms:
        if max_atoms < 1:
            raise InputError("max_atoms must be positive")
        width = horizon / max_atoms if horizon > 0 else 1.0
        buckets: dict[int, list[float]] = {}
        for t, p in out:
            b = min(int(t / width), max_atoms - 1)
            acc = buckets.setdefault(b, [0.0, 0.0])
            acc[0] += t * p
            acc[1] += p
        out = [(acc[0] / acc[1], acc[1]) for _, acc in sorted(buckets.items())]
    return out

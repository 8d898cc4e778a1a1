"""Slow, independent reference implementations used only by the tests.

Each oracle shares no code path with the library routine it checks.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def scalar_crr(spot, strike, maturity, vol, r1, r2, phi, n, american=True):
    """Plain nested-loop CRR lattice; returns (price, exercise indicator per step, q)."""
    dt = maturity / n
    u = math.exp(vol * math.sqrt(dt))
    d = 1.0 / u
    q = (math.exp((r1 - r2) * dt) - d) / (u - d)
    disc = math.exp(-r1 * dt)
    values = [max(phi * (spot * u**j * d ** (n - j) - strike), 0.0) for j in range(n + 1)]
    exercise = [None] * n
    for i in range(n - 1, -1, -1):
        row, flags = [], []
        for j in range(i + 1):
            cont = disc * (q * values[j + 1] + (1 - q) * values[j])
            intrinsic = max(phi * (spot * u**j * d ** (i - j) - strike), 0.0)
            if american:
                flags.append(intrinsic > 0.0 and intrinsic >= cont)
                row.append(max(cont, intrinsic))
            else:
                flags.append(False)
                row.append(cont)
        values = row
        exercise[i] = flags
    return values[0], exercise, q


def enumerate_stopping_pmf(spot, strike, maturity, vol, r1, r2, phi, n):
    """Walk every one of the 2^n paths and record its first exercise step.

    Paths that reach maturity stop there if the payoff is positive; the
    remainder is returned as the no-exercise mass.
    """
    _, exercise, q = scalar_crr(spot, strike, maturity, vol, r1, r2, phi, n)
    dt = maturity / n
    u = math.exp(vol * math.sqrt(dt))
    pmf = [0.0] * (n + 1)
    none = 0.0
    for path in itertools.product((0, 1), repeat=n):
        prob = 1.0
        for step in path:
            prob *= q if step else 1.0 - q
        j = 0
        stopped = False
        for i in range(n):
            if exercise[i][j]:
                pmf[i] += prob
                stopped = True
                break
            j += path[i]
        if not stopped:
            s_t = spot * u ** (2 * j - n)
            if phi * (s_t - strike) > 0.0:
                pmf[n] += prob
            else:
                none += prob
    return np.array(pmf), none


def trapezoid_expectation(f, pdf, lo, hi, points=4001):
    """Composite trapezoid rule for E[f(r)] over [lo, hi]."""
    x = np.linspace(lo, hi, points)
    y = np.array([f(float(v)) for v in x]) * pdf(x)
    return float(np.sum((y[1:] + y[:-1]) * np.diff(x)) / 2.0)


def euler_paths(model, horizon, steps=200, paths=40000, seed=7):
    """Euler-Maruyama simulation of the short rate to ``horizon``; returns r(horizon)."""
    rng = np.random.default_rng(seed)
    dt = horizon / steps
    r = np.full(paths, model.r0, dtype=float)
    variant = model.variant.value
    for _ in range(steps):
        dw = rng.standard_normal(paths) * math.sqrt(dt)
        if variant == "bachelier":
            r = r + model.mu * dt + model.sigma * dw
        elif variant == "vasicek":
            r = r + model.kappa * (model.theta - r) * dt + model.sigma * dw
        else:
            r = r * (1.0 + model.mu * dt + model.sigma * dw)
    return r

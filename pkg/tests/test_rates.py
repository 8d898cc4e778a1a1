import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fugitlab import CalibrationError, Variant, calibrate
from fugitlab.errors import InputError
from fugitlab.rates import RateModel

from .oracles import euler_paths


def test_bachelier_moment_matching_example():
    m = calibrate("bachelier", 0.01, 0.0418, 0.0128, 1.0)
    assert m.mu == pytest.approx(0.0318, abs=1e-15)
    assert m.sigma == pytest.approx(0.0128, abs=1e-15)


@settings(max_examples=80, deadline=None)
@given(
    st.sampled_from(list(Variant)),
    st.floats(0.001, 0.08),
    st.floats(0.005, 0.10),
    st.floats(0.0, 0.05),
    st.floats(0.25, 3.0),
    st.floats(0.05, 2.0),
)
def test_calibration_round_trip(variant, r0, r_bar, sigma_r, horizon, kappa):
    m = calibrate(variant, r0, r_bar, sigma_r, horizon, kappa)
    law = m.marginal_at(horizon)
    assert abs(law.mean - r_bar) <= 1e-10
    assert abs(law.sd - sigma_r) <= 1e-10
    assert abs(m.mean_at(horizon) - r_bar) <= 1e-10


@pytest.mark.parametrize("variant", list(Variant))
def test_marginal_agrees_with_euler_simulation(variant):
    m = calibrate(variant, 0.01, 0.0418, 0.0128, 1.0)
    for t in (0.5, 1.0):
        r = euler_paths(m, t, steps=2000, paths=20000)
        law = m.marginal_at(t)
        se_mean = r.std() / math.sqrt(len(r))
        assert abs(r.mean() - law.mean) < 3 * se_mean + 1e-5
        se_sd = r.std() / math.sqrt(2 * len(r))
        assert abs(r.std() - law.sd) < 3 * se_sd + 5e-5


@pytest.mark.parametrize("variant", list(Variant))
def test_variance_grows_with_time(variant):
    m = calibrate(variant, 0.01, 0.0418, 0.0128, 1.0)
    sds = [m.marginal_at(t).sd for t in (0.0, 0.25, 0.5, 0.75, 1.0)]
    assert sds[0] == 0.0
    assert all(b > a for a, b in zip(sds, sds[1:]))


@pytest.mark.parametrize("variant", list(Variant))
def test_zero_sd_is_point_mass(variant):
    m = calibrate(variant, 0.01, 0.0418, 0.0, 1.0)
    law = m.marginal_at(0.7)
    assert law.is_point_mass
    assert law.mean == pytest.approx(m.mean_at(0.7), abs=1e-15)


def test_vasicek_kappa_controls_mean_path():
    slow = calibrate("vasicek", 0.01, 0.0418, 0.0128, 1.0, kappa=0.05)
    fast = calibrate("vasicek", 0.01, 0.0418, 0.0128, 1.0, kappa=2.0)
    # Faster reversion front-loads the move toward the target.
    assert fast.mean_at(0.5) > slow.mean_at(0.5)


def test_aliases_and_errors():
    assert Variant.parse("normal") is Variant.BACHELIER
    assert Variant.parse("Hull-White") is Variant.VASICEK
    assert Variant.parse("gbm") is Variant.LOGNORMAL
    with pytest.raises(InputError):
        Variant.parse("cir")
    with pytest.raises(CalibrationError):
        calibrate("lognormal", -0.01, 0.04, 0.01)
    with pytest.raises(CalibrationError):
        calibrate("bachelier", 0.01, 0.04, -0.01)
    with pytest.raises(CalibrationError):
        calibrate("vasicek", 0.01, 0.04, 0.01, kappa=0.0)
    with pytest.raises(InputError):
        RateModel("bachelier", 0.01, -1.0)


def test_lognormal_density_integrates_to_one():
    law = calibrate("lognormal", 0.01, 0.0418, 0.0128).marginal_at(1.0)
    x = np.linspace(1e-6, 0.3, 200001)
    y = law.pdf(x)
    assert float(np.sum((y[1:] + y[:-1]) * np.diff(x)) / 2) == pytest.approx(1.0, abs=1e-6)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fugitlab import LatticeConfig, LatticeError, OptionSpec, price_american, price_batch, price_european_lattice, rho
from fugitlab.errors import InputError
from fugitlab.european import price_european_closed
from fugitlab.lattice import Kind

from .oracles import scalar_crr

EQUITY_PUT = OptionSpec(100.0, 100.0, 1.0, 0.40, 0.0418, 0.0, Kind.PUT)


def test_matches_nested_loop_oracle():
    for spec in (EQUITY_PUT, OptionSpec(90.0, 100.0, 0.5, 0.25, 0.03, 0.10, Kind.CALL)):
        ours = price_american(spec, LatticeConfig(60)).price
        ref, _, _ = scalar_crr(spec.spot, spec.strike, spec.maturity, spec.volatility, spec.r1, spec.r2, spec.phi, 60)
        assert ours == pytest.approx(ref, abs=1e-12)


def test_european_lattice_converges_to_closed_form():
    closed = price_european_closed(EQUITY_PUT).value
    assert abs(price_european_lattice(EQUITY_PUT, LatticeConfig(2000)) - closed) < 0.005


def test_american_converges_in_steps():
    prices = [price_american(EQUITY_PUT, LatticeConfig(n)).price for n in (500, 1000, 2000)]
    assert abs(prices[0] - prices[2]) < 0.01
    assert abs(prices[1] - prices[2]) < 0.01


def test_zero_volatility_deep_itm_put_is_intrinsic():
    spec = OptionSpec(50.0, 100.0, 1.0, 0.0, 0.05, 0.0, Kind.PUT)
    assert price_american(spec, LatticeConfig(200)).price == pytest.approx(50.0, abs=1e-12)


def test_zero_volatility_call_on_forward():
    spec = OptionSpec(140.0, 100.0, 1.0, 0.0, 0.10, 0.10, Kind.CALL)
    assert price_american(spec, LatticeConfig(500)).price == pytest.approx(40.0, abs=1e-12)
    assert price_european_closed(spec).value == pytest.approx(40.0 * math.exp(-0.10), abs=1e-12)


def test_q_outside_unit_interval_raises():
    spec = OptionSpec(100.0, 100.0, 1.0, 0.001, 0.50, 0.0, Kind.PUT)
    with pytest.raises(LatticeError, match="increase volatility or steps"):
        price_american(spec, LatticeConfig(10))


def test_invalid_inputs():
    with pytest.raises(InputError):
        OptionSpec(-1.0, 100.0, 1.0, 0.2, 0.0, 0.0)
    with pytest.raises(InputError):
        OptionSpec(100.0, 100.0, 0.0, 0.2, 0.0, 0.0)
    with pytest.raises(InputError):
        OptionSpec(100.0, 100.0, 1.0, float("nan"), 0.0, 0.0)
    with pytest.raises(InputError):
        LatticeConfig(0)


def test_batch_is_bit_identical_to_scalar():
    r1 = np.array([0.0, 0.02, 0.0418, 0.08])
    r2 = np.array([0.0, 0.028, 0.0, 0.10])
    batch = price_batch(EQUITY_PUT, r1, r2, LatticeConfig(300))
    for k in range(len(r1)):
        scalar = price_american(OptionSpec(100.0, 100.0, 1.0, 0.40, r1[k], r2[k], Kind.PUT), LatticeConfig(300)).price
        assert batch[k] == scalar


def test_rho_is_mean_absolute_move():
    cfg = LatticeConfig(400)
    up = price_american(EQUITY_PUT.with_rate("r2", 0.01), cfg).price
    down = price_american(EQUITY_PUT.with_rate("r2", -0.01), cfg).price
    base = price_american(EQUITY_PUT, cfg).price
    assert rho(EQUITY_PUT, cfg) == pytest.approx((abs(up - base) + abs(down - base)) / 2, abs=1e-12)


specs = st.builds(
    OptionSpec,
    spot=st.floats(60.0, 160.0),
    strike=st.floats(60.0, 160.0),
    maturity=st.floats(0.1, 2.0),
    volatility=st.floats(0.15, 0.6),
    r1=st.floats(-0.01, 0.10),
    r2=st.floats(0.0, 0.10),
    kind=st.sampled_from([Kind.CALL, Kind.PUT]),
)


@settings(max_examples=40, deadline=None)
@given(specs)
def test_american_dominates_european_and_intrinsic(spec):
    cfg = LatticeConfig(150)
    am = price_american(spec, cfg).price
    assert am >= price_european_lattice(spec, cfg) - 1e-12
    assert am >= spec.intrinsic() - 1e-12


@settings(max_examples=30, deadline=None)
@given(specs)
def test_european_put_call_parity(spec):
    call = price_european_closed(OptionSpec(spec.spot, spec.strike, spec.maturity, spec.volatility, spec.r1, spec.r2, Kind.CALL)).value
    put = price_european_closed(OptionSpec(spec.spot, spec.strike, spec.maturity, spec.volatility, spec.r1, spec.r2, Kind.PUT)).value
    fwd = spec.spot * math.exp(-spec.r2 * spec.maturity) - spec.strike * math.exp(-spec.r1 * spec.maturity)
    assert call - put == pytest.approx(fwd, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(specs, st.floats(1.01, 1.3))
def test_monotone_in_spot(spec, factor):
    cfg = LatticeConfig(120)
    bumped = OptionSpec(spec.spot * factor, spec.strike, spec.maturity, spec.volatility, spec.r1, spec.r2, spec.kind)
    a, b = price_american(spec, cfg).price, price_american(bumped, cfg).price
    assert (b - a) * spec.phi >= -1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 0.05), st.floats(-0.5, 0.5), st.integers(1, 50))
def test_q_valid_or_lattice_error(vol, carry, n):
    spec = OptionSpec(100.0, 100.0, 1.0, vol, carry, 0.0, Kind.PUT)
    try:
        res = price_american(spec, LatticeConfig(n))
    except LatticeError:
        dt = 1.0 / n
        assert vol * math.sqrt(dt) < abs(carry) * dt * 1.0001 + 1e-15
        return
    assert 0.0 <= res.q <= 1.0

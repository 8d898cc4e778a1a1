import math

import pytest

from fugitlab import OptionSpec, calibrate, gauss_hermite, price_european_closed, stochastic_european
from fugitlab.european import norm_cdf
from fugitlab.lattice import Kind


def test_textbook_value():
    # S=K=100, sigma=20%, r=5%, no carry, T=1: the standard 10.4506 call.
    call = price_european_closed(OptionSpec(100.0, 100.0, 1.0, 0.20, 0.05, 0.0, Kind.CALL))
    assert call.value == pytest.approx(10.450583572185565, abs=1e-10)


def test_norm_cdf_tail():
    assert norm_cdf(-30.0) > 0.0
    assert norm_cdf(0.0) == 0.5


def test_zero_volatility_is_discounted_forward_intrinsic():
    spec = OptionSpec(140.0, 100.0, 1.0, 0.0, 0.0, 0.20, Kind.CALL)
    assert price_european_closed(spec).value == pytest.approx(140.0 * math.exp(-0.20) - 100.0, abs=1e-12)


def test_garman_kohlhagen_symmetry():
    # A call on foreign currency equals a put in the other numeraire.
    s, k = 1.2, 1.1
    call = price_european_closed(OptionSpec(s, k, 0.75, 0.15, 0.03, 0.01, Kind.CALL)).value
    put = price_european_closed(OptionSpec(1 / s, 1 / k, 0.75, 0.15, 0.01, 0.03, Kind.PUT)).value
    assert call == pytest.approx(s * k * put, rel=1e-12)


def test_stochastic_european_point_mass():
    spec = OptionSpec(100.0, 100.0, 1.0, 0.40, 0.0, 0.0, Kind.PUT)
    model = calibrate("bachelier", 0.01, 0.0418, 0.0)
    assert stochastic_european(spec, model, "r1", gauss_hermite(20)) == price_european_closed(spec.with_rate("r1", 0.0418)).value


def test_stochastic_european_is_convex_in_rate():
    spec = OptionSpec(100.0, 100.0, 1.0, 0.40, 0.0, 0.0, Kind.PUT)
    flat = price_european_closed(spec.with_rate("r1", 0.0418)).value
    model = calibrate("bachelier", 0.01, 0.0418, 0.03)
    assert stochastic_european(spec, model, "r1", gauss_hermite(20)) > flat

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fugitlab import LatticeConfig, OptionSpec, StageError, analyze, calibrate, gauss_hermite, pi_delta_a
from fugitlab.errors import InputError
from fugitlab.lattice import Kind
from fugitlab.optionality import benchmark_rate, fugit_spec, mean_deviation

CFG = LatticeConfig(400)
PUT = OptionSpec(100.0, 100.0, 1.0, 0.40, 0.0418, 0.0, Kind.PUT)


@pytest.mark.parametrize("variant", ["bachelier", "lognormal", "vasicek"])
def test_zero_rate_uncertainty_gives_zero_optionality(variant):
    rep = analyze(PUT, calibrate(variant, 0.01, 0.0418, 0.0), "r1", CFG, with_omega=False)
    assert abs(rep.pi_a) <= 1e-10
    assert rep.pi_delta_a == 0.0


def test_pi_a_is_difference_of_its_legs():
    rep = analyze(PUT, calibrate("bachelier", 0.01, 0.0418, 0.0128), "r1", CFG, with_omega=False)
    rep.check()
    assert rep.pi_a2 == rep.o_a_tilde - rep.o_e_tilde
    assert rep.r_star == pytest.approx(0.01 + 0.0318 * rep.tau_star, abs=1e-15)


@settings(max_examples=15, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(0.0, 5.0), st.floats(0.0, 0.05), st.floats(-0.05, 0.1))
def test_pi_delta_a_on_a_quadratic_is_exact(a, b, c, delta, center):
    f = lambda r: a + b * r + c * r * r
    assert pi_delta_a(PUT, "r1", delta, center=center, price_fn=f) == pytest.approx(c * delta * delta, abs=1e-12)


def test_pi_delta_a_rejects_negative_delta():
    with pytest.raises(InputError):
        pi_delta_a(PUT, "r1", -0.01)


def test_benchmark_is_model_mean_at_fugit():
    for v in ("bachelier", "lognormal", "vasicek"):
        m = calibrate(v, 0.01, 0.0418, 0.02)
        assert benchmark_rate(m, 0.6) == pytest.approx(m.mean_at(0.6), abs=1e-15)
        assert mean_deviation(m, 0.6) == pytest.approx(m.marginal_at(0.6).sd * math.sqrt(2 / math.pi), abs=1e-15)


def test_fugit_spec_rate_choice():
    m = calibrate("bachelier", 0.01, 0.0418, 0.0128)
    assert fugit_spec(PUT, m, "r1", "r_bar").r1 == 0.0418
    assert fugit_spec(PUT, m, "r1", "r0").r1 == 0.01
    assert fugit_spec(PUT, m, "r1", "spec") is PUT
    with pytest.raises(InputError):
        fugit_spec(PUT, m, "r1", "median")


def test_put_optionality_grows_with_rate_uncertainty():
    values = [analyze(PUT, calibrate("bachelier", 0.01, 0.0418, s), "r1", CFG, with_omega=False).pi_a for s in (0.0, 0.01, 0.02, 0.03)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_call_without_carry_has_no_hidden_optionality_against_european():
    call = OptionSpec(100.0, 100.0, 1.0, 0.40, 0.0418, 0.0, Kind.CALL)
    rep = analyze(call, calibrate("bachelier", 0.01, 0.0418, 0.0128), "r1", LatticeConfig(2000), with_omega=False)
    assert abs(rep.pi_a2) < 0.01


def test_full_distribution_with_point_mass_equals_single_fugit():
    from fugitlab import integrate_full_distribution, integrate_single_fugit
    from fugitlab.fugit import StoppingDistribution

    m = calibrate("bachelier", 0.01, 0.0418, 0.0128)
    rule = gauss_hermite(20)
    single = integrate_single_fugit(PUT, m, "r1", 0.7, rule, CFG).value
    full = integrate_full_distribution(PUT, m, "r1", StoppingDistribution.point_mass(0.7, 1.0), rule, CFG).value
    assert full == single


def test_full_distribution_weights_late_rates_more():
    # Never-exercised paths sit at maturity, where the mean rate is highest,
    # so for a put the mixture lies below the single-fugit value.
    m = calibrate("bachelier", 0.01, 0.0418, 0.0128)
    single = analyze(PUT, m, "r1", CFG, method="single", with_omega=False)
    full = analyze(PUT, m, "r1", CFG, method="full", with_omega=False, max_atoms=24)
    assert full.o_a_tilde < single.o_a_tilde


def test_stage_is_named_in_errors():
    never = OptionSpec(10.0, 100.0, 0.5, 0.10, 0.02, 0.0, Kind.CALL)
    with pytest.raises(StageError, match=r"^\[fugit\]"):
        analyze(never, calibrate("bachelier", 0.01, 0.0418, 0.01), "r1", CFG)


def test_two_rate_method_is_rejected_here():
    with pytest.raises(InputError):
        analyze(PUT, calibrate("bachelier", 0.01, 0.0418, 0.01), "r1", CFG, method="two-rate")

import math

import pytest
from hypothesis import given, strategies as st

from psas.errors import ConfigurationError, InputValidationError, UndefinedRegionError
from psas.field import (ENVELOPE_KINDS, FieldConfig, TwoPulseTrain, eval_field,
                        nonadiabatic_derivative)


def test_constant_field_sample():
    s = eval_field(FieldConfig(carrier=5.0, peak_rabi=1.0), 2.0)
    assert (s.rabi, s.d_rabi, s.log_d_rabi, s.phase, s.d_phase) == (1.0, 0.0, 0.0, 0.0, 0.0)
    assert s.total_phase == 10.0


def test_gaussian_peak_is_stationary():
    s = eval_field(FieldConfig(envelope_kind="gaussian", peak_rabi=1.0, center=0.0, width=1.0), 0.0)
    assert s.rabi == 1.0
    assert s.d_rabi == 0.0
    assert s.log_d_rabi == 0.0


def test_gaussian_value_and_log_derivative():
    # 2 exp(-1/4) evaluated with mpmath at 40 digits
    s = eval_field(FieldConfig(envelope_kind="gaussian", peak_rabi=2.0, center=0.0, width=2.0), 1.0)
    assert s.rabi == pytest.approx(1.5576015661428097365, rel=1e-15)
    assert s.log_d_rabi == pytest.approx(-0.5, rel=1e-15)


@pytest.mark.parametrize("kind, expected", [
    ("sech", -0.23105857863000487925),
    ("smooth-ramp", 0.26894142136999512075),
])
def test_log_derivative_closed_forms(kind, expected):
    # values from mpmath: -tanh(x)/tau and 2/(1+e^{2x})/tau at x = 0.5, tau = 2
    s = eval_field(FieldConfig(envelope_kind=kind, peak_rabi=1.0, center=0.0, width=2.0), 1.0)
    assert s.log_d_rabi == pytest.approx(expected, rel=1e-14)


def test_log_derivative_flagged_below_floor():
    cfg = FieldConfig(envelope_kind="gaussian", peak_rabi=1.0, width=1.0, floor=1e-9)
    s = eval_field(cfg, 10.0)
    assert s.log_d_rabi is None
    assert s.rabi < 1e-9


def test_unsupported_kinds_rejected():
    with pytest.raises(ConfigurationError):
        FieldConfig(envelope_kind="lorentzian")
    with pytest.raises(ConfigurationError):
        FieldConfig(phase_kind="cubic")


@pytest.mark.parametrize("kwargs", [{"peak_rabi": -1.0}, {"width": 0.0}, {"floor": 0.0},
                                    {"floor": 1.0}, {"carrier": math.nan}])
def test_invalid_parameters_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        FieldConfig(**kwargs)


def test_non_finite_time_rejected():
    with pytest.raises(InputValidationError):
        eval_field(FieldConfig(), math.inf)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_constant_field_has_no_nonadiabatic_terms(n):
    assert nonadiabatic_derivative(FieldConfig(), n, 1.7).value == 0


def test_linear_chirp_first_derivative():
    cfg = FieldConfig(phase_kind="linear-chirp", chirp=0.3)
    d = nonadiabatic_derivative(cfg, 0, 4.0).value
    assert d.real == pytest.approx(1.2, rel=1e-15)
    assert d.imag == 0.0


def test_gaussian_nonadiabatic_order_zero():
    cfg = FieldConfig(envelope_kind="gaussian", width=1.0)
    d = nonadiabatic_derivative(cfg, 0, 0.5).value
    assert d.real == 0.0
    assert d.imag == pytest.approx(1.0, rel=1e-15)


def test_order_two_matches_closed_form():
    # d^2/dt^2 of (dphi/dt - i L) for a sech pulse: -i d^2 L/dt^2, L = -tanh(x)/tau
    tau, x = 1.5, 0.4
    cfg = FieldConfig(envelope_kind="sech", width=tau)
    d = nonadiabatic_derivative(cfg, 2, x * tau)
    sech2 = 1.0 / math.cosh(x) ** 2
    exact = -1j * (2.0 * math.tanh(x) * sech2 / tau**3)
    assert abs(d.value - exact) < 1e-8
    assert d.error < 1e-6


def test_order_above_limit_rejected():
    with pytest.raises(ConfigurationError):
        nonadiabatic_derivative(FieldConfig(n_max=3), 4, 0.0)


def test_stencil_below_floor_raises_with_interval():
    cfg = FieldConfig(envelope_kind="gaussian", width=1.0)
    with pytest.raises(UndefinedRegionError) as info:
        nonadiabatic_derivative(cfg, 3, 6.0)
    lo, hi = info.value.interval
    assert lo < 6.0 < hi


def test_two_pulse_train_peak_and_area():
    tr = TwoPulseTrain(width=0.05, area=0.1)
    assert tr.peak_rabi * math.sqrt(math.pi) * tr.width == pytest.approx(0.1, rel=1e-15)
    assert tr.spectral_area(0.0) == 0.1


@given(kind=st.sampled_from(ENVELOPE_KINDS),
       x=st.floats(-3, 3), width=st.floats(0.2, 5), peak=st.floats(0.1, 10))
def test_log_derivative_times_rabi_is_d_rabi(kind, x, width, peak):
    s = eval_field(FieldConfig(envelope_kind=kind, peak_rabi=peak, width=width), x * width)
    assert s.log_d_rabi * s.rabi == pytest.approx(s.d_rabi, rel=1e-12, abs=1e-300)


@given(carrier=st.floats(-50, 50), t=st.floats(-20, 20), phase=st.floats(-5, 5),
       chirp=st.floats(-2, 2))
def test_total_phase_decomposition(carrier, t, phase, chirp):
    s = eval_field(FieldConfig(carrier=carrier, phase_kind="linear-chirp", phase_offset=phase,
                               chirp=chirp), t)
    assert s.total_phase - carrier * t - s.phase == pytest.approx(0.0, abs=4e-15 * (1 + abs(s.total_phase)))


@given(kind=st.sampled_from(ENVELOPE_KINDS), x=st.floats(-2, 2),
       phase_kind=st.sampled_from(["constant", "linear-chirp", "sinusoidal"]))
def test_order_zero_is_phase_rate_minus_i_log_derivative(kind, x, phase_kind):
    cfg = FieldConfig(envelope_kind=kind, width=1.3, phase_kind=phase_kind, chirp=0.2,
                      mod_depth=0.4, mod_rate=1.1)
    s = eval_field(cfg, x)
    assert nonadiabatic_derivative(cfg, 0, x).value == complex(s.d_phase, -s.log_d_rabi)


@pytest.mark.parametrize("kind", ["gaussian", "sech", "smooth-ramp"])
def test_numerical_rabi_derivative_converges_at_second_order(kind):
    cfg = FieldConfig(envelope_kind=kind, width=1.0)
    t = 0.37
    exact = eval_field(cfg, t).d_rabi

    def err(h):
        return abs((eval_field(cfg, t + h).rabi - eval_field(cfg, t - h).rabi) / (2 * h) - exact)

    e1, e2, e3 = err(1e-3), err(5e-4), err(2.5e-4)
    assert e2 / e1 == pytest.approx(0.25, rel=0.2)
    assert e3 / e2 == pytest.approx(0.25, rel=0.2)

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psas.adiabaticity import adiabaticity_report
from psas.errors import ConfigurationError
from psas.field import FieldConfig
from psas.system import SystemConfig

GAUSS = FieldConfig(envelope_kind="gaussian", peak_rabi=1.0, center=0.0, width=10.0)


@pytest.mark.parametrize("gamma", [(0.0, 0.0), (0.3, 0.1)])
def test_constant_field_is_perfectly_adiabatic(gamma):
    s = SystemConfig(omega_e=2.0, gamma_re=gamma[0], gamma_im=gamma[1])
    rep = adiabaticity_report(s, FieldConfig(peak_rabi=1.0), np.linspace(0, 5, 11))
    finite = rep.ratios[~np.isnan(rep.ratios)]
    assert np.all(finite == 0.0)
    assert rep.passed
    assert adiabaticity_report(s, FieldConfig(peak_rabi=1.0), [0.0], threshold=1e-300).passed


def test_gaussian_leading_ratio():
    # |-2 t / tau^2| / dw = (2 * 5 / 100) / 5
    rep = adiabaticity_report(SystemConfig(omega_e=5.0), GAUSS, [5.0])
    assert rep.ratio(0, 0)[0] == pytest.approx(0.02, rel=1e-14)


def test_far_wing_marked_violated():
    rep = adiabaticity_report(SystemConfig(omega_e=5.0), GAUSS, [0.0, 60.0])
    for n in range(rep.n_max + 1):
        for k in range(1, n + 2):
            assert rep.ratio(n, k)[1] == math.inf
    assert math.isfinite(rep.ratio(0, 0)[1])
    assert not rep.passed
    assert rep.worst[2] == 60.0


def test_pass_flag_matches_threshold():
    rep = adiabaticity_report(SystemConfig(omega_e=5.0), GAUSS, np.linspace(-10, 10, 41))
    assert rep.passed == (rep.max_ratio < rep.threshold)
    assert np.all(rep.ratios[~np.isnan(rep.ratios)] >= 0)


def test_table_shape_and_padding():
    rep = adiabaticity_report(SystemConfig(omega_e=5.0), GAUSS, np.linspace(-5, 5, 7), n_max=2)
    assert rep.ratios.shape == (3, 4, 7)
    assert np.all(np.isnan(rep.ratios[0, 2:])) and np.all(np.isnan(rep.ratios[1, 3:]))


def test_order_limit_enforced():
    with pytest.raises(ConfigurationError):
        adiabaticity_report(SystemConfig(), FieldConfig(n_max=2), [0.0], n_max=3)


def test_damping_enters_detuning_scale_with_half_rate():
    s = SystemConfig(omega_e=5.0, gamma_re=2.0, gamma_im=0.0)
    rep = adiabaticity_report(s, GAUSS, [5.0])
    assert rep.ratio(0, 0)[0] == pytest.approx(0.1 / abs(5.0 - 1.0j), rel=1e-14)


def test_classical_condition_recovered_without_damping():
    dw, t = 5.0, 3.0
    rep = adiabaticity_report(SystemConfig(omega_e=dw), GAUSS, [t])
    log_d = -2.0 * t / GAUSS.width**2
    assert rep.ratio(0, 0)[0] == pytest.approx(abs(log_d / dw), rel=1e-14)


@given(t=st.floats(-15, 15), dw=st.floats(0.5, 20), g_re=st.floats(0, 3), g_im=st.floats(-2, 2))
def test_adjacent_splits_differ_by_detuning_over_rabi(t, dw, g_re, g_im):
    s = SystemConfig(omega_e=dw, gamma_re=g_re, gamma_im=g_im)
    rep = adiabaticity_report(s, GAUSS, [t])
    scale = abs(dw - 0.5j * s.gamma_e)
    rabi = math.exp(-(t / GAUSS.width) ** 2)
    for n in range(rep.n_max + 1):
        for k in range(n + 1):
            a, b = rep.ratio(n, k)[0], rep.ratio(n, k + 1)[0]
            if a == 0:
                assert b == 0
            else:
                assert b / a == pytest.approx(scale / rabi, rel=1e-12)


@given(t=st.floats(-15, 15), s=st.floats(1.1, 8))
def test_scaling_law_in_detuning(t, s):
    base = adiabaticity_report(SystemConfig(omega_e=2.0), GAUSS, [t])
    scaled = adiabaticity_report(SystemConfig(omega_e=2.0 * s), GAUSS, [t])
    for n in range(base.n_max + 1):
        a, b = base.ratio(n, 0)[0], scaled.ratio(n, 0)[0]
        assert b == pytest.approx(a / s ** (n + 1), rel=1e-10, abs=0)


def test_widening_pulse_halves_the_maximum_ratio():
    s = SystemConfig(omega_e=5.0)
    maxima = []
    for tau in (10.0, 20.0, 40.0):
        f = FieldConfig(envelope_kind="gaussian", peak_rabi=1.0, center=0.0, width=tau)
        maxima.append(adiabaticity_report(s, f, np.linspace(-tau, tau, 81), n_max=1).max_ratio)
    assert maxima[1] <= maxima[0] / 2 and maxima[2] <= maxima[1] / 2

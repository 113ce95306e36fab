import math

import pytest
from hypothesis import given, strategies as st

from psas.errors import ConfigurationError, InputValidationError
from psas.field import FieldConfig
from psas.system import SystemConfig, initial_state


def test_ground_initial_state():
    cfg = SystemConfig(phi_g=0.4, phi_e=-1.2)
    s = initial_state(cfg, "ground")
    assert (s.g_amp, s.e_amp) == (1 + 0j, 0j)
    assert (s.phase_g, s.phase_e) == (0.4, -1.2)


def test_excited_initial_state():
    s = initial_state(SystemConfig(), "excited")
    assert (s.g_amp, s.e_amp) == (0j, 1 + 0j)


def test_symmetric_superposition():
    a = 1 / math.sqrt(2)
    s = initial_state(SystemConfig(), "superposition", (a, a))
    assert s.norm == pytest.approx(1.0, abs=1e-15)
    assert (s.g_amp, s.e_amp) == (a, a)


def test_unnormalized_superposition_rejected():
    with pytest.raises(InputValidationError):
        initial_state(SystemConfig(), "superposition", (1.0, 0.1))


def test_unknown_kind_rejected():
    with pytest.raises(InputValidationError):
        initial_state(SystemConfig(), "thermal")


@pytest.mark.parametrize("kwargs", [{"omega_g": 1.0, "omega_e": 1.0}, {"gamma_re": -0.1}])
def test_invalid_system_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        SystemConfig(**kwargs)


def test_complex_damping_convention():
    assert SystemConfig(gamma_re=0.2, gamma_im=0.05).gamma_e == complex(0.2, -0.05)


@given(wg=st.floats(-5, 5), gap=st.floats(0.01, 10), carrier=st.floats(-10, 10))
def test_detuning_has_one_definition(wg, gap, carrier):
    cfg = SystemConfig(omega_g=wg, omega_e=wg + gap)
    field = FieldConfig(carrier=carrier)
    assert cfg.detuning(field.carrier) == (cfg.omega_e - cfg.omega_g) - carrier


@given(wg=st.floats(-5, 5), t=st.floats(0, 100), phi=st.floats(-3, 3))
def test_bare_phase_accumulates_linearly(wg, t, phi):
    cfg = SystemConfig(omega_g=wg, omega_e=wg + 1.0, phi_g=phi)
    assert cfg.bare_phases(t)[0] - cfg.bare_phases(0.0)[0] == pytest.approx(wg * t, abs=1e-12 * (1 + abs(wg * t)))

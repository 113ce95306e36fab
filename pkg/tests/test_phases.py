import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from psas.dressed import psas_states, state_from_lab
from psas.errors import InputValidationError, UndefinedPhaseError
from psas.field import FieldConfig
from psas.phases import (cone_loop, dynamical_phase, energy_expectation, geometric_phase,
                         mpt_check, phase_record, total_phase)
from psas.propagator import propagate
from psas.system import SystemConfig, initial_state

ZERO = FieldConfig(peak_rabi=0.0)


def run(system, field, init, t_end, n=801, tol=1e-11):
    return propagate(system, field, init, (0.0, t_end), tol, grid=np.linspace(0, t_end, n))


def test_free_ground_phase():
    s = SystemConfig(omega_g=0.7, omega_e=2.0)
    tr = run(s, ZERO, initial_state(s), 10.0)
    assert np.allclose(total_phase(tr), -0.7 * tr.times, atol=1e-12)
    assert np.allclose(dynamical_phase(tr, s, ZERO), -0.7 * tr.times, atol=1e-12)


def test_free_excited_phase():
    s = SystemConfig(omega_g=0.7, omega_e=2.0)
    tr = run(s, ZERO, initial_state(s, "excited"), 10.0)
    assert np.allclose(total_phase(tr), -2.0 * tr.times, atol=1e-9)


def test_free_superposition_dynamical_phase():
    s = SystemConfig(omega_g=0.7, omega_e=2.0)
    a = 1 / math.sqrt(2)
    tr = run(s, ZERO, initial_state(s, "superposition", (a, a)), 10.0)
    assert np.allclose(dynamical_phase(tr, s, ZERO), -(0.7 + 2.0) / 2 * tr.times, atol=1e-9)


def test_phases_start_at_zero():
    s = SystemConfig(omega_g=0.2, omega_e=3.0)
    rec = phase_record(run(s, FieldConfig(peak_rabi=2.0), initial_state(s), 3.0), s,
                       FieldConfig(peak_rabi=2.0))
    assert rec.total[0] == 0.0 and rec.dynamical[0] == 0.0
    assert rec.density_ok


def test_dressed_eigenstate_phase_follows_quasi_energy():
    s = SystemConfig(omega_g=0.0, omega_e=3.0)
    f = FieldConfig(carrier=0.0, peak_rabi=4.0)
    period = 2 * math.pi / 5.0
    grid = np.linspace(0.0, period, 401)
    G, _, _, _ = psas_states(s, f, grid, check_adiabatic=False)
    tr = propagate(s, f, state_from_lab(s, 0.0, G[0]), (0.0, period), 1e-12, grid=grid)
    assert np.max(np.abs(total_phase(tr) - (-(0.0 - 1.0) * grid))) < 1e-6


def test_resonant_dynamical_phase_against_independent_quadrature():
    s = SystemConfig(omega_g=0.0, omega_e=1.0)
    f = FieldConfig(carrier=1.0, peak_rabi=1.0)
    t_end = 2 * math.pi
    tr = run(s, f, initial_state(s), t_end, n=4001, tol=1e-12)
    # independent integrand from the closed-form resonant solution g = cos(t/2), e = i sin(t/2)
    # in the rotating frame, with <H> = omega_e |e|^2 - Re(conj(e) g Omega)
    def h(t):
        g, e = math.cos(t / 2), 1j * math.sin(t / 2)
        return (abs(e) ** 2 - (e.conjugate() * g).real)
    oracle = -quad(h, 0.0, t_end, epsabs=1e-13, epsrel=1e-13)[0]
    assert dynamical_phase(tr, s, f)[-1] == pytest.approx(oracle, abs=1e-8)


def test_orthogonal_passage_is_reported():
    s = SystemConfig(omega_g=0.0, omega_e=1.0)
    f = FieldConfig(carrier=1.0, peak_rabi=1.0)
    grid = np.array([0.0, math.pi / 2, math.pi])
    tr = propagate(s, f, initial_state(s), (0.0, math.pi), 1e-12, grid=grid)
    with pytest.raises(UndefinedPhaseError):
        total_phase(tr)


@settings(max_examples=15)
@given(wg=st.floats(-2, 2), gap=st.floats(0.5, 5), rabi=st.floats(0.1, 4), excited=st.booleans())
def test_stationary_eigenstate_has_no_geometric_residual(wg, gap, rabi, excited):
    s = SystemConfig(omega_g=wg, omega_e=wg + gap)
    f = FieldConfig(carrier=0.0, peak_rabi=rabi)
    t_end = 3.0
    grid = np.linspace(0.0, t_end, 601)
    G, E, _, _ = psas_states(s, f, grid, check_adiabatic=False)
    start = E[0] if excited else G[0]
    tr = propagate(s, f, state_from_lab(s, 0.0, start), (0.0, t_end), 1e-12, grid=grid)
    rec = phase_record(tr, s, f)
    assert np.max(np.abs(rec.geometric_residual)) < 1e-8


def test_constant_loop_has_no_berry_phase():
    loop = np.tile([0.6, 0.8j], (50, 1))
    assert geometric_phase(loop) == 0.0


def cone(n, reverse=False):
    return cone_loop(SystemConfig(omega_g=0.0, omega_e=3.0), 4.0, n, reverse)


def test_cone_berry_phase_and_orientation():
    oracle = -2 * math.pi / 5  # -pi (1 - cos theta), cos theta = 3/5
    assert geometric_phase(cone(4096)) == pytest.approx(oracle, abs=1e-4)
    assert geometric_phase(cone(4096, reverse=True)) == pytest.approx(-oracle, abs=1e-4)


def test_cone_refinement_is_cauchy():
    oracle = -2 * math.pi / 5
    values = [geometric_phase(cone(n)) for n in (256, 512, 1024, 2048, 4096)]
    changes = np.abs(np.diff(values))
    assert np.all(changes[1:] < changes[:-1])
    assert abs(values[-1] - oracle) < 1e-4


@given(seed=st.integers(0, 2**32 - 1))
def test_berry_phase_is_gauge_invariant(seed):
    loop = cone(257)
    alpha = np.random.default_rng(seed).uniform(-math.pi, math.pi, len(loop))
    assert abs(geometric_phase(loop * np.exp(1j * alpha)[:, None]) - geometric_phase(loop)) < 1e-12


def test_open_loop_rejected():
    loop = cone(100)[:-10]
    with pytest.raises(InputValidationError):
        geometric_phase(loop)


def test_mpt_ground():
    s = SystemConfig(omega_e=6.0, phi_g=0.4, phi_e=0.9, gamma_re=0.05)
    f = FieldConfig(envelope_kind="gaussian", peak_rabi=1.0, center=1.0, width=3.0)
    grid = np.linspace(0.0, 2.0, 41)
    rep = mpt_check(s, f, grid, "ground", sweep=(0.0, math.pi / 3, math.pi))
    assert (rep.surviving_phase, rep.vanished_phase) == ("phi_g", "phi_e")
    assert rep.invariant_bitwise and rep.invariance_deviation == 0.0
    assert rep.equivariance_deviation < 1e-12
    rep = mpt_check(s, f, grid, "ground", sweep=(math.pi / 2,))
    assert rep.max_deviation < 1e-12


def test_mpt_excited_mirror():
    s = SystemConfig(omega_e=6.0, phi_g=0.4, phi_e=0.9)
    f = FieldConfig(envelope_kind="gaussian", peak_rabi=1.0, center=1.0, width=3.0)
    rep = mpt_check(s, f, np.linspace(0.0, 2.0, 41), "excited")
    assert (rep.surviving_phase, rep.vanished_phase) == ("phi_e", "phi_g")
    assert rep.invariant_bitwise
    assert rep.max_deviation < 1e-12


def test_energy_expectation_is_unnormalized():
    s = SystemConfig(omega_g=0.0, omega_e=2.0, gamma_re=0.5)
    tr = run(s, ZERO, initial_state(s, "excited"), 4.0)
    assert np.allclose(energy_expectation(tr, s, ZERO), 2.0 * np.exp(-0.5 * tr.times), atol=1e-9)

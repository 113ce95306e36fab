"""Bare two-level system, damping model and initial states."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ConfigurationError, InputValidationError

NORM_TOL = 1e-12


@dataclass(frozen=True)
class SystemConfig:
    """Two-level system with ground/excited eigenfrequencies and damping.

    The excited state decays (to levels other than the ground state) with the
    complex rate ``gamma_e = gamma_re - 1j * gamma_im``: ``gamma_re`` is the
    broadening and ``gamma_im`` the level shift.  ``phi_g`` and ``phi_e`` are
    the initial material phases of the bare states.
    """

    omega_g: float = 0.0
    omega_e: float = 1.0
    gamma_re: float = 0.0
    gamma_im: float = 0.0
    phi_g: float = 0.0
    phi_e: float = 0.0

    def __post_init__(self):
        for name in ("omega_g", "omega_e", "gamma_re", "gamma_im", "phi_g", "phi_e"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        if not self.omega_e > self.omega_g:
            raise ConfigurationError("omega_e must exceed omega_g")
        if self.gamma_re < 0:
            raise ConfigurationError("gamma_re must be >= 0")

    @property
    def gamma_e(self) -> complex:
        return complex(self.gamma_re, -self.gamma_im)

    def detuning(self, carrier: float) -> float:
        """Zero-field detuning ``omega_e - omega_g - carrier``.

        This is the only place the detuning is formed.
        """
        return self.omega_e - self.omega_g - carrier

    def bare_phases(self, t):
        """Accumulated bare phases ``(phi_g + omega_g t, phi_e + omega_e t)``."""
        return self.phi_g + self.omega_g * t, self.phi_e + self.omega_e * t


@dataclass(frozen=True)
class BareState:
    """Slowly varying amplitudes ``g(t)``, ``e(t)`` plus the bare phase book-keeping.

    The full state is ``g exp(-i phase_g) |g> + e exp(-i phase_e) |e>``.
    """

    t: float
    g_amp: complex
    e_amp: complex
    phase_g: float
    phase_e: float

    @property
    def norm(self) -> float:
        return abs(self.g_amp) ** 2 + abs(self.e_amp) ** 2

    def lab_amplitudes(self) -> tuple[complex, complex]:
        return (self.g_amp * cmath.exp(-1j * self.phase_g),
                self.e_amp * cmath.exp(-1j * self.phase_e))


def initial_state(config: SystemConfig, kind: str = "ground",
                  amplitudes: tuple[complex, complex] | None = None) -> BareState:
    """Build the ``t = 0`` state.

    ``kind`` is ``"ground"``, ``"excited"`` or ``"superposition"``; the last
    requires normalized ``amplitudes = (g0, e0)``.
    """
    if kind == "ground":
        g0, e0 = 1 + 0j, 0j
    elif kind == "excited":
        g0, e0 = 0j, 1 + 0j
    elif kind == "superposition":
        if amplitudes is None:
            raise InputValidationError("superposition initial state needs amplitudes (g0, e0)")
        g0, e0 = complex(amplitudes[0]), complex(amplitudes[1])
        norm = abs(g0) ** 2 + abs(e0) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise InputValidationError(f"superposition amplitudes not normalized (norm={norm:.17g})")
    else:
        raise InputValidationError(f"unknown initial-state kind {kind!r}")
    return BareState(t=0.0, g_amp=g0, e_amp=e0, phase_g=config.phi_g, phase_e=config.phi_e)

"""Total, dynamical and geometric phases, plus material-phase-tracking checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import cumulative_simpson

from .dressed import dressed_quantities, psas_components
from .errors import InputValidationError, UndefinedPhaseError
from .field import FieldConfig
from .propagator import Trajectory
from .system import SystemConfig

OVERLAP_FLOOR = 1e-12
CLOSURE_TOL = 1e-6
MIN_LOOP_OVERLAP = 0.5
UNWRAP_DENSITY = 0.5 * math.pi


@dataclass(frozen=True)
class PhaseRecord:
    """Phase functionals sampled on a trajectory grid."""

    t: np.ndarray
    total: np.ndarray
    dynamical: np.ndarray
    max_step: float

    @property
    def geometric_residual(self) -> np.ndarray:
        return self.total - self.dynamical

    @property
    def density_ok(self) -> bool:
        """Whether successive total-phase increments stay well below pi."""
        return self.max_step <= UNWRAP_DENSITY


def _total(traj: Trajectory) -> tuple[np.ndarray, float]:
    if len(traj) == 0:
        raise InputValidationError("empty trajectory")
    psi = traj.lab_amplitudes()
    overlap = psi @ np.conj(psi[0])
    small = np.abs(overlap) < OVERLAP_FLOOR
    if np.any(small):
        i = int(np.argmax(small))
        raise UndefinedPhaseError("overlap with the initial state vanishes", float(traj.times[i]))
    raw = np.angle(overlap)
    unwrapped = np.unwrap(raw)
    unwrapped -= unwrapped[0]
    step = float(np.max(np.abs(np.diff(unwrapped)))) if len(raw) > 1 else 0.0
    return unwrapped, step


def total_phase(traj: Trajectory) -> np.ndarray:
    """``arg <Psi(t0)|Psi(t)>`` of the full state, unwrapped along the grid.

    Raises
    ------
    UndefinedPhaseError
        If the overlap modulus drops below ``1e-12``.
    """
    return _total(traj)[0]


def energy_expectation(traj: Trajectory, system: SystemConfig, drive) -> np.ndarray:
    """``<Psi|H|Psi>`` with the hermitian rotating-wave Hamiltonian (no damping).

    The state is not renormalized, so a decaying norm weights the energy.
    """
    offset = system.phi_e - system.phi_g
    dw = system.detuning(drive.carrier)
    c = np.array([drive.coupling(float(s)) for s in traj.times])
    mixed = np.conj(traj.e) * traj.g * c * np.exp(1j * (offset + dw * traj.times))
    return (system.omega_g * np.abs(traj.g) ** 2 + system.omega_e * np.abs(traj.e) ** 2
            - mixed.real)


def dynamical_phase(traj: Trajectory, system: SystemConfig, drive) -> np.ndarray:
    """``-int <Psi|H|Psi> dt`` from the first grid point, by cumulative Simpson."""
    h = energy_expectation(traj, system, drive)
    if len(h) == 1:
        return np.zeros(1)
    return -cumulative_simpson(h, x=traj.times, initial=0.0)


def phase_record(traj: Trajectory, system: SystemConfig, drive) -> PhaseRecord:
    total, step = _total(traj)
    return PhaseRecord(t=traj.times, total=total, dynamical=dynamical_phase(traj, system, drive),
                       max_step=step)


def _wrap(x: float) -> float:
    r = math.remainder(x, 2.0 * math.pi)
    return math.pi if r == -math.pi else r


def geometric_phase(loop) -> float:
    """Discrete Berry phase ``-arg prod <psi_i|psi_{i+1}>`` of a closed loop.

    ``loop`` is an ``(N, dim)`` array whose last state repeats the first up
    to a phase; the closing overlap is included so the result is gauge
    invariant.  Returned in ``(-pi, pi]``.
    """
    psi = np.asarray(loop, dtype=complex)
    if psi.ndim != 2 or psi.shape[0] < 3:
        raise InputValidationError("loop must be an (N >= 3, dim) array")
    norms = np.linalg.norm(psi, axis=1)
    if np.any(norms == 0):
        raise InputValidationError("loop contains a zero vector")
    psi = psi / norms[:, None]
    if abs(np.vdot(psi[0], psi[-1])) < 1.0 - CLOSURE_TOL:
        raise InputValidationError("loop is not closed: end points are not parallel")
    links = np.sum(np.conj(psi) * np.roll(psi, -1, axis=0), axis=1)
    if np.min(np.abs(links)) <= MIN_LOOP_OVERLAP:
        raise InputValidationError("successive loop states overlap too little; refine the loop")
    return _wrap(-float(np.sum(np.angle(links))))


def cone_loop(system: SystemConfig, rabi: float, n_points: int, reverse: bool = False,
              carrier: float = 0.0) -> np.ndarray:
    """Dressed ground states of a static field as the Bloch azimuth goes round once.

    The mixing weights come from :func:`dressed_quantities` of the constant
    field; the azimuth of the ``|e>`` component is ``-phi``, so the loop
    runs over field phases ``phi = 0, -2pi/(N-1), ..., -2pi`` (reversed if
    requested).  The last state equals the first.
    """
    if n_points < 3:
        raise InputValidationError("n_points must be >= 3")
    q = dressed_quantities(system, FieldConfig(carrier=carrier, peak_rabi=rabi), 0.0)
    azimuth = np.linspace(0.0, 2.0 * math.pi, n_points)
    if reverse:
        azimuth = azimuth[::-1]
    loop = np.column_stack([np.full(n_points, q.cos_w), q.sin_w * np.exp(1j * azimuth)])
    loop[-1] = loop[0]
    return loop


@dataclass(frozen=True)
class MptReport:
    ic: str
    surviving_phase: str
    vanished_phase: str
    invariance_deviation: float
    invariant_bitwise: bool
    equivariance_deviation: float

    @property
    def max_deviation(self) -> float:
        return max(self.invariance_deviation, self.equivariance_deviation)


def _exponents(system, field, grid, ic):
    comps = psas_components(system, field, grid, ic, check_adiabatic=False)
    return {k: c.exponent for k, c in comps.components().items()}


def mpt_check(system: SystemConfig, field: FieldConfig, grid, ic: str = "ground",
              sweep=(0.0, math.pi / 3, math.pi)) -> MptReport:
    """Sweep both initial material phases through the PSAS components.

    The phase that must vanish is set to each value in ``sweep`` and the
    component exponents are compared bit for bit; the surviving phase is
    shifted by each value ``delta`` and every coefficient must change by
    ``exp(-i delta)``.
    """
    if ic not in ("ground", "excited"):
        raise InputValidationError(f"unknown initial condition {ic!r}")
    surviving, vanished = ("phi_g", "phi_e") if ic == "ground" else ("phi_e", "phi_g")
    base = _exponents(system, field, grid, ic)

    inv = 0.0
    bitwise = True
    for val in sweep:
        other = _exponents(replace(system, **{vanished: float(val)}), field, grid, ic)
        for k, x in base.items():
            if not np.array_equal(x, other[k]):
                bitwise = False
                inv = max(inv, float(np.max(np.abs(np.expm1(other[k] - x)))))

    equi = 0.0
    for delta in sweep:
        shifted = replace(system, **{surviving: getattr(system, surviving) + float(delta)})
        other = _exponents(shifted, field, grid, ic)
        for k, x in base.items():
            equi = max(equi, float(np.max(np.abs(np.expm1(other[k] - x + 1j * delta)))))
    return MptReport(ic=ic, surviving_phase=surviving, vanished_phase=vanished,
                     invariance_deviation=inv, invariant_bitwise=bitwise,
                     equivariance_deviation=equi)

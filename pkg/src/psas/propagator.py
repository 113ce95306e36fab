"""Exact numerical propagation of the slowly varying amplitudes ``g(t)``, ``e(t)``.

The equations integrated are

    dg/dt = (i/2) Omega exp(-i dPhi) e
    de/dt = -(gamma_e/2) e + (i/2) Omega exp(+i dPhi) g

with ``dPhi(t) = (phi_e - phi_g) + (omega_e - omega_g - omega) t - phi(t)``.
The bare phases ``phi_g + omega_g t`` and ``phi_e + omega_e t`` are kept
analytically on the :class:`Trajectory`.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _dopri5
from .dressed import _default_seed, _local, _nearest, lambda_minus_at, radicand
from .errors import InputValidationError, UndefinedRegionError
from .field import FieldConfig
from .system import BareState, SystemConfig

DEFAULT_POINTS = 2000
MAX_STEPS = 10_000_000
TOL_RANGE = (1e-13, 1e-4)
QUADRATURE_KEYS = ("dtw", "omega_G", "omega_E_eff")


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the amplitude equations.

    ``quadratures`` maps ``dtw``, ``omega_G`` and ``omega_E_eff`` to the
    running integrals of the corresponding frequencies from the start of the
    span, or is ``None`` when they are undefined (envelope below floor, or a
    drive without a single parametric envelope).
    """

    times: np.ndarray
    g: np.ndarray
    e: np.ndarray
    phase_g: np.ndarray
    phase_e: np.ndarray
    quadratures: dict[str, np.ndarray] | None
    tol: float
    error_estimate: float
    n_steps: int
    n_rejected: int
    method: str
    dense: Callable | None = None

    def __len__(self):
        return len(self.times)

    @property
    def states(self) -> tuple[BareState, ...]:
        return tuple(BareState(float(t), complex(g), complex(e), float(pg), float(pe))
                     for t, g, e, pg, pe in zip(self.times, self.g, self.e, self.phase_g, self.phase_e))

    @property
    def norm(self) -> np.ndarray:
        return np.abs(self.g) ** 2 + np.abs(self.e) ** 2

    def lab_amplitudes(self) -> np.ndarray:
        """``(N, 2)`` array of full amplitudes ``(g e^{-i Phi_g}, e e^{-i Phi_e})``."""
        return np.column_stack([self.g * np.exp(-1j * self.phase_g),
                                self.e * np.exp(-1j * self.phase_e)])


def _check_tol(tol: float) -> None:
    if not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise InputValidationError(f"tol={tol!r} outside [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}]")


def _grid(t_span, grid) -> tuple[float, float, np.ndarray]:
    t0, t1 = (float(v) for v in t_span)
    if not (np.isfinite(t0) and np.isfinite(t1)) or not t1 > t0:
        raise InputValidationError("t_span must satisfy t1 > t0")
    if grid is None:
        return t0, t1, np.linspace(t0, t1, DEFAULT_POINTS)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise InputValidationError("grid must be a non-empty 1-d array")
    if not np.all(np.diff(grid) > 0):
        raise InputValidationError("grid must be strictly increasing")
    if grid[0] < t0 or grid[-1] > t1:
        raise InputValidationError("grid must lie inside t_span")
    return t0, t1, grid


def _max_step(drive, max_step):
    if max_step is not None:
        return float(max_step)
    if isinstance(drive, FieldConfig) or not hasattr(drive, "width"):
        return np.inf
    return float(drive.width)


def _offset_phase(system: SystemConfig, drive) -> tuple[float, float]:
    """``(phi_e - phi_g, dw)`` so that ``theta(t) = offset + dw t``."""
    return system.phi_e - system.phi_g, system.detuning(drive.carrier)


def _span_above_floor(field: FieldConfig, t0: float, t1: float, grid: np.ndarray) -> bool:
    # Every supported envelope is monotone on each side of its centre, so the
    # minimum over the span is at an endpoint.
    return not (field.below_floor(t0) or field.below_floor(t1)
                or any(field.below_floor(float(s)) for s in grid[:: max(1, len(grid) // 64)]))


class _BranchFollower:
    """Keeps the off-resonance Rabi frequency on one branch during integration."""

    def __init__(self, system, field, dw, t0):
        self.system, self.field, self.dw = system, field, dw
        rabi, _, _, dtw, d_dtw = _local(system, field, t0, dw)
        self.ref = _default_seed(dw, 1, radicand(dtw, rabi, d_dtw))

    def accept(self, t, _y):
        rabi, _, _, dtw, d_dtw = _local(self.system, self.field, t, self.dw)
        self.ref = _nearest(cmath.sqrt(radicand(dtw, rabi, d_dtw)), self.ref)


def propagate(system: SystemConfig, drive, initial: BareState, t_span, tol: float = 1e-10,
              grid=None, quadratures: bool | None = None, max_steps: int = MAX_STEPS,
              max_step: float | None = None) -> Trajectory:
    """Integrate the amplitude equations over ``t_span`` with relative/absolute tolerance ``tol``.

    ``drive`` is a :class:`FieldConfig` or any object with ``carrier`` and
    ``coupling(t) -> Omega exp(-i phi)`` (e.g. a two-pulse train).  The
    initial amplitudes are taken to hold at ``t_span[0]``.

    ``quadratures=None`` carries the frequency integrals whenever they are
    defined; ``True`` demands them and ``False`` skips them.  ``max_step``
    caps the integrator step; it defaults to the drive's ``width`` for drives
    other than a single field, so short pulses are never stepped over.
    """
    _check_tol(tol)
    t0, t1, t_eval = _grid(t_span, grid)
    offset, dw = _offset_phase(system, drive)
    half_gamma = 0.5 * system.gamma_e
    coupling = drive.coupling

    with_quad = False
    if isinstance(drive, FieldConfig):
        ok = _span_above_floor(drive, t0, t1, t_eval)
        if quadratures and not ok:
            raise UndefinedRegionError("quadratures need the envelope above floor", (t0, t1))
        with_quad = ok if quadratures is None else bool(quadratures)
    elif quadratures:
        raise InputValidationError("quadratures need a single parametric field")

    y0 = [initial.g_amp, initial.e_amp]
    follower = None
    if with_quad:
        y0 += [0j, 0j, 0j]
        follower = _BranchFollower(system, drive, dw, t0)
        omega_g, omega_e = system.omega_g, system.omega_e

        def rhs(t, y):
            c = coupling(t)
            rot = cmath.exp(1j * (offset + dw * t))
            g, e = y[0], y[1]
            rabi, log_d, d_phi, dtw, d_dtw = _local(system, drive, t, dw)
            lam = lambda_minus_at(system, drive, t, dw, follower.ref)
            w_E = omega_e - lam
            w_E_eff = w_E - d_phi - 0.5 * system.gamma_im - 1j * (0.5 * system.gamma_re - log_d)
            return np.array([0.5j * c.conjugate() / rot * e,
                             -half_gamma * e + 0.5j * c * rot * g,
                             dtw, omega_g + lam, w_E_eff])
    else:
        def rhs(t, y):
            c = coupling(t)
            rot = cmath.exp(1j * (offset + dw * t))
            g, e = y[0], y[1]
            return np.array([0.5j * c.conjugate() / rot * e, -half_gamma * e + 0.5j * c * rot * g])

    sol = _dopri5.integrate(rhs, t0, np.array(y0, dtype=complex), t1, t_eval, tol, tol,
                            max_steps=max_steps,
                            on_accept=None if follower is None else follower.accept,
                            max_step=_max_step(drive, max_step))
    quads = None
    if with_quad:
        quads = {k: sol.y[:, 2 + i].copy() for i, k in enumerate(QUADRATURE_KEYS)}
    return _trajectory(system, sol, sol.y[:, 0], sol.y[:, 1], quads, tol, "first-order",
                       lambda t, d=sol.dense: d(t)[:, :2])


def _trajectory(system, sol, g, e, quads, tol, method, dense) -> Trajectory:
    pg, pe = system.bare_phases(sol.t)
    return Trajectory(times=sol.t.copy(), g=np.ascontiguousarray(g), e=np.ascontiguousarray(e),
                      phase_g=np.asarray(pg, dtype=float) + 0 * sol.t,
                      phase_e=np.asarray(pe, dtype=float) + 0 * sol.t,
                      quadratures=quads, tol=tol, error_estimate=tol * sol.max_error_ratio,
                      n_steps=sol.n_steps, n_rejected=sol.n_rejected, method=method, dense=dense)


def propagate_second_order(system: SystemConfig, field: FieldConfig, initial: BareState, t_span,
                           tol: float = 1e-10, grid=None, max_steps: int = MAX_STEPS) -> Trajectory:
    """Integrate the eliminated form ``g'' + i dtw g' + (Omega^2/4) g = 0``.

    ``e`` is recovered from the first amplitude equation,
    ``e = -2i exp(i dPhi) g' / Omega``.  The state vector is ``(g, g')`` with
    the absolute tolerance on ``g'`` scaled by the peak Rabi frequency.

    Raises
    ------
    InputValidationError
        If the initial state is not the ground state.
    UndefinedRegionError
        If the envelope drops below its floor on the span.
    """
    _check_tol(tol)
    if initial.e_amp != 0:
        raise InputValidationError("second-order propagation starts from the ground state")
    t0, t1, t_eval = _grid(t_span, grid)
    if not _span_above_floor(field, t0, t1, t_eval):
        raise UndefinedRegionError("envelope below floor on the propagation span", (t0, t1))
    offset, dw = _offset_phase(system, field)

    def rhs(t, y):
        rabi, _, _, dtw, _ = _local(system, field, t, dw)
        return np.array([y[1], -1j * dtw * y[1] - 0.25 * rabi * rabi * y[0]])

    scale = max(field.peak_rabi, np.finfo(float).tiny)
    sol = _dopri5.integrate(rhs, t0, np.array([initial.g_amp, 0j], dtype=complex), t1, t_eval,
                            tol, np.array([tol, tol * scale]), max_steps=max_steps)

    def recover(ts, y):
        c = np.array([field.coupling(float(s)) for s in ts])
        rot = np.exp(1j * (offset + dw * np.asarray(ts)))
        return y[:, 0], -2j * rot * y[:, 1] / np.conj(c)

    g, e = recover(sol.t, sol.y)

    def dense(t, d=sol.dense):
        ts = np.atleast_1d(t)
        gg, ee = recover(ts, d(ts))
        return np.column_stack([gg, ee])

    return _trajectory(system, sol, g, e, None, tol, "second-order", dense)


def bare_populations(traj: Trajectory) -> np.ndarray:
    """``(N, 4)`` array of ``(t, |g|^2, |e|^2, norm)``."""
    pg = np.abs(traj.g) ** 2
    pe = np.abs(traj.e) ** 2
    return np.column_stack([traj.times, pg, pe, pg + pe])

"""Two-pulse wave-packet interference.

A first pulse creates a packet ``A1 exp(-i phi1)`` that evolves freely for the
delay ``tau`` and acquires the material phase ``Phi``; a second pulse adds
``A2 exp(-i phi2)`` on the same level.  The detected population is the
modulus squared of the sum.

Two closed forms are exposed.  :func:`superpose` evaluates the textbook
interference expression ``A1^2 + A2^2 + 2 A1 A2 cos(phi1 - phi2 - Phi)``
literally.  :func:`two_packet_population` evaluates the amplitude sum
``|A1 exp(-i(phi1 + Phi)) + A2 exp(-i phi2)|^2`` whose cross term is
``cos(phi1 + Phi - phi2)``; the two agree whenever ``phi1 = phi2`` and the
scans below use the amplitude sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InputValidationError
from .field import TwoPulseTrain
from .propagator import propagate
from .system import SystemConfig, initial_state

NORM_TOL = 1e-12
MODULUS_FLOOR = 1e-12
MAX_AREA = 0.2
MIN_GAP_WIDTHS = 4.0
EDGE_WIDTHS = 6.0
LIFETIME_LIMIT = 0.1


@dataclass(frozen=True)
class Wavepacket:
    """Finite superposition of stationary levels ``(omega_n, c_n)``."""

    levels: tuple[tuple[float, complex], ...]
    created_at: float = 0.0
    initial_phase: float = 0.0

    def __post_init__(self):
        if len(self.levels) == 0:
            raise InputValidationError("a wave packet needs at least one level")
        norm = sum(abs(complex(c)) ** 2 for _, c in self.levels)
        if abs(norm - 1.0) > NORM_TOL:
            raise InputValidationError(f"wave-packet weights not normalized (sum={norm:.17g})")
        object.__setattr__(self, "levels", tuple((float(w), complex(c)) for w, c in self.levels))

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([w for w, _ in self.levels])

    @property
    def weights(self) -> np.ndarray:
        return np.array([abs(c) ** 2 for _, c in self.levels])

    @property
    def dominant_frequency(self) -> float:
        return float(self.frequencies[int(np.argmax(self.weights))])

    def autocorrelation(self, tau) -> np.ndarray:
        """``<Psi(t1)|Psi(t1 + tau)> = sum |c_n|^2 exp(-i omega_n tau)``."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return np.exp(-1j * np.outer(tau, self.frequencies)) @ self.weights


class AcquiredPhase(NamedTuple):
    phase: np.ndarray
    modulus: np.ndarray
    defined: np.ndarray


def acquired_phase(wp: Wavepacket, tau) -> AcquiredPhase:
    """Material phase ``Phi(tau) = -arg <Psi(t1)|Psi(t1+tau)>`` and the overlap modulus.

    The argument is unwrapped along a grid from 0 that is fine enough to
    follow the fastest level.  Where the modulus is below ``1e-12`` the
    phase is NaN and ``defined`` is False.  A single level gives
    ``Phi = omega_1 tau`` exactly.
    """
    scalar = np.ndim(tau) == 0
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(tau < 0) or not np.all(np.isfinite(tau)):
        raise InputValidationError("delays must be finite and >= 0")
    if len(wp.levels) == 1:
        w, _ = wp.levels[0]
        out = AcquiredPhase(w * tau, np.ones_like(tau), np.ones(tau.shape, dtype=bool))
    else:
        w_max = float(np.max(np.abs(wp.frequencies)))
        t_max = float(np.max(tau))
        n = 2 if w_max == 0 else max(2, int(math.ceil(t_max * 4.0 * w_max / math.pi)) + 1)
        dense = np.union1d(np.linspace(0.0, t_max, n), tau)
        ac = wp.autocorrelation(dense)
        mod = np.abs(ac)
        ok = mod >= MODULUS_FLOOR
        phase = np.full(dense.shape, np.nan)
        if np.any(ok):
            phase[ok] = np.unwrap(-np.angle(ac[ok]))
            first = int(np.argmax(ok))
            if dense[first] == 0.0:
                phase[ok] -= phase[first]
        idx = np.searchsorted(dense, tau)
        out = AcquiredPhase(phase[idx], mod[idx], ok[idx])
    if scalar:
        return AcquiredPhase(float(out.phase[0]), float(out.modulus[0]), bool(out.defined[0]))
    return out


def superpose(A1, phi1, Phi, A2, phi2):
    """``A1^2 + A2^2 + 2 A1 A2 cos(phi1 - phi2 - Phi)``."""
    if np.any(np.asarray(A1) < 0) or np.any(np.asarray(A2) < 0):
        raise InputValidationError("amplitudes must be >= 0")
    return A1 * A1 + A2 * A2 + 2.0 * A1 * A2 * np.cos(phi1 - phi2 - Phi)


def two_packet_population(A1, phi1, Phi, A2, phi2):
    """``|A1 exp(-i(phi1 + Phi)) + A2 exp(-i phi2)|^2``."""
    if np.any(np.asarray(A1) < 0) or np.any(np.asarray(A2) < 0):
        raise InputValidationError("amplitudes must be >= 0")
    return A1 * A1 + A2 * A2 + 2.0 * A1 * A2 * np.cos(phi1 + Phi - phi2)


@dataclass(frozen=True)
class SecondPulse:
    """Amplitude and phase policy of the second packet.

    ``policy="locked"``: ``phi2 = phi1 + locked_frequency * tau + offset``.
    ``policy="fixed"``: ``phi2 = phase`` regardless of the delay.
    """

    amplitude: float = 1.0
    policy: str = "locked"
    locked_frequency: float = 0.0
    offset: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.policy not in ("locked", "fixed"):
            raise InputValidationError(f"unknown phase policy {self.policy!r}")
        if self.amplitude < 0:
            raise InputValidationError("second-pulse amplitude must be >= 0")


@dataclass(frozen=True)
class Interferogram:
    scan_variable: str
    values: np.ndarray
    P: np.ndarray
    A1sq: np.ndarray
    A2sq: np.ndarray
    cross: np.ndarray
    model: str
    P_propagated: np.ndarray | None = None
    info: dict = dc_field(default_factory=dict)

    @property
    def visibility(self) -> float:
        """``(max - min) / (max + min)`` of the analytic series."""
        return visibility(self.P)


def visibility(P) -> float:
    P = np.asarray(P, dtype=float)
    hi, lo = float(np.max(P)), float(np.min(P))
    return 0.0 if hi + lo == 0 else (hi - lo) / (hi + lo)


def _scan(wp, second, tau, locked_frequency, offset, scan_variable, values):
    acq = acquired_phase(wp, tau)
    A1 = acq.modulus
    A2 = np.full(np.shape(tau), second.amplitude)
    if second.policy == "fixed":
        phi2 = np.full(np.shape(tau), second.phase)
    else:
        phi2 = wp.initial_phase + locked_frequency * tau + offset
    Phi = np.where(acq.defined, acq.phase, 0.0)
    P = two_packet_population(A1, wp.initial_phase, Phi, A2, phi2)
    cross = P - A1**2 - A2**2
    return Interferogram(scan_variable=scan_variable, values=np.asarray(values, dtype=float), P=P,
                         A1sq=A1**2, A2sq=A2**2, cross=cross, model="analytic",
                         info={"undefined_phase": (~np.asarray(acq.defined)).tolist()})


def fringe_scan(wp: Wavepacket, second: SecondPulse, tau_grid) -> Interferogram:
    """Interferogram versus the delay ``tau``."""
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or (len(tau) > 1 and not (np.all(np.diff(tau) > 0) or np.all(np.diff(tau) < 0))):
        raise InputValidationError("tau grid must be monotone")
    return _scan(wp, second, tau, second.locked_frequency, second.offset, "delay", tau)


def frequency_scan(wp: Wavepacket, second: SecondPulse, tau: float, frequencies) -> Interferogram:
    """Interferogram versus the locked frequency at fixed delay."""
    w = np.asarray(frequencies, dtype=float)
    taus = np.full(w.shape, float(tau))
    return _scan(wp, replace(second, policy="locked"), taus, w, second.offset,
                 "locked_frequency", w)


def offset_scan(wp: Wavepacket, second: SecondPulse, tau: float, offsets) -> Interferogram:
    """Interferogram versus the locked phase offset at fixed delay."""
    off = np.asarray(offsets, dtype=float)
    taus = np.full(off.shape, float(tau))
    return _scan(wp, replace(second, policy="locked"), taus, second.locked_frequency, off,
                 "phase_offset", off)


def fit_fringe(tau, P) -> tuple[float, np.ndarray]:
    """Least-squares fit ``P ~ a + b cos(k tau) + c sin(k tau)``; returns ``(k, [a, b, c])``.

    ``k`` starts from the strongest FFT bin of a uniform resampling and is
    refined by a bounded scalar search over the residual.
    """
    tau = np.asarray(tau, dtype=float)
    P = np.asarray(P, dtype=float)
    if len(tau) < 8:
        raise InputValidationError("need at least 8 samples to fit a fringe")
    uniform = np.linspace(tau[0], tau[-1], len(tau))
    resampled = np.interp(uniform, tau, P)
    spectrum = np.abs(np.fft.rfft(resampled - resampled.mean()))
    freqs = np.fft.rfftfreq(len(uniform), uniform[1] - uniform[0]) * 2.0 * math.pi
    j = int(np.argmax(spectrum[1:])) + 1
    dk = freqs[1]

    def solve(k):
        basis = np.column_stack([np.ones_like(tau), np.cos(k * tau), np.sin(k * tau)])
        coef, *_ = np.linalg.lstsq(basis, P, rcond=None)
        return coef, float(np.sum((basis @ coef - P) ** 2))

    res = minimize_scalar(lambda k: solve(k)[1], bounds=(max(freqs[j] - dk, 1e-12), freqs[j] + dk),
                          method="bounded", options={"xatol": 1e-12 * max(1.0, freqs[j])})
    return float(res.x), solve(float(res.x))[0]


def fringe_period(tau, P) -> float:
    return 2.0 * math.pi / fit_fringe(tau, P)[0]


def windowed_visibility(tau, P, k: float, centre: float, half_width: float) -> float:
    """Local fringe visibility ``sqrt(b^2 + c^2) / a`` from a fit at fixed ``k``."""
    tau = np.asarray(tau, dtype=float)
    P = np.asarray(P, dtype=float)
    m = np.abs(tau - centre) <= half_width
    if np.count_nonzero(m) < 4:
        raise InputValidationError("window holds fewer than 4 samples")
    t = tau[m]
    basis = np.column_stack([np.ones_like(t), np.cos(k * t), np.sin(k * t)])
    a, b, c = np.linalg.lstsq(basis, P[m], rcond=None)[0]
    return float(math.hypot(b, c) / a)


def ramsey_crosscheck(system: SystemConfig, train: TwoPulseTrain, tau_grid, tol: float = 1e-10,
                      lifetime_limit: float = LIFETIME_LIMIT) -> Interferogram:
    """Exact two-pulse propagation against the perturbative interference model.

    For each delay the train (with ``delay = tau``) is propagated from the
    ground state, starting ``6 width`` before the first pulse and read out
    ``6 width`` after the second.  The model uses equal amplitudes
    ``A = |int Omega_k exp(i dw t) dt| / 2`` damped by ``exp(-gamma_re T / 2)``
    over the time ``T`` each packet spends excited before readout, and the
    material phase ``Phi = (dw - gamma_im / 2) tau``.
    """
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or len(tau) == 0:
        raise InputValidationError("tau grid must be a non-empty 1-d array")
    if train.area > MAX_AREA:
        raise InputValidationError(f"pulse area {train.area} exceeds the perturbative limit {MAX_AREA}")
    gap = MIN_GAP_WIDTHS * train.width
    if np.any(tau <= gap):
        raise InputValidationError(f"pulses overlap: every delay must exceed {gap:.17g}")

    dw = system.detuning(train.carrier)
    A = 0.5 * train.spectral_area(dw)
    edge = EDGE_WIDTHS * train.width
    A1 = A * np.exp(-0.5 * system.gamma_re * (tau + edge))
    A2 = np.full(tau.shape, A * math.exp(-0.5 * system.gamma_re * edge))
    Phi = (dw - 0.5 * system.gamma_im) * tau
    P = two_packet_population(A1, train.phase1, Phi, A2, train.phase2)

    ground = initial_state(system)
    prop = np.empty(tau.shape)
    for i, d in enumerate(tau):
        tr = replace(train, delay=float(d))
        t0 = tr.first_center - edge
        t1 = tr.second_center + edge
        traj = propagate(system, tr, ground, (t0, t1), tol, grid=np.array([t1]))
        prop[i] = abs(traj.e[-1]) ** 2

    lifetime = system.gamma_re * float(np.max(tau))
    return Interferogram(
        scan_variable="delay", values=tau, P=P, A1sq=A1**2, A2sq=A2**2, cross=P - A1**2 - A2**2,
        model="analytic+propagated", P_propagated=prop,
        info={"gamma_tau_max": lifetime, "lifetime_ok": lifetime < lifetime_limit,
              "amplitude": A},
    )


def relative_rms(a, b) -> float:
    """``rms(a - b) / rms(b)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.sqrt(np.mean((a - b) ** 2)) / np.sqrt(np.mean(b**2)))

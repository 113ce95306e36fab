"""Classical driving field: envelope, optical phase and their derivatives.

The field is ``E = (1/2) E0(t) [exp(i Phi) + exp(-i Phi)]`` with total optical
phase ``Phi = carrier * t + phi(t)``.  The envelope is expressed directly as a
Rabi frequency ``Omega(t)`` (the dipole moment is absorbed, hbar = 1).

Every envelope and phase kind has closed forms for the value, the first
derivative and the logarithmic derivative ``Omega^-1 dOmega/dt`` (and its time
derivative).  Higher derivatives of the nonadiabatic combination
``dphi/dt - i Omega^-1 dOmega/dt`` are obtained by Richardson-extrapolated
central differences of the first-derivative closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import comb
from typing import NamedTuple

from .errors import ConfigurationError, InputValidationError, UndefinedRegionError

ENVELOPE_KINDS = ("constant", "gaussian", "sech", "smooth-ramp")
PHASE_KINDS = ("constant", "linear-chirp", "sinusoidal")

DEFAULT_FLOOR = 1e-9
DEFAULT_N_MAX = 3
SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class FieldConfig:
    """Parametric description of a single driving field.

    Parameters
    ----------
    carrier : float
        Carrier angular frequency ``omega``.
    envelope_kind : str
        One of ``constant``, ``gaussian`` (``exp(-x^2)``), ``sech``
        (``sech x``) or ``smooth-ramp`` (``(1 + tanh x) / 2``), with
        ``x = (t - center) / width``.
    peak_rabi : float
        Peak Rabi frequency ``Omega0 >= 0``.
    center, width : float
        Pulse centre and width (``width`` is unused by ``constant`` except as
        the finite-difference length scale).
    phase_kind : str
        One of ``constant`` (``phi0``), ``linear-chirp``
        (``phi0 + chirp (t - center)^2 / 2``) or ``sinusoidal``
        (``phi0 + depth sin(rate (t - center))``).
    floor : float
        Relative envelope floor below which the log-derivative is undefined.
    n_max : int
        Highest supported order of :func:`nonadiabatic_derivative`.
    fd_step : float, optional
        Finite-difference step; defaults to ``1e-3 * width``.
    """

    carrier: float = 0.0
    envelope_kind: str = "constant"
    peak_rabi: float = 1.0
    center: float = 0.0
    width: float = 1.0
    phase_kind: str = "constant"
    phase_offset: float = 0.0
    chirp: float = 0.0
    mod_depth: float = 0.0
    mod_rate: float = 0.0
    floor: float = DEFAULT_FLOOR
    n_max: int = DEFAULT_N_MAX
    fd_step: float | None = None

    def __post_init__(self):
        if self.envelope_kind not in ENVELOPE_KINDS:
            raise ConfigurationError(
                f"unsupported envelope kind {self.envelope_kind!r}; expected one of {ENVELOPE_KINDS}"
            )
        if self.phase_kind not in PHASE_KINDS:
            raise ConfigurationError(
                f"unsupported phase kind {self.phase_kind!r}; expected one of {PHASE_KINDS}"
            )
        for name in ("carrier", "peak_rabi", "center", "width", "phase_offset",
                     "chirp", "mod_depth", "mod_rate", "floor"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        if self.peak_rabi < 0:
            raise ConfigurationError("peak_rabi must be >= 0")
        if self.width <= 0:
            raise ConfigurationError("width must be > 0")
        if not 0.0 < self.floor < 1.0:
            raise ConfigurationError("floor must lie in (0, 1)")
        if self.n_max < 0:
            raise ConfigurationError("n_max must be >= 0")
        if self.fd_step is not None and not self.fd_step > 0:
            raise ConfigurationError("fd_step must be > 0")

    @property
    def step(self) -> float:
        return self.fd_step if self.fd_step is not None else 1e-3 * self.width

    @property
    def threshold(self) -> float:
        """Absolute Rabi frequency below which log-derivatives are undefined."""
        return self.floor * self.peak_rabi

    def below_floor(self, t: float) -> bool:
        return _envelope(self, t)[0] < self.threshold

    def coupling(self, t: float) -> complex:
        """Complex coupling ``Omega(t) exp(-i phi(t))`` used by the propagators."""
        rabi = _envelope(self, t)[0]
        return rabi * cmath.exp(-1j * _phase(self, t)[0])

    def log_envelope_ratio(self, t: float, t_ref: float = 0.0) -> float:
        """``ln(Omega(t) / Omega(t_ref))`` in closed form (the integral of the log-derivative)."""
        return _log_envelope(self, t) - _log_envelope(self, t_ref)


@dataclass(frozen=True)
class FieldSample:
    """Field quantities at one instant.

    ``log_d_rabi`` is ``None`` where the envelope is below its floor.
    """

    t: float
    rabi: float
    d_rabi: float
    log_d_rabi: float | None
    phase: float
    d_phase: float
    total_phase: float


class Derivative(NamedTuple):
    value: complex
    error: float


def _logistic(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def _sech(x: float) -> float:
    ex = math.exp(-abs(x))
    return 2.0 * ex / (1.0 + ex * ex)


def _softplus(z: float) -> float:
    return max(z, 0.0) + math.log1p(math.exp(-abs(z)))


def _envelope(cfg: FieldConfig, t: float) -> tuple[float, float, float, float]:
    """Return ``(Omega, dOmega/dt, Omega^-1 dOmega/dt, d/dt of the latter)``."""
    kind = cfg.envelope_kind
    tau = cfg.width
    if kind == "constant":
        return cfg.peak_rabi, 0.0, 0.0, 0.0
    x = (t - cfg.center) / tau
    if kind == "gaussian":
        rabi = cfg.peak_rabi * math.exp(-x * x)
        log_d = -2.0 * x / tau
        d_log_d = -2.0 / (tau * tau)
    elif kind == "sech":
        s = _sech(x)
        rabi = cfg.peak_rabi * s
        log_d = -math.tanh(x) / tau
        d_log_d = -s * s / (tau * tau)
    else:  # smooth-ramp
        s = _sech(x)
        rabi = cfg.peak_rabi * _logistic(2.0 * x)
        log_d = 2.0 * _logistic(-2.0 * x) / tau
        d_log_d = -s * s / (tau * tau)
    return rabi, rabi * log_d, log_d, d_log_d


def _log_envelope(cfg: FieldConfig, t: float) -> float:
    """``ln(Omega(t) / Omega0)`` without forming ``Omega``."""
    kind = cfg.envelope_kind
    if kind == "constant":
        return 0.0
    x = (t - cfg.center) / cfg.width
    if kind == "gaussian":
        return -x * x
    if kind == "sech":
        ax = abs(x)
        return -(ax + math.log1p(math.exp(-2.0 * ax)) - math.log(2.0))
    return -_softplus(-2.0 * x)


def _phase(cfg: FieldConfig, t: float) -> tuple[float, float, float]:
    """Return ``(phi, dphi/dt, d2phi/dt2)``."""
    kind = cfg.phase_kind
    if kind == "constant":
        return cfg.phase_offset, 0.0, 0.0
    u = t - cfg.center
    if kind == "linear-chirp":
        b = cfg.chirp
        return cfg.phase_offset + 0.5 * b * u * u, b * u, b
    a, r = cfg.mod_depth, cfg.mod_rate
    s, c = math.sin(r * u), math.cos(r * u)
    return cfg.phase_offset + a * s, a * r * c, -a * r * r * s


def _check_time(t: float) -> None:
    if not math.isfinite(t):
        raise InputValidationError(f"time must be finite, got {t!r}")


def eval_field(config: FieldConfig, t: float) -> FieldSample:
    """Evaluate envelope, phase and first derivatives at ``t``."""
    _check_time(t)
    rabi, d_rabi, log_d, _ = _envelope(config, t)
    phi, d_phi, _ = _phase(config, t)
    return FieldSample(
        t=t,
        rabi=rabi,
        d_rabi=d_rabi,
        log_d_rabi=None if rabi < config.threshold else log_d,
        phase=phi,
        d_phase=d_phi,
        total_phase=config.carrier * t + phi,
    )


def _first_order(config: FieldConfig, t: float) -> complex:
    _, _, _, d_log_d = _envelope(config, t)
    _, _, dd_phi = _phase(config, t)
    return complex(dd_phi, -d_log_d)


def _central_difference(f, t: float, m: int, h: float) -> complex:
    acc = 0j
    for j in range(m + 1):
        acc += (-1) ** j * comb(m, j) * f(t + (0.5 * m - j) * h)
    return acc / h**m


def nonadiabatic_derivative(config: FieldConfig, n: int, t: float,
                            check_floor: bool = True) -> Derivative:
    """n-th time derivative of ``dphi/dt - i Omega^-1 dOmega/dt``.

    Orders 0 and 1 are closed forms (zero error estimate).  For ``n >= 2`` the
    ``(n-1)``-th derivative of the order-1 closed form is taken by central
    differences with steps ``h`` and ``h/2``, combined by one Richardson level;
    the returned error is the difference between the extrapolated and the
    finer estimate.

    Raises
    ------
    UndefinedRegionError
        If ``check_floor`` and the envelope is below its floor anywhere on the
        stencil.
    """
    _check_time(t)
    if not 0 <= n <= config.n_max:
        raise ConfigurationError(f"derivative order {n} outside [0, {config.n_max}]")
    m = n - 1
    h = config.step
    half_width = 0.5 * max(m, 0) * h
    if check_floor:
        nodes = [t] if m <= 0 else [t + (0.5 * m - j) * h for j in range(m + 1)] + [t]
        if any(config.below_floor(s) for s in nodes):
            raise UndefinedRegionError(
                "envelope below floor, log-derivative undefined",
                (t - half_width, t + half_width),
            )
    if n == 0:
        _, _, log_d, _ = _envelope(config, t)
        _, d_phi, _ = _phase(config, t)
        return Derivative(complex(d_phi, -log_d), 0.0)
    if n == 1:
        return Derivative(_first_order(config, t), 0.0)
    f = lambda s: _first_order(config, s)  # noqa: E731
    coarse = _central_difference(f, t, m, h)
    fine = _central_difference(f, t, m, 0.5 * h)
    extrapolated = (4.0 * fine - coarse) / 3.0
    return Derivative(extrapolated, abs(extrapolated - fine))


def rabi_and_log_derivative(config: FieldConfig, t: float) -> tuple[float, float, float]:
    """``(Omega, Omega^-1 dOmega/dt, d/dt(Omega^-1 dOmega/dt))`` with no floor check."""
    rabi, _, log_d, d_log_d = _envelope(config, t)
    return rabi, log_d, d_log_d


def phase_and_derivatives(config: FieldConfig, t: float) -> tuple[float, float, float]:
    return _phase(config, t)


@dataclass(frozen=True)
class TwoPulseTrain:
    """Two Gaussian pulses of equal area sharing one carrier.

    Pulse ``k`` contributes ``Omega_k(t) exp(-i phase_k)`` to the complex
    coupling, with ``Omega_k = peak * exp(-((t - t_k) / width)^2)`` and
    ``peak = area / (sqrt(pi) * width)``.  The second centre is
    ``first_center + delay``.
    """

    carrier: float = 0.0
    width: float = 0.05
    area: float = 0.1
    first_center: float = 0.3
    delay: float = 1.0
    phase1: float = 0.0
    phase2: float = 0.0

    def __post_init__(self):
        if self.width <= 0:
            raise ConfigurationError("pulse width must be > 0")
        if self.area < 0:
            raise ConfigurationError("pulse area must be >= 0")

    @property
    def peak_rabi(self) -> float:
        return self.area / (SQRT_PI * self.width)

    @property
    def second_center(self) -> float:
        return self.first_center + self.delay

    def coupling(self, t: float) -> complex:
        x1 = (t - self.first_center) / self.width
        x2 = (t - self.second_center) / self.width
        peak = self.peak_rabi
        return (peak * math.exp(-x1 * x1) * cmath.exp(-1j * self.phase1)
                + peak * math.exp(-x2 * x2) * cmath.exp(-1j * self.phase2))

    def spectral_area(self, detuning: float) -> float:
        """Modulus of ``int Omega_k(t) exp(i detuning t) dt`` for one pulse."""
        return self.area * math.exp(-0.25 * (detuning * self.width) ** 2)

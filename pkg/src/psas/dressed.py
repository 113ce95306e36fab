"""Phase-sensitive dressed (adiabatic) states.

Per instant the driven system is characterised by

* the complex detuning ``dtw = dw - dphi/dt - gamma_im/2 - i (gamma_re/2 - Omega^-1 dOmega/dt)``,
* the off-resonance Rabi frequency ``big_omega = sqrt(dtw^2 + Omega^2 - 2i d(dtw)/dt)``,
  continued along the time grid so that it never switches branch,
* quasi-energies ``lambda_pm = (dtw +- big_omega) / 2`` and their corrected
  forms ``lambda_tilde_pm = lambda_pm - (i/2) big_omega^-1 d(big_omega)/dt``,
* complex weights ``cos_w = (lambda_tilde_plus / big_omega)^(1/2)`` and
  ``sin_w = sgn(dw) (-lambda_tilde_minus / big_omega)^(1/2)``, which satisfy
  ``cos_w^2 + sin_w^2 = 1`` although the states are not orthonormal,
* Stark-shifted frequencies ``omega_G = omega_g + lambda_minus``,
  ``omega_E = omega_e - lambda_minus`` and the effective excited frequency
  ``omega_E_eff = omega_E - dphi/dt - gamma_im/2 - i (gamma_re/2 - Omega^-1 dOmega/dt)``.

The dressed states themselves are
``|G> = sin_w |G>_v + cos_w |G>_r`` and ``|E> = cos_w |E>_r - sin_w |E>_v``
with four components whose phases carry the initial material phase of the
initially populated bare level.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, fields

import numpy as np

from .errors import (BranchAmbiguityError, DegeneratePointError, InputValidationError,
                     UndefinedRegionError)
from .field import FieldConfig, phase_and_derivatives, rabi_and_log_derivative
from .system import BareState, SystemConfig

DEGENERATE_TOL = 1e-12
BRANCH_JUMP_LIMIT = 0.5
QUAD_TOL = 1e-10


class AdiabaticityWarning(UserWarning):
    """The generalized adiabatic conditions fail on the requested grid."""


@dataclass(frozen=True)
class DressedQuantities:
    t: float
    dtw: complex
    d_dtw: complex
    big_omega: complex
    d_big_omega: complex
    lambda_plus: complex
    lambda_minus: complex
    lambda_tilde_plus: complex
    lambda_tilde_minus: complex
    cos_w: complex
    sin_w: complex
    omega_G: complex
    omega_E: complex
    omega_E_eff: complex


def detuning_sign(dw: float, sgn_zero: int = 1) -> int:
    """``sgn(dw)`` with the convention ``sgn(0) = sgn_zero``."""
    if sgn_zero not in (1, -1):
        raise InputValidationError("sgn_zero must be +1 or -1")
    if dw > 0:
        return 1
    if dw < 0:
        return -1
    return sgn_zero


def principal_root(z: complex) -> complex:
    """Square root with ``Re >= 0`` and, on ties, ``Im >= 0``."""
    r = cmath.sqrt(z)
    if r.real < 0 or (r.real == 0 and r.imag < 0):
        r = -r
    return r


def _nearest(r: complex, ref: complex) -> complex:
    return r if abs(r - ref) <= abs(r + ref) else -r


def radicand(dtw, rabi, d_dtw):
    """``dtw^2 + Omega^2 - 2i d(dtw)/dt``; works on scalars and arrays."""
    return dtw * dtw + rabi * rabi - 2j * d_dtw


def branch_track(dtw, rabi, d_dtw, seed: complex | None = None, times=None) -> np.ndarray:
    """Continuous square root of :func:`radicand` along a grid.

    The first value is the principal root (``Re >= 0``, ties ``Im >= 0``), or
    the root nearest to ``seed`` when one is given.  Each following value is
    the sign choice closest to its predecessor.

    Raises
    ------
    BranchAmbiguityError
        When both sign choices move by more than half the previous modulus.
    """
    rad = np.atleast_1d(radicand(np.asarray(dtw, dtype=complex), np.asarray(rabi, dtype=float),
                                 np.asarray(d_dtw, dtype=complex)))
    roots = np.sqrt(rad)
    out = np.empty_like(roots)
    prev = principal_root(complex(rad[0])) if seed is None else _nearest(complex(roots[0]), seed)
    out[0] = prev
    for i in range(1, len(roots)):
        r = complex(roots[i])
        cand = _nearest(r, prev)
        jump = abs(cand - prev)
        if jump > BRANCH_JUMP_LIMIT * abs(prev) and not (jump == 0.0 and prev == 0):
            raise BranchAmbiguityError(
                "off-resonance Rabi frequency jumps on both branches", i,
                None if times is None else float(times[i]))
        out[i] = cand
        prev = cand
    return out


def quasi_energies(dtw: complex, big_omega: complex, rabi: float, d_dtw: complex):
    """``(lambda_plus, lambda_minus)`` without cancellation.

    The smaller root is recovered from the product
    ``lambda_plus * lambda_minus = -(Omega^2 - 2i d(dtw)/dt) / 4``.
    """
    q = rabi * rabi - 2j * d_dtw
    s = dtw + big_omega
    d = dtw - big_omega
    if abs(s) >= abs(d):
        return 0.5 * s, -q / (2.0 * s)
    return -q / (2.0 * d), 0.5 * d


def weights(lambda_plus: complex, lambda_minus: complex, big_omega: complex,
            d_big_omega: complex, sign: int):
    """Corrected quasi-energies and the complex ``COS``/``SIN`` weights."""
    corr = 0.5j * d_big_omega / big_omega
    ltp = lambda_plus - corr
    ltm = lambda_minus - corr
    cos_w = cmath.sqrt(ltp / big_omega)
    sin_w = sign * cmath.sqrt(-ltm / big_omega)
    return ltp, ltm, cos_w, sin_w


def _local(system: SystemConfig, field: FieldConfig, t: float, dw: float):
    if field.below_floor(t):
        raise UndefinedRegionError("envelope below floor, dressed quantities undefined", (t, t))
    rabi, log_d, d_log_d = rabi_and_log_derivative(field, t)
    _, d_phi, dd_phi = phase_and_derivatives(field, t)
    dtw = complex(dw - d_phi - 0.5 * system.gamma_im, -(0.5 * system.gamma_re - log_d))
    d_dtw = complex(-dd_phi, d_log_d)
    return rabi, log_d, d_phi, dtw, d_dtw


def _effective_excited(system: SystemConfig, omega_E: complex, d_phi: float, log_d: float) -> complex:
    return omega_E - d_phi - 0.5 * system.gamma_im - 1j * (0.5 * system.gamma_re - log_d)


def _default_seed(dw: float, sgn_zero: int, rad0: complex) -> complex:
    # Connects the dressed ground state to |g> in the weak-field limit for either sign of dw.
    return detuning_sign(dw, sgn_zero) * principal_root(rad0)


def _assemble(system, t, dw, sign, rabi, log_d, d_phi, dtw, d_dtw, bo, dbo) -> DressedQuantities:
    if abs(bo) < DEGENERATE_TOL:
        raise DegeneratePointError("off-resonance Rabi frequency vanishes", t)
    lp, lm = quasi_energies(dtw, bo, rabi, d_dtw)
    ltp, ltm, cos_w, sin_w = weights(lp, lm, bo, dbo, sign)
    omega_G = system.omega_g + lm
    omega_E = system.omega_e - lm
    return DressedQuantities(
        t=t, dtw=dtw, d_dtw=d_dtw, big_omega=bo, d_big_omega=dbo,
        lambda_plus=lp, lambda_minus=lm, lambda_tilde_plus=ltp, lambda_tilde_minus=ltm,
        cos_w=cos_w, sin_w=sin_w, omega_G=omega_G, omega_E=omega_E,
        omega_E_eff=_effective_excited(system, omega_E, d_phi, log_d),
    )


def dressed_quantities(system: SystemConfig, field: FieldConfig, t: float,
                       branch_seed: complex | None = None, sgn_zero: int = 1,
                       step: float | None = None) -> DressedQuantities:
    """All dressed quantities at a single instant.

    ``d(big_omega)/dt`` is a central difference with ``step`` (default: the
    field's finite-difference step), continuing the branch from ``t``.
    Without ``branch_seed`` the root is oriented along ``sgn(dw)``.
    """
    dw = system.detuning(field.carrier)
    sign = detuning_sign(dw, sgn_zero)
    rabi, log_d, d_phi, dtw, d_dtw = _local(system, field, t, dw)
    rad = radicand(dtw, rabi, d_dtw)
    seed = _default_seed(dw, sgn_zero, rad) if branch_seed is None else branch_seed
    bo = _nearest(cmath.sqrt(rad), seed)
    h = field.step if step is None else step
    side = []
    for s in (t - h, t + h):
        r_s, _, _, dtw_s, d_dtw_s = _local(system, field, s, dw)
        side.append(_nearest(cmath.sqrt(radicand(dtw_s, r_s, d_dtw_s)), bo))
    dbo = (side[1] - side[0]) / (2.0 * h)
    return _assemble(system, t, dw, sign, rabi, log_d, d_phi, dtw, d_dtw, bo, dbo)


@dataclass(frozen=True)
class DressedSeries:
    """Dressed quantities on a grid, stored column-wise."""

    t: np.ndarray
    dtw: np.ndarray
    d_dtw: np.ndarray
    big_omega: np.ndarray
    d_big_omega: np.ndarray
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    lambda_tilde_plus: np.ndarray
    lambda_tilde_minus: np.ndarray
    cos_w: np.ndarray
    sin_w: np.ndarray
    omega_G: np.ndarray
    omega_E: np.ndarray
    omega_E_eff: np.ndarray

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i) -> DressedQuantities:
        return DressedQuantities(**{f.name: getattr(self, f.name)[i].item()
                                    for f in fields(self)})


def _series_inputs(system, field, grid, dw):
    n = len(grid)
    rabi = np.empty(n)
    log_d = np.empty(n)
    d_phi = np.empty(n)
    dtw = np.empty(n, dtype=complex)
    d_dtw = np.empty(n, dtype=complex)
    for i, t in enumerate(grid):
        rabi[i], log_d[i], d_phi[i], dtw[i], d_dtw[i] = _local(system, field, float(t), dw)
    return rabi, log_d, d_phi, dtw, d_dtw


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 3:
        raise InputValidationError("grid must be one-dimensional with at least 3 points")
    if not np.all(np.diff(grid) > 0):
        raise InputValidationError("grid must be strictly increasing")
    return grid


def dressed_series(system: SystemConfig, field: FieldConfig, grid,
                   branch_seed: complex | None = None, sgn_zero: int = 1) -> DressedSeries:
    """Dressed quantities along ``grid`` with a branch-tracked ``big_omega``.

    ``d(big_omega)/dt`` is the second-order finite difference of the tracked
    series on the grid itself.
    """
    grid = _check_grid(grid)
    dw = system.detuning(field.carrier)
    sign = detuning_sign(dw, sgn_zero)
    rabi, log_d, d_phi, dtw, d_dtw = _series_inputs(system, field, grid, dw)
    rad0 = complex(radicand(dtw[0], rabi[0], d_dtw[0]))
    seed = _default_seed(dw, sgn_zero, rad0) if branch_seed is None else branch_seed
    bo = branch_track(dtw, rabi, d_dtw, seed=seed, times=grid)
    # Differencing relative to the first value keeps a constant series exactly stationary.
    dbo = np.gradient(bo - bo[0], grid, edge_order=2)
    rows = [_assemble(system, float(grid[i]), dw, sign, float(rabi[i]), float(log_d[i]),
                      float(d_phi[i]), complex(dtw[i]), complex(d_dtw[i]), complex(bo[i]),
                      complex(dbo[i]))
            for i in range(len(grid))]
    cols = {}
    for f in fields(DressedQuantities):
        dtype = float if f.name == "t" else complex
        cols[f.name] = np.array([getattr(r, f.name) for r in rows], dtype=dtype)
    return DressedSeries(**cols)


def lambda_minus_at(system, field, t, dw, ref: complex) -> complex:
    """Ground quasi-energy at ``t`` on the branch nearest to ``ref``."""
    rabi, _, _, dtw, d_dtw = _local(system, field, t, dw)
    bo = _nearest(cmath.sqrt(radicand(dtw, rabi, d_dtw)), ref)
    return quasi_energies(dtw, bo, rabi, d_dtw)[1]


def _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return (_adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + _adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))


def integrate_lambda_minus(system: SystemConfig, field: FieldConfig, nodes: np.ndarray,
                           big_omega: np.ndarray, lam: np.ndarray, origin: int,
                           tol: float = QUAD_TOL) -> np.ndarray:
    """Cumulative ``int_{nodes[origin]}^{t} lambda_minus dt'`` at every node.

    Each interval is integrated by adaptive Simpson; interior evaluations pick
    the branch nearest the linear interpolation of the tracked endpoint values.
    """
    dw = system.detuning(field.carrier)
    span = nodes[-1] - nodes[0]
    pieces = np.zeros(len(nodes) - 1, dtype=complex)
    for i in range(len(nodes) - 1):
        a, b = float(nodes[i]), float(nodes[i + 1])
        oa, ob = complex(big_omega[i]), complex(big_omega[i + 1])

        def f(s, a=a, b=b, oa=oa, ob=ob):
            w = (s - a) / (b - a)
            return lambda_minus_at(system, field, s, dw, (1.0 - w) * oa + w * ob)

        fa, fb = complex(lam[i]), complex(lam[i + 1])
        fm = f(0.5 * (a + b))
        whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        pieces[i] = _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol * (b - a) / span, 40)
    cum = np.concatenate([[0j], np.cumsum(pieces)])
    return cum - cum[origin]


@dataclass(frozen=True)
class Component:
    """One dressed-state component: a bare level times ``exp(exponent)``."""

    bare: str
    exponent: np.ndarray

    @property
    def coefficient(self) -> np.ndarray:
        return np.exp(self.exponent)


@dataclass(frozen=True)
class PsasComponents:
    times: np.ndarray
    G_r: Component
    G_v: Component
    E_r: Component
    E_v: Component
    ic: str

    def components(self) -> dict[str, Component]:
        return {"G_r": self.G_r, "G_v": self.G_v, "E_r": self.E_r, "E_v": self.E_v}


def psas_components(system: SystemConfig, field: FieldConfig, grid, ic: str = "ground",
                    branch_seed: complex | None = None, sgn_zero: int = 1,
                    quad_tol: float = QUAD_TOL, check_adiabatic: bool = True,
                    threshold: float = 0.1, n_max: int = 2) -> PsasComponents:
    """Real and virtual components of both dressed states on ``grid``.

    All phase integrals run from ``t = 0``.  The integral of ``lambda_minus``
    is adaptive quadrature on the branch-tracked quantity; the remaining
    pieces of the integrated frequencies have exact antiderivatives.

    For ``ic="ground"`` every component carries ``phi_g`` and never
    ``phi_e``; ``ic="excited"`` is the mirror construction in which the real
    excited component ``E_r`` starts from ``phi_e`` and the virtual
    components differ from the real ones by the optical phase.
    """
    if ic not in ("ground", "excited"):
        raise InputValidationError(f"unknown initial condition {ic!r}")
    grid = _check_grid(grid)
    if check_adiabatic:
        from .adiabaticity import adiabaticity_report

        report = adiabaticity_report(system, field, grid, n_max=min(n_max, field.n_max),
                                     threshold=threshold)
        if not report.passed:
            warnings.warn(f"adiabatic conditions violated (max ratio {report.max_ratio:.3g} "
                          f">= {threshold})", AdiabaticityWarning, stacklevel=2)

    dw = system.detuning(field.carrier)
    nodes = np.union1d(grid, [0.0])
    origin = int(np.searchsorted(nodes, 0.0))
    rabi, _, _, dtw, d_dtw = _series_inputs(system, field, nodes, dw)
    rad0 = complex(radicand(dtw[0], rabi[0], d_dtw[0]))
    seed = _default_seed(dw, sgn_zero, rad0) if branch_seed is None else branch_seed
    bo = branch_track(dtw, rabi, d_dtw, seed=seed, times=nodes)
    lam = np.array([quasi_energies(complex(dtw[i]), complex(bo[i]), float(rabi[i]),
                                   complex(d_dtw[i]))[1] for i in range(len(nodes))])
    int_lam = integrate_lambda_minus(system, field, nodes, bo, lam, origin, quad_tol)
    int_lam = int_lam[np.searchsorted(nodes, grid)]

    t = grid
    omega = field.carrier
    phi = np.array([phase_and_derivatives(field, float(s))[0] for s in t])
    phi0 = phase_and_derivatives(field, 0.0)[0]
    log_ratio = np.array([field.log_envelope_ratio(float(s), 0.0) for s in t])
    int_wG = system.omega_g * t + int_lam
    int_wE_eff = (system.omega_e * t - int_lam - (phi - phi0) - 0.5 * system.gamma_im * t
                  - 1j * (0.5 * system.gamma_re * t - log_ratio))

    if ic == "ground":
        p = system.phi_g
        x_gr = -1j * p - 1j * int_wG
        x_gv = -1j * (p + phi) - 1j * (int_wG + omega * t)
        x_er = -1j * (p + phi) - 1j * int_wE_eff
        x_ev = -1j * p - 1j * (int_wE_eff - omega * t)
    else:
        p = system.phi_e
        x_er = -1j * p - 1j * int_wE_eff
        x_ev = -1j * (p - phi) - 1j * (int_wE_eff - omega * t)
        x_gv = -1j * p - 1j * (int_wG + omega * t)
        x_gr = -1j * (p - phi) - 1j * int_wG
    return PsasComponents(
        times=t,
        G_r=Component("g", x_gr), G_v=Component("e", x_gv),
        E_r=Component("e", x_er), E_v=Component("g", x_ev),
        ic=ic,
    )


def assemble_psas(components: PsasComponents, quantities: DressedSeries):
    """Bare-basis vectors of ``|G>`` and ``|E>`` at every grid time.

    Returns two ``(N, 2)`` complex arrays whose columns are the coefficients
    on ``|g>`` and ``|e>`` (full, lab-frame amplitudes).
    """
    if len(components.times) != len(quantities.t) or not np.array_equal(components.times, quantities.t):
        raise InputValidationError("component and dressed-quantity grids differ")
    cos_w, sin_w = quantities.cos_w, quantities.sin_w
    G = np.column_stack([cos_w * components.G_r.coefficient, sin_w * components.G_v.coefficient])
    E = np.column_stack([-sin_w * components.E_v.coefficient, cos_w * components.E_r.coefficient])
    return G, E


def psas_states(system: SystemConfig, field: FieldConfig, grid, ic: str = "ground", **kwargs):
    """Convenience wrapper returning ``(G, E, series, components)``."""
    series = dressed_series(system, field, grid, kwargs.get("branch_seed"), kwargs.get("sgn_zero", 1))
    comps = psas_components(system, field, grid, ic, **kwargs)
    G, E = assemble_psas(comps, series)
    return G, E, series, comps


def fidelity(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Normalized overlap ``|<a|b>|^2 / (<a|a><b|b>)`` row by row."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    num = np.abs(np.sum(np.conj(a) * b, axis=1)) ** 2
    den = np.sum(np.abs(a) ** 2, axis=1) * np.sum(np.abs(b) ** 2, axis=1)
    return num / den


def state_from_lab(system: SystemConfig, t: float, lab: np.ndarray) -> BareState:
    """Normalized :class:`BareState` with the given full amplitudes at ``t``."""
    lab = np.asarray(lab, dtype=complex)
    lab = lab / math.sqrt(float(np.sum(np.abs(lab) ** 2)))
    pg, pe = system.bare_phases(t)
    return BareState(t=t, g_amp=complex(lab[0] * cmath.exp(1j * pg)),
                     e_amp=complex(lab[1] * cmath.exp(1j * pe)), phase_g=pg, phase_e=pe)

"""Dormand-Prince 5(4) integrator with PI step control and dense output.

Complex-valued state vectors are supported directly.  The step controller and
the continuous extension follow Hairer, Norsett & Wanner's DOPRI5: the
Gustafsson PI controller with ``beta = 0.04`` and the fourth-order dense
output built from the seven stage derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)
D1, D3, D4, D5, D6, D7 = (-12715105075 / 11282082432, 87487479700 / 32700410799,
                          -10690763975 / 1880347072, 701980252875 / 199316789632,
                          -1453857185 / 822651844, 69997945 / 29380423)

BETA = 0.04
EXPO1 = 0.2 - 0.75 * BETA
SAFE = 0.9
FAC_MIN = 0.2  # h_new >= h * FAC_MIN
FAC_MAX = 10.0  # h_new <= h * FAC_MAX


@dataclass(frozen=True)
class DenseOutput:
    """Piecewise quartic interpolant over accepted steps."""

    t_left: np.ndarray
    h: np.ndarray
    coeffs: np.ndarray  # (steps, 5, dim)

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self.t_left, t, side="right") - 1, 0, len(self.h) - 1)
        theta = ((t - self.t_left[idx]) / self.h[idx])[:, None]
        r = self.coeffs[idx]
        theta1 = 1.0 - theta
        return r[:, 0] + theta * (r[:, 1] + theta1 * (r[:, 2] + theta * (r[:, 3] + theta1 * r[:, 4])))


@dataclass(frozen=True)
class Solution:
    t: np.ndarray
    y: np.ndarray  # (len(t), dim)
    dense: DenseOutput
    n_steps: int
    n_rejected: int
    max_error_ratio: float


def _rms(v: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.abs(v) ** 2)))


def _initial_step(fun, t0, y0, f0, direction_span, rtol, atol):
    sc = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / sc)
    d1 = _rms(f0 / sc)
    h0 = 1e-6 if d0 < 1e-10 or d1 < 1e-10 else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    y1 = y0 + h0 * f0
    f1 = fun(t0 + h0, y1)
    d2 = _rms((f1 - f0) / sc) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100.0 * h0, h1, direction_span)


def integrate(fun, t0: float, y0, t1: float, t_eval, rtol: float, atol, *,
              max_steps: int = 10_000_000, on_accept=None,
              max_step: float = np.inf) -> Solution:
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t1 > t0``.

    ``atol`` may be a scalar or a per-component array.  ``t_eval`` must be
    sorted and lie inside ``[t0, t1]``; values are produced by the dense
    output.  ``on_accept(t, y)`` is called after every accepted step.  ``max_step``
    bounds the step so that narrow features of ``fun`` cannot be stepped over.
    """
    y = np.asarray(y0, dtype=complex).copy()
    t_eval = np.asarray(t_eval, dtype=float)
    atol = np.broadcast_to(np.asarray(atol, dtype=float), y.shape)
    out = np.empty((len(t_eval), y.size), dtype=complex)
    n_out = 0
    while n_out < len(t_eval) and t_eval[n_out] <= t0:
        out[n_out] = y
        n_out += 1

    t = float(t0)
    f = fun(t, y)
    h = min(_initial_step(fun, t, y, f, t1 - t0, rtol, atol), max_step)
    facold = 1e-4
    rejected = False
    n_steps = n_rejected = 0
    max_ratio = 0.0
    lefts, widths, coeffs = [], [], []

    while t < t1:
        if n_steps + n_rejected >= max_steps:
            raise IntegrationError(f"maximum number of steps ({max_steps}) exceeded", t)
        if h < 16.0 * np.finfo(float).eps * max(abs(t), 1.0):
            raise IntegrationError("step size underflow; tolerance not achievable", t)
        if t + 1.01 * h >= t1:
            h = t1 - t

        k1 = f
        k2 = fun(t + C2 * h, y + h * (A21 * k1))
        k3 = fun(t + C3 * h, y + h * (A31 * k1 + A32 * k2))
        k4 = fun(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = fun(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = fun(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y_new = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
        k7 = fun(t + h, y_new)

        err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec / sc)
        fac11 = err**EXPO1
        if err <= 1.0:
            fac = fac11 / facold**BETA
            fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFE))
            h_new = h / fac

            ydiff = y_new - y
            bspl = h * k1 - ydiff
            cont = np.stack([
                y,
                ydiff,
                bspl,
                ydiff - h * k7 - bspl,
                h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
            ])
            t_next = t1 if h == t1 - t else t + h
            lefts.append(t)
            widths.append(h)
            coeffs.append(cont)
            while n_out < len(t_eval) and t_eval[n_out] <= t_next:
                theta = (t_eval[n_out] - t) / h
                th1 = 1.0 - theta
                out[n_out] = cont[0] + theta * (cont[1] + th1 * (cont[2] + theta * (cont[3] + th1 * cont[4])))
                n_out += 1

            facold = max(err, 1e-4)
            max_ratio = max(max_ratio, err)
            n_steps += 1
            t, y, f = t_next, y_new, k7
            if on_accept is not None:
                on_accept(t, y)
            if rejected:
                h_new = min(h_new, h)
            rejected = False
            h = min(h_new, max_step)
        else:
            h = h / min(1.0 / FAC_MIN, fac11 / SAFE)
            rejected = True
            n_rejected += 1

    dense = DenseOutput(np.asarray(lefts), np.asarray(widths), np.asarray(coeffs))
    return Solution(t_eval, out, dense, n_steps, n_rejected, max_ratio)

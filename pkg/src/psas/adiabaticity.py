"""Generalized adiabatic conditions.

For derivative order ``n`` and split ``k`` the ratio is

    r(n, k, t) = |d^n/dt^n (dphi/dt - i Omega^-1 dOmega/dt)|
                 / (|dw - i gamma_e / 2|^(n+1-k) * |Omega|^k)

and the approximation is trusted when every ratio stays below a threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputValidationError
from .field import FieldConfig, nonadiabatic_derivative, rabi_and_log_derivative
from .system import SystemConfig

DEFAULT_THRESHOLD = 0.1
DEFAULT_N_MAX = 2


@dataclass(frozen=True)
class AdiabaticityReport:
    """Ratio table ``ratios[n, k, i]``; entries with ``k > n + 1`` are NaN."""

    grid: np.ndarray
    ratios: np.ndarray
    max_ratio: float
    worst: tuple[int, int, float]
    threshold: float
    n_max: int

    @property
    def passed(self) -> bool:
        return self.max_ratio < self.threshold

    def ratio(self, n: int, k: int) -> np.ndarray:
        if not (0 <= n <= self.n_max and 0 <= k <= n + 1):
            raise InputValidationError(f"no ratio for n={n}, k={k}")
        return self.ratios[n, k]

    def to_dict(self) -> dict:
        table = {}
        for n in range(self.n_max + 1):
            for k in range(n + 2):
                table[f"n{n}_k{k}"] = self.ratios[n, k].tolist()
        return {
            "threshold": self.threshold,
            "n_max": self.n_max,
            "max_ratio": self.max_ratio,
            "pass": self.passed,
            "worst": {"n": self.worst[0], "k": self.worst[1], "t": self.worst[2]},
            "grid": self.grid.tolist(),
            "ratios": table,
        }


def detuning_scale(system: SystemConfig, carrier: float) -> float:
    """``|dw - i gamma_e / 2|`` with the complex rate ``gamma_e``."""
    return abs(system.detuning(carrier) - 0.5j * system.gamma_e)


def adiabaticity_report(system: SystemConfig, field: FieldConfig, grid, n_max: int = DEFAULT_N_MAX,
                        threshold: float = DEFAULT_THRESHOLD) -> AdiabaticityReport:
    """Evaluate all ratios for ``n <= n_max``, ``k <= n + 1`` on ``grid``.

    Where the envelope is below its floor the ``k > 0`` entries are set to
    ``+inf`` (violated); the ``k = 0`` entry still uses the closed-form
    numerator.  A zero numerator gives a zero ratio even if a denominator
    vanishes.
    """
    if threshold <= 0 or not math.isfinite(threshold):
        raise ConfigurationError("threshold must be a positive finite number")
    if not 0 <= n_max <= field.n_max:
        raise ConfigurationError(f"n_max={n_max} outside [0, {field.n_max}]")
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.ndim != 1 or len(grid) == 0 or not np.all(np.isfinite(grid)):
        raise InputValidationError("grid must be a non-empty finite 1-d array")

    scale = detuning_scale(system, field.carrier)
    ratios = np.full((n_max + 1, n_max + 2, len(grid)), np.nan)
    for i, t in enumerate(grid):
        t = float(t)
        below = field.below_floor(t)
        rabi = 0.0 if below else rabi_and_log_derivative(field, t)[0]
        for n in range(n_max + 1):
            num = abs(nonadiabatic_derivative(field, n, t, check_floor=False).value)
            for k in range(n + 2):
                if k > 0 and below:
                    ratios[n, k, i] = math.inf
                elif num == 0.0:
                    ratios[n, k, i] = 0.0
                else:
                    with np.errstate(divide="ignore"):
                        den = scale ** (n + 1 - k) * rabi**k
                    ratios[n, k, i] = num / den if den > 0 else math.inf

    flat = np.where(np.isnan(ratios), -1.0, ratios)
    n, k, i = np.unravel_index(int(np.argmax(flat)), flat.shape)
    return AdiabaticityReport(grid=grid, ratios=ratios, max_ratio=float(flat[n, k, i]),
                              worst=(int(n), int(k), float(grid[i])), threshold=threshold,
                              n_max=n_max)

"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class PsasError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(PsasError, ValueError):
    """Invalid or unsupported configuration value."""


class InputValidationError(PsasError, ValueError):
    """A call-site input breaks a documented precondition."""


class NumericalError(PsasError, ArithmeticError):
    """Base class for failures of the numerical machinery itself."""

    def __reduce__(self):
        # Subclasses format their message in __init__; rebuild from the raw
        # arguments so errors survive pickling across worker processes.
        init = getattr(self, "_init_args", None)
        return (type(self), init) if init is not None else super().__reduce__()


class UndefinedRegionError(NumericalError):
    """The envelope drops below its floor where a log-derivative is needed.

    ``interval`` is the (t_lo, t_hi) window that was probed.
    """

    def __init__(self, message: str, interval: tuple[float, float]):
        super().__init__(f"{message} on [{interval[0]:.17g}, {interval[1]:.17g}]")
        self.interval = interval
        self._init_args = (message, interval)


class DegeneratePointError(NumericalError):
    """The off-resonance Rabi frequency vanishes, so the weights are singular."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t:.17g}")
        self.t = t
        self._init_args = (message, t)


class BranchAmbiguityError(NumericalError):
    """Square-root continuation cannot decide between the two branches."""

    def __init__(self, message: str, index: int, t: float | None = None):
        where = f"grid index {index}" if t is None else f"t={t:.17g} (grid index {index})"
        super().__init__(f"{message} at {where}; refine the grid")
        self.index = index
        self.t = t
        self._init_args = (message, index, t)


class IntegrationError(NumericalError):
    """The adaptive integrator could not reach the requested end time."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(f"{message} (reached t={t_reached:.17g})")
        self.t_reached = t_reached
        self._init_args = (message, t_reached)


class UndefinedPhaseError(NumericalError):
    """An overlap whose modulus is too small to define an argument."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t:.17g}")
        self.t = t
        self._init_args = (message, t)

"""Phase-sensitive adiabatic states of a driven, damped two-level system."""

__version__ = "0.1.0"

from .adiabaticity import AdiabaticityReport, adiabaticity_report
from .dressed import (AdiabaticityWarning, DressedQuantities, DressedSeries, PsasComponents,
                      assemble_psas, branch_track, dressed_quantities, dressed_series, fidelity,
                      psas_components, psas_states)
from .errors import (BranchAmbiguityError, ConfigurationError, DegeneratePointError,
                     InputValidationError, IntegrationError, NumericalError, PsasError,
                     UndefinedPhaseError, UndefinedRegionError)
from .field import FieldConfig, FieldSample, TwoPulseTrain, eval_field, nonadiabatic_derivative
from .interferometry import (Interferogram, SecondPulse, Wavepacket, acquired_phase, fringe_scan,
                             ramsey_crosscheck, superpose, two_packet_population)
from .phases import MptReport, PhaseRecord, dynamical_phase, geometric_phase, mpt_check, total_phase
from .propagator import Trajectory, bare_populations, propagate, propagate_second_order
from .system import BareState, SystemConfig, initial_state

__all__ = [
    "AdiabaticityReport", "AdiabaticityWarning", "BareState", "BranchAmbiguityError",
    "ConfigurationError", "DegeneratePointError", "DressedQuantities", "DressedSeries",
    "FieldConfig", "FieldSample", "InputValidationError", "IntegrationError", "Interferogram",
    "MptReport", "NumericalError", "PhaseRecord", "PsasComponents", "PsasError", "SecondPulse",
    "SystemConfig", "Trajectory", "TwoPulseTrain", "UndefinedPhaseError", "UndefinedRegionError",
    "Wavepacket", "acquired_phase", "adiabaticity_report", "assemble_psas", "bare_populations",
    "branch_track", "dressed_quantities", "dressed_series", "dynamical_phase", "eval_field",
    "fidelity", "fringe_scan", "geometric_phase", "initial_state", "mpt_check",
    "nonadiabatic_derivative", "propagate", "propagate_second_order", "psas_components",
    "psas_states", "ramsey_crosscheck", "superpose", "total_phase", "two_packet_population",
]

"""Solitary waves of the Soler model in the nonrelativistic limit.

Ground states and linearizations of the limiting NLS, Dirac solitary waves
and their spectra, characteristic roots of holomorphic matrix families and
weighted free resolvents.
"""

from .errors import (ConfigurationError, DomainError, InconclusiveError, InputError,
                     SolerError, SolverError)
from .ground_state import closed_form_1d, solve_ground_state
from .soliton import Nonlinearity, charge, charge_curve, solve_soliton

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "DomainError", "InconclusiveError", "InputError",
    "SolerError", "SolverError", "Nonlinearity", "charge", "charge_curve",
    "closed_form_1d", "solve_ground_state", "solve_soliton", "__version__",
]

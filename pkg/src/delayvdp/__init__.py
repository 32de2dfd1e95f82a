"""Simulation and canard analysis of the delayed van der Pol system.

    x' = x - x**3/3 + y + J (x - x(t - tau))
    y' = eps (a - x)
"""

__version__ = "0.1.0"

from .dde_core import HistorySpec, Trajectory, VdpParams, equilibrium, simulate, simulate_fast
from .errors import (
    BlowUpError,
    BracketError,
    ConvergenceError,
    DelayVdpError,
    DomainError,
    InsufficientDataError,
    RegimeError,
    StepSizeError,
)

__all__ = [
    "__version__",
    "VdpParams",
    "HistorySpec",
    "Trajectory",
    "simulate",
    "simulate_fast",
    "equilibrium",
    "DelayVdpError",
    "DomainError",
    "ConvergenceError",
    "RegimeError",
    "StepSizeError",
    "BlowUpError",
    "BracketError",
    "InsufficientDataError",
]

"""Rank-one convexity diagnostics for logarithmic strain measures and Hencky-type energies."""
__version__ = "0.1.0"

from . import counterexample_factory, energy_models, strain_measures, tensor_core
from . import convexity_lab
from .errors import (
    DegenerateDirectionError,
    DistortionUndefinedError,
    DomainError,
    ElliptikaError,
    IntervalError,
    InvalidInputError,
    NotSPDError,
    NotStressFreeError,
    NumericalError,
    OrientationError,
    OverflowGuardError,
)

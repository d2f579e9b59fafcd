"""Nonlinear acoustics of a polytropic gas in layered and quasi-periodic entropy fields.

The package bundles a WENO finite-volume solver for the Euler equations and
the variable-coefficient p-system, a Fourier pseudospectral solver for the
primitive Euler equations and for the homogenized dispersive model,
solitary traveling-wave construction, and entropy and stability diagnostics.
"""

from .eos import GasEOS, sonic_speed
from .errors import (AmbiguousMeasurement, ConstructionFailure, ConvergenceFailure, DomainError,
                     InvalidArgument, LayeredGasError, NoSaddleError, SolverAbort)
from .medium import (CoordinateMap, HomogCoeffs, MediumProfile, RandomProfileParams, fluct,
                     fluct_antideriv, homog_coeffs, mass_coordinate_map, mean, random_profile, sample_K)
from .records import FieldState, RunRecord

__version__ = "0.1.0"

__all__ = [
    "AmbiguousMeasurement", "ConstructionFailure", "ConvergenceFailure", "CoordinateMap", "DomainError",
    "FieldState", "GasEOS", "HomogCoeffs", "InvalidArgument", "LayeredGasError", "MediumProfile",
    "NoSaddleError", "RandomProfileParams", "RunRecord", "SolverAbort", "fluct", "fluct_antideriv",
    "homog_coeffs", "mass_coordinate_map", "mean", "random_profile", "sample_K", "sonic_speed",
]

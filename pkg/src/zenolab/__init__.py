"""Exact survival probability of a decaying two-level atom coupled to the field.

The excited level ``a`` (in units of the form-factor cutoff) decays through a
single channel with reduced form factor ``x / (1 + x^2)^4``.  The survival
amplitude is split into the second-sheet decay pole and the branch-cut
remainder, and three brute-force oracles cross-check the split.
"""
from .errors import ConvergenceError, DomainError
from .model import (
    CODATA,
    CORRECTED_ZENO_FACTOR,
    AtomParams,
    PhysicalConstants,
    custom_params,
    form_factor_squared,
    hydrogen_params,
    zeno_time,
)
from .oracle import (
    DiscretizedModel,
    Eigendata,
    ResolutionWarning,
    bromwich_inverse,
    diagonalize,
    discretized_evolution,
    spectral_inverse,
)
from .resolvent import (
    BackgroundPole,
    PoleData,
    background_poles,
    find_pole,
    perturbative_pole,
    principal_value,
    resolvent_value,
    spectral_density,
    spectral_moments,
)
from .selfenergy import (
    QBAR_AT_ZERO,
    Sheet,
    SheetPoint,
    discontinuity,
    qbar,
    qbar_cut_edge,
    qbar_derivative,
    qbar_quadrature,
)
from .survival import (
    DEFAULT_SPEC,
    Crossover,
    CutQuadratureSpec,
    SurvivalSample,
    approx_long,
    approx_short,
    crossover_time,
    survival_point,
    tail_constant,
    timeseries,
    y_cut_term,
    y_pole_term,
)

__version__ = "0.1.0"

__all__ = [
    "AtomParams", "BackgroundPole", "CODATA", "CORRECTED_ZENO_FACTOR", "ConvergenceError",
    "Crossover", "CutQuadratureSpec", "DEFAULT_SPEC", "DiscretizedModel", "DomainError",
    "Eigendata", "PhysicalConstants", "PoleData", "QBAR_AT_ZERO", "ResolutionWarning", "Sheet",
    "SheetPoint", "SurvivalSample", "approx_long", "approx_short", "background_poles",
    "bromwich_inverse", "crossover_time", "custom_params", "diagonalize", "discontinuity",
    "discretized_evolution", "find_pole", "form_factor_squared", "hydrogen_params",
    "perturbative_pole", "principal_value", "qbar", "qbar_cut_edge", "qbar_derivative",
    "qbar_quadrature", "resolvent_value", "spectral_density", "spectral_inverse",
    "spectral_moments", "survival_point", "tail_constant", "timeseries", "y_cut_term",
    "y_pole_term", "zeno_time",
]

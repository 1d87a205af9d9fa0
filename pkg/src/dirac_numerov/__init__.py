"""Relativistic hydrogen-like bound states in D spatial dimensions.

Numerical ground-state solver for the radial Dirac problem under two Coulomb
continuations (1/r and the Gauss-law 1/r^(D-2)), built on a fourth-order
three-term recurrence with match-point shooting, plus the closed-form 1/r
reference results used to validate it.
"""

from .analytic import AnalyticLevel, analytic_energy, analytic_ground_wavefunction_d3, hyp1f1
from .coefficients import (
    CanonicalForm,
    CoefficientSet,
    build_coefficients,
    canonical_weight,
    coefficient_set,
    coefficient_set_ansatz1,
    coupling_xi,
    potential_energy,
)
from .core import (
    Ansatz,
    DimensionlessState,
    EigenResult,
    ELECTRON_MASS_EV,
    FINE_STRUCTURE_CONSTANT,
    KSign,
    PhysicalConfig,
    RadialGrid,
    WaveSolution,
    dimensionless_state,
    discrete_l2_norm,
    k_value,
    reconstruct_fg,
    rho_of_r,
)
from .manifest import RunManifest, TOOL_VERSION
from .numerov import (
    Direction,
    PropagationResult,
    Scheme,
    canonical_step,
    generalized_step,
    propagate,
    scheme_report,
)
from .solver import (
    NO_TURNING_POINT,
    NoTurningPoint,
    SolverSettings,
    dimension_scan,
    eigenfunction,
    find_match_point,
    mismatch,
    mismatch_scan,
    solve_ground_state,
)

__version__ = TOOL_VERSION

__all__ = [
    "AnalyticLevel",
    "Ansatz",
    "CanonicalForm",
    "CoefficientSet",
    "DimensionlessState",
    "Direction",
    "EigenResult",
    "ELECTRON_MASS_EV",
    "FINE_STRUCTURE_CONSTANT",
    "KSign",
    "NO_TURNING_POINT",
    "NoTurningPoint",
    "PhysicalConfig",
    "PropagationResult",
    "RadialGrid",
    "RunManifest",
    "Scheme",
    "SolverSettings",
    "TOOL_VERSION",
    "WaveSolution",
    "analytic_energy",
    "analytic_ground_wavefunction_d3",
    "build_coefficients",
    "canonical_step",
    "canonical_weight",
    "coefficient_set",
    "coefficient_set_ansatz1",
    "coupling_xi",
    "dimension_scan",
    "dimensionless_state",
    "discrete_l2_norm",
    "eigenfunction",
    "find_match_point",
    "generalized_step",
    "hyp1f1",
    "k_value",
    "mismatch",
    "mismatch_scan",
    "potential_energy",
    "propagate",
    "reconstruct_fg",
    "rho_of_r",
    "scheme_report",
    "solve_ground_state",
]

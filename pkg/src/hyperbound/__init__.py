"""Bound states of hyperbolic short-range potentials.

The Hamiltonian ``-d^2/dx^2 + V(x)`` with

    V(x) = sum_m f_m / cosh^m x + sinh x * sum_n g_n / cosh^n x

is expanded in kets ``sinh^{1-q} x / cosh^{kappa+k} x``.  In that basis
``H + kappa^2`` is lower triangular, so both half-line solutions follow
from a block two-term recurrence; bound states are the energies at which
the two can be matched smoothly at the origin.
"""
from ._errors import (
    ExtrapolationUnstable,
    GridTooSmall,
    HyperboundError,
    LevelMissing,
    NoNullVector,
    NoRoots,
    NotTriangular,
    SingularBlock,
    SlowConvergence,
    UnsupportedTerm,
    ZeroDenominator,
)
from .basis import (
    BasisIndex,
    BasisParams,
    eval_basis,
    eval_basis_derivative,
    eval_basis_second_derivative,
    mu_index,
)
from .matching import (
    MatchComponents,
    MatchConfig,
    MatchResult,
    assemble_wavefunction,
    components_at,
    find_spectrum,
    secular_determinant,
)
from .oracle import GridConfig, numerov_eigenfunction, numerov_spectrum
from .potential import (
    PotentialSpec,
    evaluate_potential,
    parity_split,
    phat_conjugate,
    taylor_coefficients,
)
from .qbuilder import ActionTerm, QMatrix, apply_term, build_q, partition_dimension
from .series import (
    CoefficientStream,
    SeriesSolution,
    TerminationPoint,
    detect_termination,
    evaluate_solution,
    initialize_F0,
    next_coefficient,
    tail_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "ActionTerm",
    "BasisIndex",
    "BasisParams",
    "CoefficientStream",
    "ExtrapolationUnstable",
    "GridConfig",
    "GridTooSmall",
    "HyperboundError",
    "LevelMissing",
    "MatchComponents",
    "MatchConfig",
    "MatchResult",
    "NoNullVector",
    "NoRoots",
    "NotTriangular",
    "PotentialSpec",
    "QMatrix",
    "SeriesSolution",
    "SingularBlock",
    "SlowConvergence",
    "TerminationPoint",
    "UnsupportedTerm",
    "ZeroDenominator",
    "apply_term",
    "assemble_wavefunction",
    "build_q",
    "components_at",
    "detect_termination",
    "eval_basis",
    "eval_basis_derivative",
    "eval_basis_second_derivative",
    "evaluate_potential",
    "evaluate_solution",
    "find_spectrum",
    "initialize_F0",
    "mu_index",
    "next_coefficient",
    "numerov_eigenfunction",
    "numerov_spectrum",
    "parity_split",
    "partition_dimension",
    "phat_conjugate",
    "secular_determinant",
    "tail_ratio",
    "taylor_coefficients",
]

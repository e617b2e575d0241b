"""Quantum relative-entropy asymmetry and numerical checks of its upper bound."""

__version__ = "0.1.0"

from .errors import (
    DimensionMismatchError,
    DomainError,
    EigensolverError,
    InfiniteAsymmetryError,
    InvalidStateError,
    NotHermitianError,
    PreconditionError,
    RejectionBudgetError,
    RelasymError,
    SingularLogError,
)
from .spectral import (
    DEFAULT_TOLERANCES,
    DensityMatrix,
    HermitianMatrix,
    SpectralDecomposition,
    ToleranceProfile,
    eig_hermitian,
    matrix_function,
    matrix_log,
    min_eigenvalue,
    read_matrix,
    trace_distance,
    write_matrix,
)
from .scalar import asym_a, asym_a_difference, asym_taylor, check_domain, s2
from .divergences import DivergenceResult, asymmetry, j_divergence, relative_entropy
from .frechet import (
    DEFAULT_RULE,
    Perturbation,
    QuadratureRule,
    matrix_log_quadrature,
    r_form,
    r_op_quadrature,
    t_op_quadrature,
    t_op_spectral,
)
from .bounds import (
    BoundReport,
    ChainReport,
    corollary_bound,
    proof_chain_check,
    proposition_check,
    theorem_bound,
    trace_cap_check,
)
from .extremal import (
    EnsembleSpec,
    commuting_orbit_max,
    orbit_gradient,
    orbit_objective,
    random_density,
    random_perturbation,
    saturating_pair,
    unitary_ascent,
)

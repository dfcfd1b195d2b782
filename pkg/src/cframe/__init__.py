"""Frame maps into the module A^n over a matrix C*-algebra A.

The coefficient algebra is M_k(C) or its diagonal subalgebra, the module is
A^n, and frame maps are polynomial in the parameter or sampled on atoms.
Frame bounds, frame operators, canonical duals and dual-pair identities are
computed exactly over the rationals when the data allow it and in floating
point otherwise.
"""

__version__ = "0.1.0"

from .cstar import (
    DEFAULT_TOLERANCES,
    AlgebraDescriptor,
    AlgebraElement,
    Spectrum,
    ToleranceConfig,
    adjoint,
    hermitian_eigenvalues,
    invert,
    is_positive,
    multiply,
    operator_norm,
    order_leq,
)
from .duality import (
    DualReport,
    canonical_dual,
    cross_moment_matrix,
    is_dual_pair,
    nonvanishing_check,
    riesz_type_check,
)
from .errors import (
    CFrameError,
    ConfigError,
    DimensionError,
    DomainError,
    GridMismatchError,
    ModeError,
    NotAFrameError,
    NumericError,
    ParameterError,
    SingularityError,
)
from .frames import (
    FrameReport,
    bound_witness,
    classify,
    exactness_check,
    frame_operator,
    moment_matrix,
    norm_criterion,
    optimal_bounds,
    transform_frame,
    verify_operator_identities,
)
from .hilbert import (
    ModuleDescriptor,
    ModuleElement,
    ModuleOperator,
    apply_operator,
    compose,
    flatten,
    inner_product,
    module_norm,
    operator_adjoint,
    operator_invert,
    operator_spectral,
)
from .measure import (
    AtomicMeasure,
    IntervalMeasure,
    L2Element,
    PolynomialFrame,
    SampledFrame,
    bochner_integrate,
    discretize,
    l2_inner,
    refinement_check,
)

__all__ = [
    "adjoint",
    "AlgebraDescriptor",
    "AlgebraElement",
    "apply_operator",
    "AtomicMeasure",
    "bochner_integrate",
    "bound_witness",
    "canonical_dual",
    "CFrameError",
    "classify",
    "compose",
    "ConfigError",
    "cross_moment_matrix",
    "DEFAULT_TOLERANCES",
    "DimensionError",
    "discretize",
    "DomainError",
    "DualReport",
    "exactness_check",
    "flatten",
    "frame_operator",
    "FrameReport",
    "GridMismatchError",
    "hermitian_eigenvalues",
    "inner_product",
    "IntervalMeasure",
    "invert",
    "is_dual_pair",
    "is_positive",
    "l2_inner",
    "L2Element",
    "ModeError",
    "module_norm",
    "ModuleDescriptor",
    "ModuleElement",
    "ModuleOperator",
    "moment_matrix",
    "multiply",
    "nonvanishing_check",
    "norm_criterion",
    "NotAFrameError",
    "NumericError",
    "operator_adjoint",
    "operator_invert",
    "operator_norm",
    "operator_spectral",
    "optimal_bounds",
    "order_leq",
    "ParameterError",
    "PolynomialFrame",
    "refinement_check",
    "riesz_type_check",
    "SampledFrame",
    "SingularityError",
    "Spectrum",
    "ToleranceConfig",
    "transform_frame",
    "verify_operator_identities",
]

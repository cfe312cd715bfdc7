"""Space-localized orthonormal bases for band-limited functions on the sphere."""

from .approximation import (
    EigenvalueWindow,
    Interval,
    SpectralSummary,
    chebyshev_bound,
    coefficient_variance,
    filter_coeffs,
    localization_variance,
    markov_bound,
    moment_deviation_bound,
)
from .errors import FormatError, NumericError
from .jacobi_blocks import (
    EigenBlock,
    JacobiBlock,
    band_eigenblocks,
    build_block,
    eigendecompose,
)
from .sphere_basis import (
    BandParams,
    HarmonicCoeffs,
    LocalizedCoeffs,
    SphereGrid,
    embed_block,
    eval_basis_function,
    eval_harmonic,
    evaluate_basis_on_grid,
    evaluate_on_grid,
    load_coeffs,
    mean_value,
    mean_value_quadrature,
    radial_table,
    save_coeffs,
)
from .transform import (
    OpCounter,
    TransformPlan,
    analyze,
    analyze_fast,
    dense_op_count,
    load_plan,
    save_plan,
    synthesize,
)
from .ultraspherical import (
    UltrasphericalFamily,
    chebyshev_connection,
    christoffel_darboux_closed,
    christoffel_darboux_sum,
    recurrence_coefficient,
)

__version__ = "0.1.0"

__all__ = [
    "BandParams",
    "EigenBlock",
    "EigenvalueWindow",
    "FormatError",
    "HarmonicCoeffs",
    "Interval",
    "JacobiBlock",
    "LocalizedCoeffs",
    "NumericError",
    "OpCounter",
    "SpectralSummary",
    "SphereGrid",
    "TransformPlan",
    "UltrasphericalFamily",
    "analyze",
    "analyze_fast",
    "band_eigenblocks",
    "build_block",
    "chebyshev_bound",
    "chebyshev_connection",
    "christoffel_darboux_closed",
    "christoffel_darboux_sum",
    "coefficient_variance",
    "dense_op_count",
    "eigendecompose",
    "embed_block",
    "eval_basis_function",
    "eval_harmonic",
    "evaluate_basis_on_grid",
    "evaluate_on_grid",
    "filter_coeffs",
    "load_coeffs",
    "load_plan",
    "localization_variance",
    "markov_bound",
    "mean_value",
    "mean_value_quadrature",
    "moment_deviation_bound",
    "radial_table",
    "recurrence_coefficient",
    "save_coeffs",
    "save_plan",
    "synthesize",
]

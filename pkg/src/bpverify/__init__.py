"""Numerical integral geometry: Blaschke-Petkantschin measures, samplers and
Monte-Carlo / quadrature verification of the associated identities."""

__version__ = "0.1.0"

from .constants import (  # noqa: E402
    bp_affine_constant,
    bp_constant,
    siegel_gamma,
    siegel_gamma_integral_check,
    stiefel_volume,
)
from .errors import (  # noqa: E402
    BPVerifyError,
    InvalidArgumentError,
    OutOfDomainError,
    SingularConfigurationError,
    UnsupportedConfigurationError,
    UnsupportedOracleError,
)
from .functions import (  # noqa: E402
    BallIndicator,
    Gaussian,
    MultiPointFunction,
    ScaledShift,
    drury_lhs_closed,
    full_integral,
    radon_k_closed,
)
from .linalg import (  # noqa: E402
    AffinePlane,
    Subspace,
    gram_volume,
    orthogonal_complement,
    orthonormalize,
    polar_decompose,
    simplex_volume,
)
from .montecarlo import McEstimate  # noqa: E402
from .quadrature import quadrature_oracle  # noqa: E402
from .sampling import (  # noqa: E402
    RngStream,
    plane_through_points,
    sample_affine_plane,
    sample_gaussian_matrix,
    sample_grassmann,
    sample_point_in_subspace,
    sample_stiefel,
)
from .verify import (  # noqa: E402
    VerificationReport,
    riesz_functional,
    verify_affine_bp,
    verify_affine_dual,
    verify_bp,
    verify_bp_dual,
    verify_drury,
    verify_multilinear,
    verify_polar,
    verify_riesz,
)

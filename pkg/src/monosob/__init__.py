"""Sharp constants, closed-form integrals and extremal checks for monomial weights x^A."""

__version__ = "0.1.0"

from .errors import (
    DivergenceError,
    DomainError,
    QuadratureAccuracyError,
    SingularPointError,
    UnsupportedDimensionError,
)
from .special import BallGeometry, Weight, ball_geometry, gamma, log_gamma, pi_A, stirling_gamma
from .constants import (
    asymptotic_limit,
    asymptotic_term,
    constants_table,
    critical_exponent,
    refined_C_q,
    refined_C_q_limit,
    shannon_c_A,
    sobolev_c1,
    sobolev_constant,
    sobolev_cp,
    tm_alpha_D,
    trace_constants,
    whole_space_K,
)
from .funcspace import (
    Bump,
    CauchyProfile,
    ExpPower,
    Gaussian,
    Indicator,
    Mixture,
    RadialProfile,
    Scaled,
    SobolevExtremal,
    TensorProduct,
    TestFunction,
    build_function,
    normalized_gaussian,
    phi_alpha,
    tensorize,
    trace_slice,
)
from .quad import DEFAULT_SPEC, Ball, Box, Functionals, QuadratureSpec, functionals_of, integrate_cubature, integrate_radial
from .checkers import CHECKERS, InequalityReport, run_check, tensor_consistency
from .explorer import SweepResult, asymptotic_scan, deficit_profile, fuzz, pmean_limit, shannon_lambda_opt

"""Heat kernels, Green function and distance of the sub-Laplacian on CR spheres S^{2n+1}."""

from .errors import (
    ConvergenceError,
    CRSphereError,
    DomainError,
    QuadratureError,
    RegimeError,
    RootFindingError,
    SingularityError,
    TruncationError,
)
from .geodesy import (
    AsymCoefficients,
    GeodesicData,
    asym_coefficients,
    asym_cut_locus,
    asym_diag,
    asym_interior,
    distance,
    extrapolate_exponent,
    small_time_kernel,
    solve_phi,
)
from .green import LaplaceQuery, green_conformal, laplace_lhs, laplace_rhs
from .numerics import QuadratureSpec, compensated_sum, fd_derivative, find_root, integrate
from .operators import (
    RadialGrid,
    apply_delta_r,
    apply_L_tilde,
    green_residual,
    heat_residual,
    mu_integral,
)
from .riemannian import RiemannKernelQuery, Truncation, q_small_time, q_spectral, q_theta
from .special import (
    GegenbauerParams,
    JacobiParams,
    cosh_power_integral,
    double_factorial,
    gegenbauer,
    jacobi,
    jacobi_norm,
)
from .subriemannian import CylCoord, KernelValue, p_integral, p_spectral, p_uniform_limit

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

"""Numerical reconstruction of the cohomogeneity-one nearly Kähler halves on
the sine-cone desingularizations, and the associated spectral shooting
problem whose eigenvalue count bounds the Hitchin index of the inhomogeneous
structure on S^3 x S^3.

Library layout, one module per subsystem:

* `mink_core` - R^{1,2} frame algebra, the background evolution equations,
  conserved quantities and the maximal-volume-orbit slope.
* `ode_engine` - adaptive RK5(4) with dense output and event location, the
  frozen-coefficient spectrum of singular matrices, and the validated
  series-launch protocol.
* `nk_background` - Taylor data for the two half families, the symbolic
  consistency sweep, half integration, the beta curve and the b* search.
* `hitchin_eigen` - eigen launch, constrained co-integration, shooting in
  the spectral parameter, sign portraits and index bounds.
* `oracles` - closed-form solution curves, Euler-Lagrange cross-checks, the
  sine-cone spectral scan.
* `cli` - batch commands with JSON run manifests and CSV trajectory output.
"""

__version__ = "0.1.0"

from .errors import (
    ComplexSpectrum,
    NkError,
    NoEventFound,
    NonPositiveMuSq,
    NoSignChange,
    NuOutOfRange,
    RhsDomainError,
    StepSizeUnderflow,
    ValidationFailed,
)
from .mink_core import (
    BackgroundState,
    ConservedQuadruple,
    DerivedFrame,
    MinkowskiVec3,
    conserved,
    derived_frame,
    minkowski_inner,
    nk_rhs,
    volume_slope,
    w_ode_residual,
)
from .ode_engine import (
    LaunchCertificate,
    SingularSpectrum,
    Trajectory,
    frozen_singular_spectrum,
    integrate,
    singular_launch,
)
from .nk_background import (
    HalfFamily,
    HalfSolution,
    beta_point,
    classify_background_doubling,
    find_bstar,
    integrate_half,
    taylor_consistency_check,
    taylor_psi_a,
    taylor_psi_b,
)
from .hitchin_eigen import (
    EigenState,
    ShootReport,
    classify_matching,
    constraint_residuals,
    eigen_launch,
    eigen_rhs,
    find_lambda_star,
    index_bounds,
    shoot,
    sign_portrait,
)
from .oracles import (
    HOMOGENEOUS_S3S3,
    SINE_CONE,
    OracleCurve,
    aux_identity_check,
    el_residuals,
    homogeneous_s3s3_state,
    legendre_scan,
    residual_scan,
    sine_cone_state,
)

__all__ = [name for name in dir() if not name.startswith("_")]

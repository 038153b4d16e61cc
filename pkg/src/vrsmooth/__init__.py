"""Variance-reduced local linear smoothing toolkit."""

from .bandwidth import (
    LocalOracle,
    adjust_h,
    amse,
    gamma_a,
    gamma_q,
    h0_global,
    h0_local,
    variance_factor,
)
from .combine import (
    BOUNDARY_REACH,
    R_OPTIMAL,
    CombinerSpec,
    GridOffsets,
    boundary_delta,
    coeffs_a,
    coeffs_b,
    grid_offsets,
    resolve_variant,
)
from .errors import (
    ConfigError,
    DegenerateCurvatureError,
    EmptyWindowError,
    SingularDesignError,
    SingularRatioError,
    VRSmoothError,
)
from .estimators import (
    VREstimate,
    effective_delta,
    estimate_curve,
    fit_curve,
    m_tilde_a,
    m_tilde_pm,
    m_tilde_q,
)
from .inference import (
    CoveragePrediction,
    IntervalResult,
    coverage_prediction,
    coverage_ratio,
    interval,
    ratio_brackets,
    sign_conditions_hold,
    z_quantile,
)
from .kernels import (
    EPANECHNIKOV,
    KERNELS,
    NORMAL,
    UNIFORM,
    Kernel,
    KernelFunctionals,
    c_delta,
    c_delta_quadform,
    d_delta,
    functionals,
    get_kernel,
    make_kernel,
    nu_moment,
    nu_tilde,
    overlap_c,
    tau,
)
from .scenarios import DESIGNS, REGRESSIONS, Design, Regression, Scenario, get_scenario, sample
from .simulate import (
    EstimatorSpec,
    SimConfig,
    SimReport,
    SimRow,
    coverage_study,
    default_bandwidth_grid,
    efficiency_table,
    pointwise_variance_study,
    rep_rng,
    run_study,
)
from .smoother import (
    Dataset,
    SmootherConfig,
    local_linear,
    local_linear_curve,
    sigma_hat_sq,
    w_ijk,
    weighted_sums,
)

__version__ = "0.1.0"

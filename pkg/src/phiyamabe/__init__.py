"""Curvature-normalized Yamabe flow on fibered-boundary model manifolds."""

from .geometry import (
    ModelPhiManifold,
    RadialGrid,
    PhiPoint,
    build_manifold,
    scal_phi,
    build_grid,
    laplacian_phi,
    phi_distance,
)
from .conformal import (
    ConformalFactor,
    ScalField,
    scal_conformal,
    conformal_laplacian,
    yamabe_residual,
)
from .flow import (
    VARIANTS,
    FlowError,
    PositivityLost,
    StabilityViolation,
    InsufficientSnapshots,
    GapUnderflow,
    FlowConfig,
    FlowState,
    FlowTrace,
    ConvergenceReport,
    rhs,
    cfl_bound,
    step,
    run_flow,
    apriori_bounds,
    evolve_scal_check,
    fit_gap_rate,
    detect_convergence,
)
from .rescale import (
    ReparamMap,
    NonmonotoneF,
    OutOfRange,
    InsufficientSamples,
    build_reparam,
    apply_reparam,
    verify_cyf,
)
from .holder import (
    HolderParams,
    SampledField,
    holder_seminorm,
    local_holder_seminorm,
    weighted_sup_norm,
)
from .checks import SuiteResult, run_identity_suites, conformal_laplacian_oracle
from .traceio import (
    write_trace_csv,
    read_trace_csv,
    write_snapshots_json,
    write_trace_svg,
)

__version__ = "0.1.0"

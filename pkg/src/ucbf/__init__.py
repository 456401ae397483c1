"""Adaptive safety filters for control-affine systems with unmatched
parametric uncertainty: barrier certificates, online adaptation-gain
scaling, min-norm safety/tracking controllers, and simulation monitors."""

from .adaptation import (
    LAWS,
    AdaptationConfig,
    AdaptationRates,
    BregmanPotential,
    admissible_gain_lower_bound,
    barrier_like_value,
    bregman_divergence,
    bregman_divergence_rate,
    composite_rates,
    direct_rates,
    high_order_rates,
    issf_floor,
    leaky_rates,
    racbf_rates,
    tracking_rates,
)
from .barrier import (
    BarrierFamily,
    DerivativeStage,
    GridCertificate,
    InitialSetsReport,
    SlidingVariable,
    initial_condition_sets_check,
    make_sliding,
    racbf_modified_drift,
    tightened_threshold,
    verify_houcbf_grid,
    verify_ucbf_grid,
)
from .errors import (
    ConfigurationError,
    DomainError,
    InconsistencyError,
    InfeasibleStartError,
    PreconditionError,
    PremiseViolationError,
    SingularDenominatorError,
    UnsupportedFeatureError,
)
from .estimator import (
    PredictorState,
    UncertaintyBound,
    dynamic_threshold,
    predictor_error,
    set_membership_update,
)
from .model import (
    ClassKInfinity,
    DynamicsModel,
    ParameterBox,
    ScalingFunction,
    arctan_plus_one,
    certify_class_k,
    eval_scaling,
    eval_true_dynamics,
    exp_saturating,
)
from .qp import (
    ConstraintRow,
    ControlLyapunov,
    QPSolution,
    pointwise_filter,
    safety_row,
    solve_min_norm,
    tracking_row,
)
from .scenarios import (
    build_scenario,
    gallery_config,
    grid_certificate,
    load_scenario,
    scenario_equal,
    scenario_ids,
    set_config_value,
    validate_config,
)
from .sim import (
    MonitorReport,
    RunResult,
    Scenario,
    Trace,
    monitor_report,
    read_trace_csv,
    run,
    scenario_with,
    sweep,
    write_sweep_csv,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

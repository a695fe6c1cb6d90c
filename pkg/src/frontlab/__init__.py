"""Numerical laboratory for sharp-interface dynamics of a bistable
competition-diffusion system."""

from .errors import (
    ConfigError,
    ExtrapolationWarning,
    FitOutOfBracket,
    FlowSingular,
    FrontTooClose,
    InterfaceExtinction,
    MonotonicityViolation,
    NewtonStall,
    NoFront,
    ProjectionAmbiguous,
    SelfIntersection,
    StabilityViolation,
    StepSizeRejected,
)
from .kinetics import (
    Basin,
    EquilibriumSet,
    KineticsParams,
    PhasePoint,
    classify_basin,
    classify_basins,
    jacobian,
    ode_flow,
    reaction_terms,
)
from .separatrix import (
    HFunction,
    SeparatrixCurve,
    compute_separatrix,
    dist_to_separatrix,
    h_value,
)
from .exprs import CoefficientExpr, parse_expr
from .grids import Coefficients, FrontSpec, GridSpec
from .wave import (
    AnsatzProfile,
    WaveProfile,
    balanced_wave_profile,
    estimate_wave_speed,
    evaluate_ansatz,
    find_balanced_kinetics,
    solve_standing_wave,
    solve_traveling_wave,
)
from .solver import (
    Field,
    SolverConfig,
    build_initial_data,
    front_margin,
    simulate,
    stability_dt,
    step,
)
from .interface import (
    DrivingConstant,
    PolylineInterface,
    RadialInterface,
    SignedDistanceField,
    evolve_polyline,
    evolve_radial,
    extract_front,
    hausdorff_distance,
    signed_distance,
)
from .metrics import (
    ErrorReport,
    SweepResult,
    convergence_sweep,
    fit_sandwich,
    generation_window,
    graph_over_gamma,
    profile_error_ii,
    profile_error_iii,
    sandwich_check,
    sweep_rates,
)
from .liouville import (
    SandwichSeed,
    TranslateFit,
    comparison_test,
    cooperation_transform_check,
    envelope_seed,
    liouville_convergence_test,
    random_blend_seed,
    seed_initial_data,
)
from .config import ExperimentConfig, load_config

__version__ = "0.1.0"

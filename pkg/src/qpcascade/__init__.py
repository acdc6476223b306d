"""Invariant curves, reducibility-loss branches and doubling universality
for quasi-periodically forced logistic maps."""

from .numerics import (
    EXTENDED,
    STANDARD,
    FourierCoeffs,
    Precision,
    dft_forward,
    dft_inverse,
    evaluate_series,
    get_precision,
    newton_solve,
    richardson_extrapolate,
)
from .unimodal import (
    FEIGENBAUM_DELTA,
    CascadeTable,
    accumulation_alpha,
    cascade_table,
    feigenbaum_ratios,
    find_period_doubling,
    find_superstable,
    iterate_with_multiplier,
    logistic_eval,
)
from .forced import (
    AttractorClass,
    ClassifyOptions,
    CylinderState,
    ForcedFamily,
    ForcingSpec,
    ParamPoint,
    classify_attractor,
    cocycle_derivative,
    double_map,
    lyapunov_exponent,
    map_step,
)
from .curves import (
    FourierCurve,
    PeriodicInvariantCurve,
    continue_in_epsilon,
    curve_cocycle,
    eval_curve,
    invariance_residual,
    reducibility_status,
    solve_invariant_curve,
)
from .continuation import (
    BifurcationBranch,
    BranchPoint,
    linearized_branch_data,
    linearized_slope,
    reducibility_loss_residual,
    trace_reducibility_loss,
    trace_zero_lyapunov,
    zero_lyapunov_residual,
)
from .analysis import (
    TABLE_SCHEDULE,
    AffineSelfSimMap,
    EquivalenceVerdict,
    SlopeJobConfig,
    SlopeRecord,
    affine_remap,
    asymptotic_equivalence,
    delta1_sequence,
    estimate_slope,
    non_universality_gap,
    ratio_sequence,
    slope_table,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

"""Safety-constrained random-search training for emergency load shedding."""

from safeshed._core import (  # noqa: F401
    CriterionReport,
    DirectionResult,
    EnvStep,
    FaultScenario,
    GridEnv,
    Matrix,
    PolicyParams,
    RecoveryEnvelope,
    RewardWeights,
    RunningStats,
    SafetyWindow,
    SafetyWindowSpec,
    StepOutcome,
    SurrogateParams,
    TopDirections,
    ToyEnv,
    ToyParams,
    __version__,
    act,
    check_recovery_criterion,
    combined_reward,
    config_to_json,
    decay_schedule,
    default_config_json,
    delta_v,
    evaluate,
    init_policy,
    perturb,
    safety_value,
    select_top_directions,
    step_reward,
    train,
    update_multiplier_dual,
    update_multiplier_heuristic,
)

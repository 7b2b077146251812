"""Saddle-point analysis of one-step controller/jammer games over
switched binary packet-dropping channels."""

from .channel import (
    ChannelSet,
    JammerPolicy,
    LinkState,
    passing_probability,
    sample_step,
    sample_steps,
    trial_rng,
)
from .errors import (
    AssumptionError,
    CoercivityError,
    ConnectednessError,
    ContractViolationError,
    RankingError,
    ScenarioError,
    UnsupportedOperationError,
)
from .game import (
    ControlInterval,
    GameInstance,
    ReducedGame,
    SolverConfig,
    check_ranking,
    compute_control_set,
    conditional_payoff,
    conditional_payoff_du,
    expected_payoff,
    lift_strategy,
    reduce_game,
)
from .lq import (
    LqScenario,
    lq_conditional_payoff,
    lq_conditional_payoff_du,
    lq_control_set,
    lq_region,
    lq_u_star,
    randomization_bounds,
    to_game_instance,
)
from .oracle import GridSpec, OracleReport, grid_game_values, run_monte_carlo, verify_saddle
from .saddle import (
    SaddleReport,
    classify_point,
    find_indifference_points,
    mixed_strategy,
    solve,
    solve_reduced,
)
from .scenario import (
    ScenarioFile,
    SweepSpec,
    build_game,
    build_lq_scenario,
    load_scenario,
    parse_scenario,
    register_payoff_kind,
)

__version__ = "0.1.0"

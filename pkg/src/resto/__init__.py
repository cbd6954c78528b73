"""Restoration decision support for earthquake-damaged distribution networks.

The package turns a grid graph plus per-branch damage probabilities into a
finite MDP over breaker-closing actions, solves it for the policy that
minimizes expected restoration steps, and drives an operator loop
(recommend, observe, replan) over CLI, HTTP, or plain Python.
"""

from .errors import (
    InfeasibleError,
    RestoError,
    SchemaError,
    StateLimitError,
    UnknownBusError,
    UnsolvableError,
)
from .fragility import (
    FailureProfile,
    FragilityCurve,
    PgaRecord,
    assign_pga,
    evaluate_fragility,
    failure_profile,
    normal_cdf,
    profile_from_dict,
)
from .mdp import (
    RestorationMdp,
    build_mdp,
    dump_mdp,
    enumerate_actions,
    full_action_family,
    mdp_stats,
    solve,
    target_goal,
    terminal_goal,
    transition_distribution,
)
from .network import (
    DAMAGED,
    ENERGIZED,
    UNKNOWN,
    Branch,
    Bus,
    Network,
    action_valid,
    connected_branches,
    decode_state,
    encode_state,
    feasible_branch_actions,
    initial_state,
    load_network,
    network_from_dict,
    network_to_dict,
    source_adjacent,
)
from .planner import (
    Observation,
    Session,
    WhatIf,
    apply_observation,
    expected_sequence,
    load_snapshot,
    new_session,
    recommend,
    replay,
    retarget,
    session_from_scenario,
    snapshot,
    what_if,
)
from .scenario import Scenario, load_scenario, scenario_from_dict

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "Bus",
    "DAMAGED",
    "ENERGIZED",
    "FailureProfile",
    "FragilityCurve",
    "InfeasibleError",
    "Network",
    "Observation",
    "PgaRecord",
    "RestoError",
    "RestorationMdp",
    "Scenario",
    "SchemaError",
    "Session",
    "StateLimitError",
    "UNKNOWN",
    "UnknownBusError",
    "UnsolvableError",
    "WhatIf",
    "action_valid",
    "apply_observation",
    "assign_pga",
    "build_mdp",
    "connected_branches",
    "decode_state",
    "dump_mdp",
    "encode_state",
    "enumerate_actions",
    "evaluate_fragility",
    "expected_sequence",
    "failure_profile",
    "feasible_branch_actions",
    "full_action_family",
    "initial_state",
    "load_network",
    "load_scenario",
    "load_snapshot",
    "mdp_stats",
    "network_from_dict",
    "network_to_dict",
    "new_session",
    "normal_cdf",
    "profile_from_dict",
    "recommend",
    "replay",
    "retarget",
    "scenario_from_dict",
    "session_from_scenario",
    "snapshot",
    "solve",
    "source_adjacent",
    "target_goal",
    "terminal_goal",
    "transition_distribution",
    "what_if",
]

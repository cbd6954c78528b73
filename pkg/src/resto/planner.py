"""Operator loop over a solved restoration model.

A Session pairs a built MDP with a solved value table, the current system
state, and the observation history that produced it. The loop is:
recommend an action, the crew closes those breakers, the observed per-branch
outcomes come back, apply_observation advances the state, repeat. Because
every observation lands on a state that was already constructed and solved,
replanning after a damage report is a table lookup, not a new solve.

Two goal modes exist. Full restoration runs until no action applies; the
target-bus mode stops as soon as some branch at the chosen bus is energized
(dead-end states where the target became unreachable also end the episode,
so the expectation stays well defined). retarget() swaps between the modes
by re-solving the same MDP under the other goal set.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import InfeasibleError, SchemaError
from .fragility import FailureProfile
from .mdp import (
    Action,
    RestorationMdp,
    build_mdp,
    solve,
    target_goal,
    terminal_goal,
)
from .network import (
    DAMAGED,
    ENERGIZED,
    Network,
    encode_state,
    network_from_dict,
    network_to_dict,
)

SNAPSHOT_FORMAT = "resto-session-v1"


@dataclass(frozen=True)
class Observation:
    """One field report: the action taken and how each branch came up."""

    action: Action
    outcomes: dict[int, str]

    def __post_init__(self):
        action = tuple(sorted(int(j) for j in self.action))
        if not action:
            raise SchemaError("observation action is empty", path="action")
        if len(set(action)) != len(action):
            raise SchemaError("observation action repeats a branch", path="action")
        object.__setattr__(self, "action", action)
        outcomes = {}
        for k, v in self.outcomes.items():
            j = int(k)
            if v not in (ENERGIZED, DAMAGED):
                raise SchemaError(
                    f"outcome for branch {j} must be E or D, got {v!r}",
                    path=f"outcomes.{j}",
                )
            outcomes[j] = v
        if set(outcomes) != set(action):
            raise SchemaError(
                "outcome keys must exactly cover the action branches",
                path="outcomes",
            )
        object.__setattr__(self, "outcomes", outcomes)

    @classmethod
    def from_dict(cls, doc: dict) -> "Observation":
        if not isinstance(doc, dict):
            raise SchemaError("observation must be an object", path="")
        try:
            action = tuple(int(j) for j in doc["action"])
            outcomes = dict(doc["outcomes"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad observation: {exc}", path="")
        return cls(action=action, outcomes=outcomes)

    def as_dict(self) -> dict:
        return {
            "action": list(self.action),
            "outcomes": {str(j): st for j, st in sorted(self.outcomes.items())},
        }


@dataclass
class Session:
    """A live restoration run. Mutations go through apply_observation."""

    net: Network
    profile: FailureProfile
    mdp: RestorationMdp
    values: list[float]
    policy: dict[int, Action]
    goal: frozenset[int]
    target_bus: str | None
    current_index: int
    history: list[Observation] = field(default_factory=list)
    network_doc: dict | None = None
    name: str | None = None

    @property
    def current_state(self) -> str:
        return self.mdp.states[self.current_index]

    @property
    def current_value(self) -> float:
        return self.values[self.current_index]

    @property
    def done(self) -> bool:
        return self.current_index in self.goal

    @property
    def simplified(self) -> bool:
        return self.mdp.simplified

    @property
    def forbid_source_island_merge(self) -> bool:
        return self.mdp.forbid_source_island_merge


def new_session(
    net: Network,
    profile,
    simplify: bool = True,
    forbid_source_island_merge: bool = False,
    target_bus: str | None = None,
    network_doc: dict | None = None,
    name: str | None = None,
) -> Session:
    """Build, solve, and position a session at the all-unknown state."""
    profile = FailureProfile.of(profile)
    mdp = build_mdp(
        net,
        profile,
        simplify=simplify,
        forbid_source_island_merge=forbid_source_island_merge,
    )
    goal = target_goal(mdp, target_bus) if target_bus is not None else terminal_goal(mdp)
    values, policy = solve(mdp, goal)
    return Session(
        net=net,
        profile=profile,
        mdp=mdp,
        values=values,
        policy=policy,
        goal=goal,
        target_bus=target_bus,
        current_index=0,
        history=[],
        network_doc=network_doc or network_to_dict(net),
        name=name,
    )


def session_from_scenario(scn, simplify: bool = True) -> Session:
    """Start a session from a loaded scenario, applying its seed history."""
    sess = new_session(
        scn.net,
        scn.profile,
        simplify=simplify,
        forbid_source_island_merge=scn.forbid_source_island_merge,
        target_bus=scn.target_bus,
        network_doc=scn.network_doc,
        name=scn.name,
    )
    for step in scn.initial_history:
        obs = step if isinstance(step, Observation) else Observation.from_dict(step)
        apply_observation(sess, obs)
    return sess


def recommend(sess: Session) -> Action | None:
    """The optimal action at the current state; None once the goal holds."""
    if sess.current_index in sess.goal:
        return None
    return sess.policy[sess.current_index]


def apply_observation(sess: Session, obs: Observation) -> str:
    """Advance the session along an observed outcome; returns the new state.

    The action must be one the model offers at the current state, and the
    reported outcome combination must have nonzero probability (a branch
    with P_F = 0 cannot come up damaged, nor P_F = 1 energized).
    """
    idx = sess.current_index
    acts = sess.mdp.actions[idx]
    try:
        k = acts.index(obs.action)
    except ValueError:
        raise InfeasibleError(
            f"action {list(obs.action)} is not applicable in state "
            f"{sess.mdp.states[idx]}",
            path="action",
        )
    nxt = _apply_outcomes(sess.mdp.states[idx], obs)
    row = dict(sess.mdp.transitions[idx][k])
    t_idx = sess.mdp.index_of.get(encode_state(nxt))
    if t_idx is None or t_idx not in row:
        raise InfeasibleError(
            "observed outcome has probability zero under the failure profile",
            path="outcomes",
        )
    sess.current_index = t_idx
    sess.history.append(obs)
    return nxt


def _apply_outcomes(state: str, obs: Observation) -> str:
    chars = list(state)
    for j, st in obs.outcomes.items():
        chars[j] = st
    return "".join(chars)


def expected_sequence(sess: Session) -> list[Action]:
    """The nominal action sequence from the current state.

    Follows the optimal policy assuming each closed branch takes its likelier
    status: energized, except that a branch with P_F = 1 always comes up
    damaged (its all-energized successor does not exist in the model).
    """
    seq: list[Action] = []
    idx = sess.current_index
    while idx not in sess.goal:
        act = sess.policy[idx]
        seq.append(act)
        state = sess.mdp.states[idx]
        chars = list(state)
        for j in act:
            chars[j] = DAMAGED if sess.profile[j] >= 1.0 else ENERGIZED
        idx = sess.mdp.index_of[encode_state("".join(chars))]
    return seq


@dataclass(frozen=True)
class WhatIf:
    """Read-only probe: where a hypothetical observation would lead."""

    successor: str
    remaining: float
    next_action: Action | None


def what_if(sess: Session, action, outcomes) -> WhatIf:
    """Evaluate a hypothetical observation without touching the session."""
    obs = Observation(action=tuple(action), outcomes=dict(outcomes))
    idx = sess.current_index
    acts = sess.mdp.actions[idx]
    try:
        k = acts.index(obs.action)
    except ValueError:
        raise InfeasibleError(
            f"action {list(obs.action)} is not applicable in state "
            f"{sess.mdp.states[idx]}",
            path="action",
        )
    nxt = _apply_outcomes(sess.mdp.states[idx], obs)
    row = dict(sess.mdp.transitions[idx][k])
    t_idx = sess.mdp.index_of.get(encode_state(nxt))
    if t_idx is None or t_idx not in row:
        raise InfeasibleError(
            "hypothetical outcome has probability zero under the failure profile",
            path="outcomes",
        )
    return WhatIf(
        successor=nxt,
        remaining=sess.values[t_idx],
        next_action=sess.policy.get(t_idx),
    )


def retarget(sess: Session, target_bus: str | None) -> Session:
    """Re-solve the same MDP under a new goal; history and state carry over.

    target_bus None switches back to full restoration. The original session
    is left untouched.
    """
    goal = (
        target_goal(sess.mdp, target_bus)
        if target_bus is not None
        else terminal_goal(sess.mdp)
    )
    values, policy = solve(sess.mdp, goal)
    return replace(
        sess,
        values=values,
        policy=policy,
        goal=goal,
        target_bus=target_bus,
        history=list(sess.history),
    )


def replay(
    history,
    net: Network,
    profile,
    simplify: bool = True,
    forbid_source_island_merge: bool = False,
    target_bus: str | None = None,
    network_doc: dict | None = None,
    name: str | None = None,
) -> Session:
    """Rebuild a session by folding a history from the all-unknown state."""
    sess = new_session(
        net,
        profile,
        simplify=simplify,
        forbid_source_island_merge=forbid_source_island_merge,
        target_bus=target_bus,
        network_doc=network_doc,
        name=name,
    )
    for step in history:
        obs = step if isinstance(step, Observation) else Observation.from_dict(step)
        apply_observation(sess, obs)
    return sess


def snapshot(sess: Session) -> dict:
    """Self-contained, replayable session document."""
    doc = {
        "format": SNAPSHOT_FORMAT,
        "network": sess.network_doc or network_to_dict(sess.net),
        "p_f": list(sess.profile.p_f),
        "simplify": sess.simplified,
        "forbid_source_island_merge": sess.forbid_source_island_merge,
        "goal_mode": (
            {"mode": "target", "bus": sess.target_bus}
            if sess.target_bus is not None
            else {"mode": "full"}
        ),
        "history": [obs.as_dict() for obs in sess.history],
        "current": sess.current_state,
    }
    if sess.name is not None:
        doc["name"] = sess.name
    return doc


def load_snapshot(doc: dict) -> Session:
    """Replay a snapshot; the stored current state must match the replay."""
    if not isinstance(doc, dict):
        raise SchemaError("snapshot must be an object", path="")
    if doc.get("format") != SNAPSHOT_FORMAT:
        raise SchemaError(
            f"unknown snapshot format {doc.get('format')!r}", path="format"
        )
    try:
        net = network_from_dict(doc["network"])
        profile = FailureProfile.of(doc["p_f"])
    except KeyError as exc:
        raise SchemaError(f"snapshot missing field {exc.args[0]!r}", path=str(exc.args[0]))
    goal_mode = doc.get("goal_mode") or {"mode": "full"}
    target_bus = goal_mode.get("bus") if goal_mode.get("mode") == "target" else None
    sess = replay(
        doc.get("history") or [],
        net,
        profile,
        simplify=bool(doc.get("simplify", True)),
        forbid_source_island_merge=bool(doc.get("forbid_source_island_merge", False)),
        target_bus=target_bus,
        network_doc=doc["network"],
        name=doc.get("name"),
    )
    stored = doc.get("current")
    if stored is not None and stored != sess.current_state:
        raise SchemaError(
            f"snapshot current state {stored!r} does not match history replay "
            f"{sess.current_state!r}",
            path="current",
        )
    return sess

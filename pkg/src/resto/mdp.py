"""Restoration MDP: reachability construction and exact solve.

States are branch status vectors; an action energizes a set of breakers
simultaneously and each branch in it independently comes up energized or
damaged according to its failure probability. Construction expands only
states reachable from the all-unknown start. Every transition resolves at
least one unknown branch, so the state graph is acyclic and a single
backward pass in order of unknown-count yields the exact optimal expected
step counts and policy.

By default each state offers only its inclusion-maximal valid actions:
dropping an action that is a proper subset of another valid action changes
neither the optimal value nor the optimal policy, and shrinks the model.
Building with ``simplify=False`` keeps the full family of valid subsets,
which is useful to check that equivalence.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, IO

from .errors import StateLimitError, UnknownBusError, UnsolvableError
from .fragility import FailureProfile
from .network import (
    DAMAGED,
    ENERGIZED,
    UNKNOWN,
    Network,
    UnionFind,
    check_state,
    encode_state,
    feasible_branch_actions,
    initial_state,
    live_island_roots,
)

Action = tuple[int, ...]

DEFAULT_MAX_STATES = 5_000_000

# Absolute tolerance for treating two action values as tied; ties go to the
# lexicographically smallest action for reproducible policies.
VALUE_TIE_TOL = 1e-12


class _ActionContext:
    """Per-state scaffolding for enumerating simultaneous-energization sets.

    Candidates drop out up front when closing them alone would loop the
    energized forest or (under the island rule) parallel two live islands;
    both conditions are per-branch against the pre-action components, so
    only the acyclicity of the joint closure needs checking during the
    subset walk.
    """

    def __init__(self, net: Network, s: str, forbid_source_island_merge: bool):
        self.net = net
        uf = UnionFind()
        for j, st in enumerate(s):
            if st == ENERGIZED:
                uf.union(*net.branches[j].endpoints)
        live = (
            live_island_roots(net, s, uf) if forbid_source_island_merge else set()
        )
        self.cands: list[int] = []
        self.roots: dict[int, tuple[str, str]] = {}
        self.ends: dict[int, tuple[str, str]] = {}
        for j in sorted(feasible_branch_actions(net, s)):
            u, v = net.branches[j].endpoints
            ru, rv = uf.find(u), uf.find(v)
            if ru == rv:
                continue
            if ru in live and rv in live:
                continue
            self.cands.append(j)
            self.roots[j] = (ru, rv)
            self.ends[j] = (u, v)

    def compatible(self, chosen: list[int], j: int) -> bool:
        """Whether chosen + [j] is still a valid simultaneous set."""
        u, v = self.ends[j]
        for c in chosen:
            cu, cv = self.ends[c]
            if u == cu or u == cv or v == cu or v == cv:
                return False
        # group the base forest components merged by the chosen branches
        parent: dict[str, str] = {}

        def find(r: str) -> str:
            while parent.get(r, r) != r:
                r = parent[r]
            return r

        for c in chosen:
            ra, rb = (find(r) for r in self.roots[c])
            parent[rb] = ra
        return find(self.roots[j][0]) != find(self.roots[j][1])


def _enumerate_sets(ctx: _ActionContext, keep_all: bool) -> tuple[list[Action], bool]:
    """DFS over valid sets in increasing index order.

    With keep_all, returns every valid nonempty set plus a flag telling
    whether any of them is extendable (i.e. subsumed by a larger valid set).
    Otherwise returns only the inclusion-maximal sets.
    """
    cands = ctx.cands
    out: list[Action] = []
    saw_extendable = False

    def rec(chosen: list[int], last_pos: int) -> None:
        nonlocal saw_extendable
        ext = [p for p, j in enumerate(cands) if j not in chosen and ctx.compatible(chosen, j)]
        if keep_all:
            if chosen:
                out.append(tuple(chosen))
                if ext:
                    saw_extendable = True
        elif chosen and not ext:
            out.append(tuple(chosen))
        for p in ext:
            if p > last_pos:
                rec(chosen + [cands[p]], p)

    rec([], -1)
    out.sort()
    return out, saw_extendable


def enumerate_actions(
    net: Network,
    s: str,
    state_valid: Callable[[str], bool] | None = None,
    forbid_source_island_merge: bool = False,
) -> list[Action]:
    """Simplified action set: inclusion-maximal valid sets, lexicographic.

    An empty list marks a terminal state. A custom `state_valid` hook is not
    assumed monotone, so with one present the full valid family is built
    first and maximality taken over the filtered result.
    """
    check_state(net, s)
    ctx = _ActionContext(net, s, forbid_source_island_merge)
    if state_valid is None:
        sets, _ = _enumerate_sets(ctx, keep_all=False)
        return sets
    family = full_action_family(net, s, state_valid, forbid_source_island_merge)
    family_set = set(family)
    maximal = []
    for a in family:
        if not any(set(a) < set(b) for b in family_set if len(b) > len(a)):
            maximal.append(a)
    return maximal


def full_action_family(
    net: Network,
    s: str,
    state_valid: Callable[[str], bool] | None = None,
    forbid_source_island_merge: bool = False,
) -> list[Action]:
    """Every valid nonempty simultaneous-energization set, lexicographic."""
    check_state(net, s)
    ctx = _ActionContext(net, s, forbid_source_island_merge)
    sets, _ = _enumerate_sets(ctx, keep_all=True)
    if state_valid is not None:
        sets = _hook_filter(s, sets, state_valid)
    return sets


def _hook_filter(
    s: str, sets: list[Action], state_valid: Callable[[str], bool]
) -> list[Action]:
    """Keep sets whose fully-energized application passes the validity hook."""
    kept = []
    for a in sets:
        target = list(s)
        for j in a:
            target[j] = ENERGIZED
        if state_valid("".join(target)):
            kept.append(a)
    return kept


def transition_distribution(
    s: str, a: Action, p_f: FailureProfile
) -> list[tuple[str, float]]:
    """Successor states and probabilities for applying action a in s.

    Each branch of a independently ends energized (probability 1 - p_f) or
    damaged (p_f); the rest of the vector is copied. Zero-probability
    outcomes are omitted, so a sure branch yields a single successor.
    """
    p_f = FailureProfile.of(p_f)
    a = tuple(sorted(set(a)))
    if not a:
        raise ValueError("action must be a nonempty set of branch indices")
    per_branch = []
    for j in a:
        if not 0 <= j < len(s):
            raise ValueError(f"branch {j} out of range for a {len(s)}-branch state")
        if s[j] != UNKNOWN:
            raise ValueError(f"branch {j} has status {s[j]}, not {UNKNOWN}")
        pf = p_f[j]
        opts = []
        if pf < 1.0:
            opts.append((ENERGIZED, 1.0 - pf))
        if pf > 0.0:
            opts.append((DAMAGED, pf))
        per_branch.append(opts)
    out = []
    for combo in itertools.product(*per_branch):
        t = list(s)
        prob = 1.0
        for j, (st, pr) in zip(a, combo):
            t[j] = st
            prob *= pr
        out.append(("".join(t), prob))
    return out


@dataclass
class RestorationMdp:
    """Reachable restoration model over one network and failure profile."""

    net: Network
    p_f: FailureProfile
    simplified: bool
    forbid_source_island_merge: bool = False
    states: list[str] = field(default_factory=list)
    actions: list[list[Action]] = field(default_factory=list)
    transitions: list[list[list[tuple[int, float]]]] = field(default_factory=list)
    terminal_flags: list[bool] = field(default_factory=list)
    depth: list[int] = field(default_factory=list)
    index_of: dict[int, int] = field(default_factory=dict)
    any_subsumed: bool | None = None

    @property
    def m(self) -> int:
        return self.net.m

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state_index(self, s: str) -> int:
        try:
            return self.index_of[encode_state(s)]
        except KeyError:
            raise KeyError(f"state {s!r} was not constructed")

    def has_state(self, s: str) -> bool:
        return encode_state(s) in self.index_of


def build_mdp(
    net: Network,
    p_f,
    simplify: bool = True,
    max_states: int = DEFAULT_MAX_STATES,
    state_valid: Callable[[str], bool] | None = None,
    forbid_source_island_merge: bool = False,
) -> RestorationMdp:
    """Expand all states reachable from the all-unknown start.

    With simplify, expansion uses the maximal action sets; otherwise the
    full valid family, which reaches strictly more states whenever some
    family contains a subsumed action.
    """
    p_f = FailureProfile.of(p_f)
    if len(p_f) != net.m:
        raise ValueError(f"failure profile has {len(p_f)} entries for {net.m} branches")
    mdp = RestorationMdp(
        net=net,
        p_f=p_f,
        simplified=simplify,
        forbid_source_island_merge=forbid_source_island_merge,
    )
    if not simplify:
        mdp.any_subsumed = False
    def add_state(s: str, depth: int) -> int:
        i = len(mdp.states)
        mdp.states.append(s)
        mdp.index_of[encode_state(s)] = i
        mdp.depth.append(depth)
        mdp.actions.append([])
        mdp.transitions.append([])
        mdp.terminal_flags.append(False)
        return i

    add_state(initial_state(net.m), 0)
    frontier = deque([0])
    while frontier:
        idx = frontier.popleft()
        s = mdp.states[idx]
        ctx = _ActionContext(net, s, forbid_source_island_merge)
        if simplify and state_valid is None:
            acts, _ = _enumerate_sets(ctx, keep_all=False)
        elif simplify:
            acts = enumerate_actions(net, s, state_valid, forbid_source_island_merge)
        else:
            acts, extendable = _enumerate_sets(ctx, keep_all=True)
            if state_valid is not None:
                acts = _hook_filter(s, acts, state_valid)
            elif extendable:
                mdp.any_subsumed = True
        mdp.actions[idx] = acts
        mdp.terminal_flags[idx] = not acts
        rows = []
        for a in acts:
            row = []
            for t, prob in transition_distribution(s, a, p_f):
                enc = encode_state(t)
                t_idx = mdp.index_of.get(enc)
                if t_idx is None:
                    if len(mdp.states) >= max_states:
                        raise StateLimitError(
                            f"state count exceeded the cap of {max_states}"
                        )
                    t_idx = add_state(t, mdp.depth[idx] + 1)
                    frontier.append(t_idx)
                row.append((t_idx, prob))
            rows.append(row)
        mdp.transitions[idx] = rows
    return mdp


def cost(mdp: RestorationMdp, idx: int, goal: frozenset[int] | set[int]) -> int:
    """Per-step cost: 0 inside the goal set, 1 everywhere else."""
    if not goal:
        raise ValueError("goal set must be nonempty")
    return 0 if idx in goal else 1


def terminal_goal(mdp: RestorationMdp) -> frozenset[int]:
    """Goal for full restoration: all states with no applicable action."""
    return frozenset(i for i, t in enumerate(mdp.terminal_flags) if t)


def target_goal(mdp: RestorationMdp, bus_id: str) -> frozenset[int]:
    """Goal for restoring one bus: states where a branch at the bus is
    energized, closed with the dead-end terminals so the expectation is
    defined even when the bus becomes unreachable."""
    if bus_id not in mdp.net.bus_by_id:
        raise UnknownBusError(f"unknown bus {bus_id!r}", path="bus")
    adjacent = mdp.net.branches_at[bus_id]
    hits = set()
    for i, s in enumerate(mdp.states):
        if mdp.terminal_flags[i] or any(s[j] == ENERGIZED for j in adjacent):
            hits.add(i)
    return frozenset(hits)


def solve(
    mdp: RestorationMdp, goal: frozenset[int] | set[int]
) -> tuple[list[float], dict[int, Action]]:
    """Exact expected-steps-to-goal values and the minimizing policy.

    One pass over states in increasing unknown-count order suffices since
    every transition strictly reduces the unknowns. Raises UnsolvableError
    if a non-goal state has no action (only possible with a goal set that
    does not cover the terminals).
    """
    goal = frozenset(goal)
    if not goal:
        raise ValueError("goal set must be nonempty")
    n = mdp.n_states
    order = sorted(range(n), key=lambda i: mdp.states[i].count(UNKNOWN))
    values: list[float] = [0.0] * n
    policy: dict[int, Action] = {}
    for idx in order:
        if idx in goal:
            values[idx] = 0.0
            continue
        acts = mdp.actions[idx]
        if not acts:
            raise UnsolvableError(
                f"state {idx} has no actions and is outside the goal set"
            )
        totals = []
        for row in mdp.transitions[idx]:
            totals.append(1.0 + sum(p * values[t] for t, p in row))
        best = min(totals)
        for k, total in enumerate(totals):
            if total <= best + VALUE_TIE_TOL:
                values[idx] = total
                policy[idx] = acts[k]
                break
    return values, policy


def mdp_stats(mdp: RestorationMdp) -> dict:
    return {
        "states": mdp.n_states,
        "actions": sum(len(a) for a in mdp.actions),
        "terminals": sum(mdp.terminal_flags),
        "max_depth": max(mdp.depth) if mdp.depth else 0,
        "simplified": mdp.simplified,
    }


def dump_mdp(mdp: RestorationMdp, fh: IO[str]) -> None:
    """Deterministic plain-text dump for debugging and diffing."""
    for i, s in enumerate(mdp.states):
        fh.write(
            f"state={i} enc={encode_state(s)} status={s} "
            f"terminal={int(mdp.terminal_flags[i])}\n"
        )
        for a, row in zip(mdp.actions[i], mdp.transitions[i]):
            pairs = " ".join(f"{t}:{p:.17g}" for t, p in row)
            fh.write(f"  action={','.join(map(str, a))} {pairs}\n")

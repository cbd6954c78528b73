"""Static grid graph and the feasibility rules for restoration actions.

A network is a set of buses joined by switchable branches. A branch status
vector (one of U/D/E per branch, U = untried with breakers open, D = damaged,
E = energized) is the unit of state everywhere else in the package. The rules
implemented here decide which branches can be energized in a given status
vector:

* a branch is a candidate if it is U and touches a source bus or an
  energized branch;
* a set of candidates may be closed simultaneously only if no two of them
  share an endpoint bus and the energized subgraph stays a forest.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import SchemaError

# Branch statuses.
UNKNOWN = "U"
DAMAGED = "D"
ENERGIZED = "E"
STATUSES = (UNKNOWN, DAMAGED, ENERGIZED)

SOURCE_KINDS = ("transmission_source", "der_source")
BUS_KINDS = ("load",) + SOURCE_KINDS

# Packed status codes, two bits per branch.
_STATUS_CODE = {UNKNOWN: 0, ENERGIZED: 1, DAMAGED: 2}
_CODE_STATUS = {v: k for k, v in _STATUS_CODE.items()}


@dataclass(frozen=True)
class Bus:
    id: str
    kind: str

    @property
    def is_source(self) -> bool:
        return self.kind in SOURCE_KINDS


@dataclass(frozen=True)
class Branch:
    index: int
    endpoints: tuple[str, str]
    normally_open: bool = False


class UnionFind:
    """Disjoint sets over bus ids, with path compression."""

    def __init__(self):
        self._parent: dict[str, str] = {}

    def find(self, k: str) -> str:
        parent = self._parent
        if k not in parent:
            parent[k] = k
            return k
        root = k
        while parent[root] != root:
            root = parent[root]
        while parent[k] != root:
            parent[k], k = root, parent[k]
        return root

    def union(self, a: str, b: str) -> bool:
        """Merge the sets of a and b. Returns False if already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self._parent[rb] = ra
        return True


class Network:
    """Validated grid graph: buses, branches, and derived adjacency."""

    def __init__(self, buses: list[Bus], branches: list[Branch]):
        self.buses = list(buses)
        self.branches = list(branches)
        self._validate()
        self.bus_by_id = {b.id: b for b in self.buses}
        self.source_ids = {b.id for b in self.buses if b.is_source}
        # bus id -> indices of incident branches
        self.branches_at: dict[str, set[int]] = {b.id: set() for b in self.buses}
        for br in self.branches:
            for end in br.endpoints:
                self.branches_at[end].add(br.index)
        self._warn_if_disconnected()

    @property
    def m(self) -> int:
        return len(self.branches)

    def _validate(self) -> None:
        seen_ids = set()
        for i, bus in enumerate(self.buses):
            if bus.kind not in BUS_KINDS:
                raise SchemaError(
                    f"unknown bus kind {bus.kind!r}", path=f"buses[{i}].kind"
                )
            if bus.id in seen_ids:
                raise SchemaError(f"duplicate bus id {bus.id!r}", path=f"buses[{i}].id")
            seen_ids.add(bus.id)
        if not any(b.is_source for b in self.buses):
            raise SchemaError("network has no source bus", path="buses")
        if not self.branches:
            raise SchemaError("network has no branches", path="branches")
        for i, br in enumerate(self.branches):
            if br.index != i:
                raise SchemaError(
                    f"branch indices must be contiguous 0..m-1, got {br.index} at position {i}",
                    path=f"branches[{i}].index",
                )
            u, v = br.endpoints
            if u == v:
                raise SchemaError(
                    f"branch {i} endpoints must be distinct",
                    path=f"branches[{i}].endpoints",
                )
            for j, end in enumerate((u, v)):
                if end not in seen_ids:
                    raise SchemaError(
                        f"branch {i} references unknown bus {end!r}",
                        path=f"branches[{i}].endpoints[{j}]",
                    )

    def _warn_if_disconnected(self) -> None:
        uf = UnionFind()
        for bus in self.buses:
            uf.find(bus.id)
        for br in self.branches:
            uf.union(*br.endpoints)
        roots = {uf.find(b.id) for b in self.buses}
        if len(roots) > 1:
            warnings.warn(
                "network is not connected even with all branches closed",
                stacklevel=3,
            )

    def endpoints(self, j: int) -> tuple[str, str]:
        return self.branches[j].endpoints


def network_from_dict(doc: dict) -> Network:
    """Build a Network from the normative document form.

    ``{"buses": [{"id": ..., "kind": ...}, ...],
       "branches": [{"index": ..., "endpoints": [u, v], "normally_open": bool}, ...]}``
    """
    if not isinstance(doc, dict):
        raise SchemaError("network document must be an object", path="")
    try:
        raw_buses = doc["buses"]
        raw_branches = doc["branches"]
    except KeyError as exc:
        raise SchemaError(f"missing field {exc.args[0]!r}", path=str(exc.args[0]))
    buses = []
    for i, rb in enumerate(raw_buses):
        try:
            buses.append(Bus(id=str(rb["id"]), kind=str(rb["kind"])))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad bus entry: {exc}", path=f"buses[{i}]")
    branches = []
    for i, rb in enumerate(raw_branches):
        try:
            ends = rb["endpoints"]
            if len(ends) != 2:
                raise SchemaError(
                    "endpoints must be a pair", path=f"branches[{i}].endpoints"
                )
            branches.append(
                Branch(
                    index=int(rb["index"]),
                    endpoints=(str(ends[0]), str(ends[1])),
                    normally_open=bool(rb.get("normally_open", False)),
                )
            )
        except SchemaError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad branch entry: {exc}", path=f"branches[{i}]")
    # Duplicate indices surface as non-contiguity in Network._validate, but
    # report them by name first for a clearer message.
    counts: dict[int, int] = {}
    for br in branches:
        counts[br.index] = counts.get(br.index, 0) + 1
    dupes = [k for k, n in counts.items() if n > 1]
    if dupes:
        raise SchemaError(f"duplicate branch index {dupes[0]}", path="branches")
    return Network(buses, branches)


def network_to_dict(net: Network) -> dict:
    """Inverse of network_from_dict: the normative document form."""
    return {
        "buses": [{"id": b.id, "kind": b.kind} for b in net.buses],
        "branches": [
            {
                "index": br.index,
                "endpoints": [br.endpoints[0], br.endpoints[1]],
                "normally_open": br.normally_open,
            }
            for br in net.branches
        ],
    }


def load_network(source: str | dict) -> Network:
    """Load a network from a JSON document string, a file path, or a dict."""
    if isinstance(source, dict):
        return network_from_dict(source)
    text = source
    if "{" not in text:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", path="")
    return network_from_dict(doc)


# --- status vector helpers -------------------------------------------------

def initial_state(m: int) -> str:
    """All-unknown status vector, the post-event starting point."""
    return UNKNOWN * m


def check_state(net: Network, s: str) -> None:
    if len(s) != net.m:
        raise ValueError(f"status vector has length {len(s)}, expected {net.m}")
    bad = set(s) - set(STATUSES)
    if bad:
        raise ValueError(f"invalid status characters {sorted(bad)}")


def encode_state(s: str) -> int:
    """Pack a status vector into an int, two bits per branch (U=0, E=1, D=2)."""
    code = 0
    for i, ch in enumerate(s):
        code |= _STATUS_CODE[ch] << (2 * i)
    return code


def decode_state(code: int, m: int) -> str:
    return "".join(_CODE_STATUS[(code >> (2 * i)) & 3] for i in range(m))


# --- feasibility -----------------------------------------------------------

def connected_branches(net: Network, j: int) -> set[int]:
    """Branches sharing at least one endpoint bus with branch j."""
    if not 0 <= j < net.m:
        raise IndexError(f"branch index {j} out of range 0..{net.m - 1}")
    out: set[int] = set()
    for end in net.branches[j].endpoints:
        out |= net.branches_at[end]
    out.discard(j)
    return out


def source_adjacent(net: Network, j: int) -> bool:
    """True iff an endpoint of branch j is a source bus."""
    if not 0 <= j < net.m:
        raise IndexError(f"branch index {j} out of range 0..{net.m - 1}")
    u, v = net.branches[j].endpoints
    return u in net.source_ids or v in net.source_ids


def feasible_branch_actions(net: Network, s: str) -> set[int]:
    """Candidate branches for state s: U, and touching a source or an E branch."""
    check_state(net, s)
    energized_buses = set()
    for j, st in enumerate(s):
        if st == ENERGIZED:
            energized_buses.update(net.branches[j].endpoints)
    out = set()
    for j, st in enumerate(s):
        if st != UNKNOWN:
            continue
        u, v = net.branches[j].endpoints
        if (
            u in net.source_ids
            or v in net.source_ids
            or u in energized_buses
            or v in energized_buses
        ):
            out.add(j)
    return out


def _energized_forest(net: Network, s: str) -> UnionFind:
    uf = UnionFind()
    for j, st in enumerate(s):
        if st == ENERGIZED:
            uf.union(*net.branches[j].endpoints)
    return uf


def live_island_roots(net: Network, s: str, uf: UnionFind | None = None) -> set[str]:
    """Roots of components that carry energy: a source plus >= 1 E branch.

    A source bus with no energized branch yet is not live — closing its
    first branch is ordinary energization, not an island interconnection.
    """
    if uf is None:
        uf = _energized_forest(net, s)
    has_energized = {
        uf.find(net.branches[j].endpoints[0])
        for j, st in enumerate(s)
        if st == ENERGIZED
    }
    return {
        uf.find(b) for b in net.source_ids if uf.find(b) in has_energized
    }


def action_valid(
    net: Network,
    s: str,
    a: Iterable[int],
    state_valid: Callable[[str], bool] | None = None,
    forbid_source_island_merge: bool = False,
) -> bool:
    """Whether the branches of `a` may be closed simultaneously in state s.

    Requires every pair in `a` to share no endpoint bus, and the energized
    subgraph to stay acyclic with all of `a` added (checked jointly: two
    pairwise-distant branches can still close a loop between two energized
    trees). With `forbid_source_island_merge`, additionally rejects any
    branch whose two endpoint components are both live islands — carrying
    energy from their own sources — since paralleling live systems needs
    synchronization the operator cannot assume mid-restoration. Because a
    dead component is always a single bare bus and action branches share no
    buses, checking each branch against the pre-action components is
    complete; no joint interaction exists. `state_valid`, when given, must
    accept the would-be state with every branch of `a` energized; it is the
    hook for external checks such as voltage limits or source capacity.
    """
    a = sorted(set(a))
    feasible = feasible_branch_actions(net, s)
    for j in a:
        if j not in feasible:
            raise ValueError(f"branch {j} is not a feasible candidate in this state")
    # pairwise electrical distance: no shared endpoint bus
    seen_buses: set[str] = set()
    for j in a:
        u, v = net.branches[j].endpoints
        if u in seen_buses or v in seen_buses:
            return False
        seen_buses.update((u, v))
    uf = _energized_forest(net, s)
    if forbid_source_island_merge:
        live = live_island_roots(net, s, uf)
        for j in a:
            u, v = net.branches[j].endpoints
            if uf.find(u) in live and uf.find(v) in live:
                return False
    # joint no-loop check on the union with the current energized forest
    for j in a:
        u, v = net.branches[j].endpoints
        if uf.find(u) == uf.find(v):
            return False
        uf.union(u, v)
    if state_valid is not None:
        target = list(s)
        for j in a:
            target[j] = ENERGIZED
        if not state_valid("".join(target)):
            return False
    return True

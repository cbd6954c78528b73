"""Scenario documents: one JSON file tying together a network, a failure
profile, and optional session seed data.

A scenario is the unit both the CLI and the HTTP service ingest:

``{"network": "<path>" | {...inline...},
   "fragility": {...fragility document...},
   "target_bus": "b6",                      # optional goal mode
   "forbid_source_island_merge": false,     # optional, default false
   "initial_history": [{"action": [0], "outcomes": {"0": "E"}}]}``

The network may be referenced by path (resolved against the scenario file's
own directory) or embedded inline. The fragility document may drive
probabilities from curves, direct overrides, or both; see the fragility
module for that schema.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import SchemaError
from .fragility import FailureProfile, profile_from_dict
from .network import Network, network_from_dict, network_to_dict


@dataclass(frozen=True)
class Scenario:
    """A resolved scenario: everything needed to start a session."""

    net: Network
    profile: FailureProfile
    network_doc: dict
    name: str | None = None
    target_bus: str | None = None
    forbid_source_island_merge: bool = False
    initial_history: tuple[dict, ...] = field(default_factory=tuple)


def scenario_from_dict(doc: dict, base_dir: str | None = None) -> Scenario:
    if not isinstance(doc, dict):
        raise SchemaError("scenario document must be an object", path="")
    if "network" not in doc:
        raise SchemaError("scenario has no network", path="network")
    raw_net = doc["network"]
    if isinstance(raw_net, str):
        path = raw_net
        if not os.path.isabs(path) and base_dir is not None:
            path = os.path.join(base_dir, path)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                net_doc = json.load(fh)
        except OSError as exc:
            raise SchemaError(f"cannot read network file: {exc}", path="network")
        except json.JSONDecodeError as exc:
            raise SchemaError(f"network file is not valid JSON: {exc}", path="network")
    elif isinstance(raw_net, dict):
        net_doc = raw_net
    else:
        raise SchemaError("network must be a path or an inline object", path="network")
    net = network_from_dict(net_doc)

    frag = doc.get("fragility")
    if not isinstance(frag, dict):
        raise SchemaError("scenario has no fragility document", path="fragility")
    profile = profile_from_dict(net, frag)

    target = doc.get("target_bus")
    if target is not None:
        target = str(target)
        if target not in net.bus_by_id:
            raise SchemaError(f"unknown target bus {target!r}", path="target_bus")

    history = []
    raw_hist = doc.get("initial_history") or []
    if not isinstance(raw_hist, list):
        raise SchemaError("initial_history must be a list", path="initial_history")
    for i, step in enumerate(raw_hist):
        if not isinstance(step, dict) or "action" not in step or "outcomes" not in step:
            raise SchemaError(
                "history step needs action and outcomes", path=f"initial_history[{i}]"
            )
        history.append(step)

    return Scenario(
        net=net,
        profile=profile,
        network_doc=network_to_dict(net),
        name=doc.get("name"),
        target_bus=target,
        forbid_source_island_merge=bool(doc.get("forbid_source_island_merge", False)),
        initial_history=tuple(history),
    )


def load_scenario(source: str | dict, base_dir: str | None = None) -> Scenario:
    """Load a scenario from a dict, a JSON string, or a file path."""
    if isinstance(source, dict):
        return scenario_from_dict(source, base_dir=base_dir)
    text = source
    if "{" not in text:
        base_dir = base_dir or os.path.dirname(os.path.abspath(source))
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise SchemaError(f"cannot read scenario file: {exc}", path="")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", path="")
    return scenario_from_dict(doc, base_dir=base_dir)

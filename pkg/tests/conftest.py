"""Shared fixtures and generators for the test suite."""

import json
import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
REPO_DIR = TESTS_DIR.parent
FIXTURES = REPO_DIR / "fixtures"

if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

from resto.network import network_from_dict


def load_fixture(name: str) -> dict:
    with open(FIXTURES / name, "r", encoding="utf-8") as fh:
        return json.load(fh)


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


# Table of per-branch damage probabilities for the four ring drills,
# branches 1..5; branch 0 is the intact supply branch (P_F = 0).
RING_TABLE = {
    1: [0.0, 0.7, 0.4, 0.4, 0.4, 0.4],
    2: [0.0, 0.4, 0.7, 0.4, 0.4, 0.4],
    3: [0.0, 0.4, 0.4, 0.4, 0.7, 0.4],
    4: [0.0, 0.4, 0.4, 0.7, 0.4, 0.4],
}


@pytest.fixture(scope="session")
def two_source_net():
    return network_from_dict(load_fixture("two_source_6bus.json"))


@pytest.fixture(scope="session")
def ring_net():
    return network_from_dict(load_fixture("ring_6bus.json"))


def random_network(rng, max_buses=5, max_branches=4, multi_source=True):
    """Random connected network: spanning tree plus a few extra edges.

    Extra edges may duplicate an existing pair, so parallel branches (which
    can only ever loop) show up now and then.
    """
    n_bus = rng.randint(2, max_buses)
    buses = []
    for i in range(n_bus):
        kind = "load"
        if i == 0:
            kind = "transmission_source"
        elif multi_source and rng.random() < 0.4:
            kind = rng.choice(["transmission_source", "der_source"])
        buses.append({"id": f"b{i+1}", "kind": kind})
    ids = [b["id"] for b in buses]
    edges = []
    for i in range(1, n_bus):
        edges.append((ids[rng.randrange(i)], ids[i]))
    while len(edges) < max_branches and rng.random() < 0.6:
        u, v = rng.sample(ids, 2)
        edges.append((u, v))
    edges = edges[:max_branches]
    branches = [{"index": j, "endpoints": [u, v]} for j, (u, v) in enumerate(edges)]
    return network_from_dict({"buses": buses, "branches": branches})


def random_profile(rng, m, lo=0.05, hi=0.95):
    return [round(rng.uniform(lo, hi), 3) for _ in range(m)]

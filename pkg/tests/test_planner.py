"""Session loop: recommendations, observations, replanning, persistence."""

import random

import pytest

from conftest import RING_TABLE, fixture_path, random_network, random_profile
from resto.errors import InfeasibleError, SchemaError
from resto.network import network_from_dict
from resto.planner import (
    Observation,
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
from resto.scenario import load_scenario


def _single_branch_net():
    return network_from_dict(
        {
            "buses": [{"id": "s", "kind": "transmission_source"}, {"id": "a", "kind": "load"}],
            "branches": [{"index": 0, "endpoints": ["s", "a"]}],
        }
    )


def _obs(action, outcomes):
    return Observation(action=tuple(action), outcomes=dict(outcomes))


# --- observation validation -------------------------------------------------

def test_observation_normalizes():
    obs = _obs([4, 1], {1: "D", 4: "E"})
    assert obs.action == (1, 4)
    assert obs.outcomes == {1: "D", 4: "E"}
    assert obs.as_dict() == {"action": [1, 4], "outcomes": {"1": "D", "4": "E"}}
    again = Observation.from_dict(obs.as_dict())
    assert again == obs


def test_observation_rejects_empty():
    with pytest.raises(SchemaError) as exc:
        _obs([], {})
    assert exc.value.path == "action"


def test_observation_rejects_duplicates():
    with pytest.raises(SchemaError):
        _obs([1, 1], {1: "E"})


def test_observation_rejects_bad_status():
    with pytest.raises(SchemaError) as exc:
        _obs([1], {1: "U"})
    assert exc.value.path == "outcomes.1"


def test_observation_rejects_key_mismatch():
    with pytest.raises(SchemaError) as exc:
        _obs([1, 2], {1: "E"})
    assert exc.value.path == "outcomes"
    with pytest.raises(SchemaError):
        _obs([1], {1: "E", 2: "E"})


def test_observation_from_dict_bad_shape():
    with pytest.raises(SchemaError):
        Observation.from_dict({"action": [1]})
    with pytest.raises(SchemaError):
        Observation.from_dict("nope")


# --- the scripted restoration run -------------------------------------------

def test_scenario_1_nominal_run():
    sess = session_from_scenario(load_scenario(fixture_path("scenario_1.json")))
    # the seed history already energized the feeder-head branch
    assert sess.current_state == "EUUUUU"
    assert sess.current_value == pytest.approx(2.9048, abs=1e-9)
    assert recommend(sess) == (2,)
    assert expected_sequence(sess) == [(2,), (1, 4), (3,)]

    apply_observation(sess, _obs([2], {2: "E"}))
    assert sess.current_state == "EUEUUU"
    assert sess.current_value == pytest.approx(2.116, abs=1e-9)
    assert recommend(sess) == (1, 4)

    apply_observation(sess, _obs([1, 4], {1: "E", 4: "E"}))
    assert recommend(sess) == (3,)
    apply_observation(sess, _obs([3], {3: "E"}))
    assert sess.done
    assert recommend(sess) is None
    assert sess.current_value == 0.0
    assert len(sess.history) == 4  # seed step plus three applied here


def test_scenario_1_replan_after_damage():
    sess = session_from_scenario(load_scenario(fixture_path("scenario_1.json")))
    apply_observation(sess, _obs([2], {2: "E"}))
    apply_observation(sess, _obs([1, 4], {1: "D", 4: "E"}))
    assert sess.current_state == "EDEUEU"
    assert sess.current_value == pytest.approx(1.6, abs=1e-9)
    assert recommend(sess) == (5,)
    assert expected_sequence(sess) == [(5,), (3,)]


@pytest.mark.parametrize(
    "profile_id, want",
    [
        (1, [(2,), (1, 4), (3,)]),
        (2, [(1,), (2, 3), (4,)]),
        (3, [(1,), (2, 3), (5,)]),
        (4, [(2,), (1, 4), (5,)]),
    ],
)
def test_ring_expected_sequences(ring_net, profile_id, want):
    sess = new_session(ring_net, RING_TABLE[profile_id])
    apply_observation(sess, _obs([0], {0: "E"}))
    assert expected_sequence(sess) == want


def test_infeasible_action_rejected():
    sess = session_from_scenario(load_scenario(fixture_path("scenario_1.json")))
    with pytest.raises(InfeasibleError) as exc:
        apply_observation(sess, _obs([5], {5: "E"}))
    assert exc.value.path == "action"
    # the failed call left the session untouched
    assert sess.current_state == "EUUUUU"
    assert len(sess.history) == 1


def test_zero_probability_outcome_rejected(ring_net):
    sess = new_session(ring_net, RING_TABLE[1])
    # branch 0 cannot fail in this profile
    with pytest.raises(InfeasibleError) as exc:
        apply_observation(sess, _obs([0], {0: "D"}))
    assert exc.value.path == "outcomes"
    assert sess.current_state == "UUUUUU"


def test_subsumed_action_needs_full_model(two_source_net):
    scn_doc = {
        "network": fixture_path("two_source_6bus.json"),
        "fragility": {"overrides": {str(j): 0.2 for j in range(6)}},
        "forbid_source_island_merge": True,
    }
    simp = session_from_scenario(load_scenario(scn_doc))
    with pytest.raises(InfeasibleError):
        apply_observation(simp, _obs([5], {5: "E"}))
    full = session_from_scenario(load_scenario(scn_doc), simplify=False)
    apply_observation(full, _obs([5], {5: "E"}))
    assert full.current_state == "UUUUUE"


# --- what-if probes ---------------------------------------------------------

def test_what_if_reports_without_mutating():
    sess = session_from_scenario(load_scenario(fixture_path("scenario_1.json")))
    apply_observation(sess, _obs([2], {2: "E"}))
    apply_observation(sess, _obs([1, 4], {1: "D", 4: "E"}))
    before_idx = sess.current_index
    before_hist = list(sess.history)

    probe = what_if(sess, [5], {5: "E"})
    assert probe.successor == "EDEUEE"
    assert probe.remaining == pytest.approx(1.0, abs=1e-12)
    assert probe.next_action == (3,)

    assert sess.current_index == before_idx
    assert sess.history == before_hist


def test_what_if_validates_like_apply():
    sess = session_from_scenario(load_scenario(fixture_path("scenario_1.json")))
    with pytest.raises(InfeasibleError):
        what_if(sess, [5], {5: "E"})
    sess2 = new_session(sess.net, RING_TABLE[1])
    with pytest.raises(InfeasibleError):
        what_if(sess2, [0], {0: "D"})


def test_what_if_terminal_outcome_has_no_next_action(ring_net):
    sess = new_session(ring_net, RING_TABLE[1])
    probe = what_if(sess, [0], {0: "E"})
    assert probe.successor == "EUUUUU"
    assert probe.next_action == (2,)


# --- nominal sequences ------------------------------------------------------

def test_expected_sequence_disjoint_and_bounded():
    rng = random.Random(1999)
    for _ in range(30):
        net = random_network(rng, max_buses=6, max_branches=6)
        sess = new_session(net, random_profile(rng, net.m))
        seq = expected_sequence(sess)
        played = [j for a in seq for j in a]
        assert len(played) == len(set(played))
        assert len(played) <= net.m


def test_expected_sequence_sure_damage():
    sess = new_session(_single_branch_net(), [1.0])
    assert expected_sequence(sess) == [(0,)]
    apply_observation(sess, _obs([0], {0: "D"}))
    assert sess.done
    assert sess.current_state == "D"


# --- retargeting ------------------------------------------------------------

def test_retarget_two_source(two_source_net):
    sess = new_session(
        two_source_net, [0.2] * 6, forbid_source_island_merge=True
    )
    full_value = sess.current_value
    targeted = retarget(sess, "b4")
    assert targeted.target_bus == "b4"
    assert targeted.current_value == pytest.approx(2.34656, abs=1e-9)
    assert targeted.current_value <= full_value
    # original session is untouched, history lists are independent
    assert sess.target_bus is None
    assert targeted.history is not sess.history
    back = retarget(targeted, None)
    assert back.target_bus is None
    assert back.current_value == pytest.approx(full_value, abs=1e-12)


def test_retarget_never_worse_than_full():
    rng = random.Random(777)
    for _ in range(25):
        net = random_network(rng, max_buses=6, max_branches=5)
        sess = new_session(net, random_profile(rng, net.m))
        bus = rng.choice([b.id for b in net.buses])
        targeted = retarget(sess, bus)
        assert targeted.current_value <= sess.current_value + 1e-12


def test_retarget_preserves_position(ring_net):
    sess = new_session(ring_net, RING_TABLE[1])
    apply_observation(sess, _obs([0], {0: "E"}))
    targeted = retarget(sess, "b6")
    assert targeted.current_state == "EUUUUU"
    assert len(targeted.history) == 1


# --- replay and snapshots ---------------------------------------------------

def _random_walk(rng, sess, max_steps=10):
    for _ in range(max_steps):
        if sess.done:
            break
        acts = sess.mdp.actions[sess.current_index]
        a = rng.choice(acts)
        row = sess.mdp.transitions[sess.current_index][acts.index(a)]
        t_idx, _ = row[rng.randrange(len(row))]
        nxt = sess.mdp.states[t_idx]
        outcomes = {j: nxt[j] for j in a}
        apply_observation(sess, _obs(a, outcomes))


def test_replay_matches_live_session():
    rng = random.Random(60468)
    for _ in range(20):
        net = random_network(rng, max_buses=6, max_branches=5)
        p_f = random_profile(rng, net.m)
        sess = new_session(net, p_f)
        _random_walk(rng, sess)
        again = replay(sess.history, net, p_f)
        assert again.current_state == sess.current_state
        assert again.current_value == sess.current_value
        assert recommend(again) == recommend(sess)
        assert again.history == sess.history


def test_snapshot_round_trip(ring_net):
    sess = new_session(ring_net, RING_TABLE[1], name="ring run")
    apply_observation(sess, _obs([0], {0: "E"}))
    apply_observation(sess, _obs([2], {2: "E"}))
    doc = snapshot(sess)
    assert doc["format"] == "resto-session-v1"
    assert doc["current"] == "EUEUUU"
    assert doc["goal_mode"] == {"mode": "full"}
    assert doc["name"] == "ring run"
    again = load_snapshot(doc)
    assert again.current_state == sess.current_state
    assert again.current_value == sess.current_value
    assert again.name == "ring run"
    assert recommend(again) == recommend(sess)


def test_snapshot_round_trip_target_mode(two_source_net):
    sess = new_session(
        two_source_net,
        [0.2] * 6,
        forbid_source_island_merge=True,
        target_bus="b4",
    )
    doc = snapshot(sess)
    assert doc["goal_mode"] == {"mode": "target", "bus": "b4"}
    assert doc["forbid_source_island_merge"] is True
    again = load_snapshot(doc)
    assert again.target_bus == "b4"
    assert again.current_value == pytest.approx(2.34656, abs=1e-9)


def test_snapshot_rejects_mismatched_current(ring_net):
    sess = new_session(ring_net, RING_TABLE[1])
    apply_observation(sess, _obs([0], {0: "E"}))
    doc = snapshot(sess)
    doc["current"] = "UUUUUU"
    with pytest.raises(SchemaError) as exc:
        load_snapshot(doc)
    assert exc.value.path == "current"


def test_snapshot_rejects_unknown_format(ring_net):
    sess = new_session(ring_net, RING_TABLE[1])
    doc = snapshot(sess)
    doc["format"] = "resto-session-v9"
    with pytest.raises(SchemaError) as exc:
        load_snapshot(doc)
    assert exc.value.path == "format"


def test_snapshot_full_model_flag(two_source_net):
    sess = new_session(two_source_net, [0.2] * 6, simplify=False)
    doc = snapshot(sess)
    assert doc["simplify"] is False
    again = load_snapshot(doc)
    assert again.simplified is False
    assert again.mdp.n_states == sess.mdp.n_states

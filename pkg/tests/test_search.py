"""Search semantics: regions, counterfactuals, caps, paths, determinism."""

import random

import pytest

from stache import (
    InvalidStateError,
    NotInRegionError,
    PolicyQueryError,
    RegionCapExceededError,
    SearchConfig,
    TablePolicy,
    enumerate_space,
    explanation_from_json,
    hybrid_distance,
    immediate_neighbors,
    shortest_invariant_path,
    stache_cutoff,
    stache_exact,
)


class CountingPolicy:
    """Wraps a policy; records every queried state."""

    def __init__(self, inner):
        self.inner = inner
        self.queried = []

    def query(self, state):
        self.queried.append(state)
        return self.inner.query(state)


def table(f, fn):
    return TablePolicy(f, {s: fn(s) for s in enumerate_space(f)})


def constant_policy(f):
    return table(f, lambda s: 0)


def isolating_policy(f, seed):
    return table(f, lambda s: 1 if s == seed else 0)


SEED = (2, 2, "g")


# -- exact mode ----------------------------------------------------------


def test_constant_policy_region_is_whole_space(toy_space):
    expl = stache_exact(toy_space, constant_policy(toy_space), SEED)
    assert expl.region.size == toy_space.size()
    assert expl.boundary == frozenset()
    assert not expl.counterfactuals.found
    assert expl.counterfactuals.min_distance is None
    assert expl.counterfactuals.states == frozenset()
    assert not expl.truncated_region


def test_isolated_seed(toy_space):
    expl = stache_exact(toy_space, isolating_policy(toy_space, SEED), SEED)
    assert expl.region.states == frozenset({SEED})
    assert expl.seed_action == 1
    assert expl.counterfactuals.min_distance == 1
    got = {s for s, _ in expl.counterfactuals.states}
    assert got == set(immediate_neighbors(toy_space, SEED))
    assert expl.boundary == frozenset()


def test_region_membership_invariants(toy_space):
    rng = random.Random(5)
    pol = table(toy_space, lambda s: rng.randrange(3))
    expl = stache_exact(toy_space, pol, SEED)
    assert SEED in expl.region.states
    for s in expl.region.states:
        assert pol.query(s) == expl.seed_action
    for s, a in expl.counterfactuals.states | expl.boundary:
        assert a == pol.query(s) != expl.seed_action


def test_boundary_split_by_metric_distance(toy_space):
    rng = random.Random(5)
    pol = table(toy_space, lambda s: rng.randrange(3))
    expl = stache_exact(toy_space, pol, SEED)
    d_min = expl.counterfactuals.min_distance
    for s, _ in expl.counterfactuals.states:
        assert hybrid_distance(toy_space, SEED, s) == d_min
    for s, _ in expl.boundary:
        assert hybrid_distance(toy_space, SEED, s) > d_min


def test_exact_query_accounting(toy_space):
    rng = random.Random(11)
    pol = CountingPolicy(table(toy_space, lambda s: rng.randrange(2)))
    expl = stache_exact(toy_space, pol, SEED)
    # every state queried exactly once
    assert len(pol.queried) == len(set(pol.queried))
    # visited = |region| + |full boundary set|
    n_boundary = len(expl.counterfactuals.states) + len(expl.boundary)
    assert expl.stats.visited_states == expl.region.size + n_boundary
    assert expl.stats.policy_queries == expl.stats.visited_states
    assert expl.stats.enqueued_states >= expl.stats.visited_states


def test_seed_validation(toy_space):
    pol = constant_policy(toy_space)
    with pytest.raises(InvalidStateError):
        stache_exact(toy_space, pol, (9, 9, "r"))
    with pytest.raises(InvalidStateError):
        stache_exact(toy_space, pol, SEED,
                     SearchConfig(mask=lambda s: s != SEED))


def test_policy_failure_identifies_state(toy_space):
    def fn(s):
        if s == (2, 3, "g"):
            raise RuntimeError("boom")
        return 0

    with pytest.raises(PolicyQueryError) as err:
        stache_exact(toy_space, fn, SEED)
    assert err.value.state == (2, 3, "g")


def test_non_integer_action_rejected(toy_space):
    with pytest.raises(PolicyQueryError):
        stache_exact(toy_space, lambda s: "north", SEED)


def test_region_cap_carries_partial(toy_space):
    pol = constant_policy(toy_space)
    with pytest.raises(RegionCapExceededError) as err:
        stache_exact(toy_space, pol, SEED, SearchConfig(max_region=10))
    partial = err.value.partial
    assert partial.truncated_region
    assert partial.region.size > 10
    assert partial.region.size < toy_space.size()
    assert not partial.counterfactuals.found


# -- cutoff mode ---------------------------------------------------------


def test_cutoff_constant_policy_covers_space(toy_space):
    expl = stache_cutoff(toy_space, constant_policy(toy_space), SEED)
    assert expl.region.size == toy_space.size()
    assert not expl.counterfactuals.found
    assert not expl.truncated_region


def test_cutoff_equals_exact_counterfactuals(toy_space):
    rng = random.Random(13)
    for trial in range(20):
        pol = table(toy_space, lambda s: rng.randrange(4))
        seed = random.Random(trial).choice(list(enumerate_space(toy_space)))
        ex = stache_exact(toy_space, pol, seed)
        cut = stache_cutoff(toy_space, pol, seed)
        assert cut.counterfactuals == ex.counterfactuals
        assert cut.region.states <= ex.region.states
        assert cut.seed_action == ex.seed_action


def test_cutoff_region_within_min_distance(toy_space, taxi, taxi_vi):
    expl = stache_cutoff(taxi.factorization, taxi_vi, (0, 1, 2, 1))
    d = expl.counterfactuals.min_distance
    for s in expl.region.states:
        assert hybrid_distance(taxi.factorization, (0, 1, 2, 1), s) <= d
    assert expl.stats.max_queried_distance <= d


def test_cutoff_truncation_flag(toy_space):
    # region reaches past the first counterfactual layer: must be flagged
    pol = table(toy_space, lambda s: 1 if s == (2, 2, "r") else 0)
    expl = stache_cutoff(toy_space, pol, SEED)
    assert expl.counterfactuals.min_distance == 1
    assert expl.truncated_region
    full = stache_exact(toy_space, pol, SEED)
    assert expl.region.states < full.region.states


def test_cutoff_query_accounting(toy_space):
    rng = random.Random(17)
    pol = CountingPolicy(table(toy_space, lambda s: rng.randrange(2)))
    expl = stache_cutoff(toy_space, pol, SEED)
    assert len(pol.queried) == len(set(pol.queried))
    assert expl.stats.policy_queries == expl.stats.visited_states
    if expl.counterfactuals.found:
        d = expl.counterfactuals.min_distance
        for s in pol.queried:
            assert hybrid_distance(toy_space, SEED, s) <= d


# -- batch equivalence ---------------------------------------------------


def test_batch_equals_sequential(toy_space):
    rng = random.Random(19)
    pol = table(toy_space, lambda s: rng.randrange(3))
    for search in (stache_exact, stache_cutoff):
        a = search(toy_space, pol, SEED)
        b = search(toy_space, pol, SEED, SearchConfig(batch=True))
        assert a.to_dict() == b.to_dict()


def test_batch_uses_query_batch(toy_space):
    calls = []

    class BatchPolicy:
        def query(self, s):
            calls.append(("one", s))
            return 0

        def query_batch(self, states):
            calls.append(("many", len(states)))
            return [0] * len(states)

    stache_exact(toy_space, BatchPolicy(), SEED, SearchConfig(batch=True))
    assert any(kind == "many" for kind, _ in calls)
    assert not any(kind == "one" for kind, _ in calls)


# -- masks ---------------------------------------------------------------


def test_mask_restricts_space_and_relabels_minimality(toy_space):
    rng = random.Random(23)
    pol = CountingPolicy(table(toy_space, lambda s: rng.randrange(2)))
    mask = lambda s: s[2] != "b"
    expl = stache_exact(toy_space, pol, SEED, SearchConfig(mask=mask))
    assert expl.minimality == "connectivity"
    for s in pol.queried:
        assert mask(s)
    for s in expl.region.states:
        assert mask(s)
    unmasked = stache_exact(toy_space, pol, SEED)
    assert unmasked.minimality == "global"


# -- paths ---------------------------------------------------------------


def path_is_valid(f, pol, expl, path, target):
    assert path[0] == expl.seed and path[-1] == target
    assert len(path) == len(set(path))
    for s in path:
        assert s in expl.region.states
        assert pol.query(s) == expl.seed_action
    for a, b in zip(path, path[1:]):
        assert hybrid_distance(f, a, b) == 1


def test_path_to_seed_is_singleton(toy_space):
    expl = stache_exact(toy_space, constant_policy(toy_space), SEED)
    assert shortest_invariant_path(expl, SEED) == [SEED]


def test_paths_valid_for_all_members(toy_space):
    rng = random.Random(29)
    pol = table(toy_space, lambda s: rng.randrange(2))
    expl = stache_exact(toy_space, pol, SEED)
    for target in sorted(expl.region.states, key=toy_space.sort_key):
        path = shortest_invariant_path(expl, target)
        path_is_valid(toy_space, pol, expl, path, target)


def test_path_to_boundary_state_rejected(toy_space):
    expl = stache_exact(toy_space, isolating_policy(toy_space, SEED), SEED)
    target = next(iter(expl.counterfactuals.states))[0]
    with pytest.raises(NotInRegionError):
        shortest_invariant_path(expl, target)


def test_path_after_json_roundtrip(toy_space):
    # serialized explanations drop parent links; paths are rebuilt
    rng = random.Random(31)
    pol = table(toy_space, lambda s: rng.randrange(2))
    expl = stache_exact(toy_space, pol, SEED)
    back = explanation_from_json(expl.to_json())
    assert back.parents is None
    for target in list(sorted(back.region.states, key=toy_space.sort_key))[:10]:
        path = shortest_invariant_path(back, target)
        path_is_valid(toy_space, pol, back, path, target)


def test_path_without_parent_tracking(toy_space):
    rng = random.Random(37)
    pol = table(toy_space, lambda s: rng.randrange(2))
    expl = stache_exact(toy_space, pol, SEED,
                        SearchConfig(track_parents=False))
    assert expl.parents is None
    target = max(expl.region.states, key=toy_space.sort_key)
    path_is_valid(toy_space, pol, expl,
                  shortest_invariant_path(expl, target), target)


def test_path_length_equals_bfs_depth(toy_space):
    # in an unmasked region the path realizes the in-region BFS depth
    rng = random.Random(41)
    pol = table(toy_space, lambda s: rng.randrange(2))
    expl = stache_exact(toy_space, pol, SEED)
    for target in sorted(expl.region.states, key=toy_space.sort_key):
        with_parents = shortest_invariant_path(expl, target)
        back = explanation_from_json(expl.to_json())
        rebuilt = shortest_invariant_path(back, target)
        assert len(with_parents) == len(rebuilt)


# -- serialization -------------------------------------------------------


def test_explanation_json_roundtrip_and_determinism(toy_space):
    rng = random.Random(43)
    pol = table(toy_space, lambda s: rng.randrange(3))
    expl = stache_exact(toy_space, pol, SEED)
    text = expl.to_json()
    assert text == stache_exact(toy_space, pol, SEED).to_json()
    back = explanation_from_json(text)
    assert back.region == expl.region
    assert back.counterfactuals == expl.counterfactuals
    assert back.boundary == expl.boundary
    assert back.to_json() == text


def test_explanation_json_action_names(toy_space):
    expl = stache_exact(toy_space, isolating_policy(toy_space, SEED), SEED)
    doc = expl.to_dict(action_names=("stay", "go"))
    assert doc["seed_action_name"] == "go"
    assert all(m["action_name"] == "stay"
               for m in doc["counterfactuals"]["members"])


def test_explanation_json_rejects_wrong_schema(toy_space):
    expl = stache_exact(toy_space, constant_policy(toy_space), SEED)
    with pytest.raises(ValueError):
        explanation_from_json(expl.to_json().replace(
            "stache-explanation/1", "bogus/1"
        ))


def test_stats_never_serialize_wall_time(toy_space):
    expl = stache_exact(toy_space, constant_policy(toy_space), SEED)
    assert "wall_time" not in expl.to_json()
    assert expl.stats.wall_time_s >= 0.0

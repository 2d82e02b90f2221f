"""Exact and cutoff breadth-first explanation search.

The exact engine maps the whole connected action-invariant component around a
seed decision plus every boundary state where the action changes.  The cutoff
engine stops expanding once the closest counterfactual layer is resolved,
returning the complete minimal-counterfactual set and the partial region
inside that radius.  Both are strict FIFO searches with the fixed neighbor
order from factored_space, so identical inputs give identical outputs.
"""

from __future__ import annotations

import json
import math
import time
from collections import deque
from dataclasses import dataclass, field

from .errors import (
    InvalidStateError,
    NotInRegionError,
    PolicyQueryError,
    RegionCapExceededError,
)
from .factored_space import (
    Factorization,
    factorization_from_dict,
    factorization_to_dict,
    hybrid_distance,
    immediate_neighbors,
)
from .policies.base import as_policy

EXPLANATION_SCHEMA = "stache-explanation/1"

MODE_EXACT = "exact"
MODE_CUTOFF = "cutoff"

# How the counterfactual distance should be read: a global minimum over the
# whole space, or minimal only among states reachable through the region
# (the weaker guarantee once a validity mask hides states).
MINIMALITY_GLOBAL = "global"
MINIMALITY_CONNECTIVITY = "connectivity"


@dataclass
class SearchConfig:
    """Knobs shared by both search modes."""

    max_region: int | None = None
    mask: object = None          # optional validity predicate: state -> bool
    batch: bool = False          # evaluate the policy one BFS layer at a time
    track_parents: bool = True


@dataclass(frozen=True)
class RobustnessRegion:
    seed: tuple
    seed_action: int
    states: frozenset

    @property
    def size(self):
        return len(self.states)


@dataclass(frozen=True)
class CounterfactualSet:
    """Different-action states at the minimal discovered distance.

    ``min_distance`` is None when the search found no counterfactual at all
    (a constant policy over the searched component); no distance is invented
    for that case.
    """

    min_distance: int | None
    states: frozenset  # of (state, action) pairs

    @property
    def found(self):
        return self.min_distance is not None


@dataclass(frozen=True)
class SearchStats:
    visited_states: int          # popped and policy-queried
    enqueued_states: int         # marked visited at enqueue time
    policy_queries: int
    max_queried_distance: int    # hybrid distance, max over queried states
    wall_time_s: float = 0.0     # informational; never serialized


@dataclass(frozen=True)
class CompositeExplanation:
    factorization: Factorization
    mode: str
    seed: tuple
    seed_action: int
    region: RobustnessRegion
    counterfactuals: CounterfactualSet
    boundary: frozenset           # non-minimal (state, action) pairs, exact mode
    stats: SearchStats
    truncated_region: bool
    minimality: str
    parents: dict | None = field(default=None, compare=False, repr=False)

    def to_dict(self, action_names=None):
        f = self.factorization

        def name_of(a):
            if action_names is not None and 0 <= a < len(action_names):
                return action_names[a]
            return None

        def pair_list(pairs):
            ordered = sorted(pairs, key=lambda p: f.sort_key(p[0]))
            out = []
            for s, a in ordered:
                item = {"state": list(s), "action": a}
                if action_names is not None:
                    item["action_name"] = name_of(a)
                out.append(item)
            return out

        doc = {
            "schema": EXPLANATION_SCHEMA,
            "mode": self.mode,
            "seed": list(self.seed),
            "seed_action": self.seed_action,
        }
        if action_names is not None:
            doc["seed_action_name"] = name_of(self.seed_action)
        doc["minimality"] = self.minimality
        doc["truncated_region"] = self.truncated_region
        doc["factorization"] = factorization_to_dict(f)
        doc["region"] = {
            "size": self.region.size,
            "states": [list(s) for s in sorted(self.region.states, key=f.sort_key)],
        }
        doc["counterfactuals"] = {
            "found": self.counterfactuals.found,
            "min_distance": self.counterfactuals.min_distance,
            "count": len(self.counterfactuals.states),
            "members": pair_list(self.counterfactuals.states),
        }
        doc["boundary"] = pair_list(self.boundary)
        doc["stats"] = {
            "visited_states": self.stats.visited_states,
            "enqueued_states": self.stats.enqueued_states,
            "policy_queries": self.stats.policy_queries,
            "max_queried_distance": self.stats.max_queried_distance,
        }
        return doc

    def to_json(self, action_names=None):
        return json.dumps(self.to_dict(action_names), indent=2) + "\n"


def explanation_from_dict(doc) -> CompositeExplanation:
    if doc.get("schema") != EXPLANATION_SCHEMA:
        raise ValueError(f"unexpected explanation schema: {doc.get('schema')!r}")
    f = factorization_from_dict(doc["factorization"])
    region = RobustnessRegion(
        seed=tuple(doc["seed"]),
        seed_action=doc["seed_action"],
        states=frozenset(tuple(s) for s in doc["region"]["states"]),
    )
    cf_doc = doc["counterfactuals"]
    counterfactuals = CounterfactualSet(
        min_distance=cf_doc["min_distance"],
        states=frozenset(
            (tuple(m["state"]), m["action"]) for m in cf_doc["members"]
        ),
    )
    boundary = frozenset((tuple(m["state"]), m["action"]) for m in doc["boundary"])
    stats_doc = doc["stats"]
    stats = SearchStats(
        visited_states=stats_doc["visited_states"],
        enqueued_states=stats_doc["enqueued_states"],
        policy_queries=stats_doc["policy_queries"],
        max_queried_distance=stats_doc["max_queried_distance"],
    )
    return CompositeExplanation(
        factorization=f,
        mode=doc["mode"],
        seed=tuple(doc["seed"]),
        seed_action=doc["seed_action"],
        region=region,
        counterfactuals=counterfactuals,
        boundary=boundary,
        stats=stats,
        truncated_region=doc["truncated_region"],
        minimality=doc["minimality"],
    )


def explanation_from_json(text) -> CompositeExplanation:
    return explanation_from_dict(json.loads(text))


class _Run:
    """Shared bookkeeping for one search: query counting and error wrapping."""

    def __init__(self, f, policy, seed, config):
        config = config or SearchConfig()
        f.validate_state(seed)
        if config.mask is not None and not config.mask(seed):
            raise InvalidStateError(f"seed state {seed!r} is masked out")
        self.f = f
        self.policy = as_policy(policy)
        self.seed = seed
        self.config = config
        self.queries = 0
        self.max_dist = 0
        self.started = time.perf_counter()

    def ask(self, state):
        self.queries += 1
        self.max_dist = max(self.max_dist, hybrid_distance(self.f, self.seed, state))
        try:
            action = self.policy.query(state)
        except PolicyQueryError:
            raise
        except Exception as exc:
            raise PolicyQueryError(state, f"policy raised {type(exc).__name__}") from exc
        if isinstance(action, bool) or not isinstance(action, int):
            raise PolicyQueryError(state, f"non-integer action {action!r}")
        return action

    def ask_layer(self, states):
        """One query per state, batched when configured and supported."""
        if self.config.batch and hasattr(self.policy, "query_batch"):
            self.queries += len(states)
            for s in states:
                self.max_dist = max(
                    self.max_dist, hybrid_distance(self.f, self.seed, s)
                )
            try:
                actions = list(self.policy.query_batch(list(states)))
            except PolicyQueryError:
                raise
            except Exception as exc:
                raise PolicyQueryError(
                    states[0], f"policy raised {type(exc).__name__}"
                ) from exc
            if len(actions) != len(states):
                raise PolicyQueryError(states[0], "misaligned batch answer")
            for s, a in zip(states, actions):
                if isinstance(a, bool) or not isinstance(a, int):
                    raise PolicyQueryError(s, f"non-integer action {a!r}")
            return actions
        return [self.ask(s) for s in states]

    def neighbors(self, state):
        out = immediate_neighbors(self.f, state)
        if self.config.mask is not None:
            out = [s for s in out if self.config.mask(s)]
        return out

    def stats(self, visited, enqueued):
        return SearchStats(
            visited_states=visited,
            enqueued_states=enqueued,
            policy_queries=self.queries,
            max_queried_distance=self.max_dist,
            wall_time_s=time.perf_counter() - self.started,
        )


def _finish(run, mode, seed_action, region, cf_min, cf_members, boundary,
            truncated, visited, enqueued, parents):
    minimality = (
        MINIMALITY_GLOBAL if run.config.mask is None else MINIMALITY_CONNECTIVITY
    )
    return CompositeExplanation(
        factorization=run.f,
        mode=mode,
        seed=run.seed,
        seed_action=seed_action,
        region=RobustnessRegion(run.seed, seed_action, frozenset(region)),
        counterfactuals=CounterfactualSet(cf_min, frozenset(cf_members)),
        boundary=frozenset(boundary),
        stats=run.stats(visited, enqueued),
        truncated_region=truncated,
        minimality=minimality,
        parents=parents if run.config.track_parents else None,
    )


def stache_exact(f: Factorization, policy, seed: tuple,
                 config: SearchConfig | None = None) -> CompositeExplanation:
    """Full region search: expand every same-action state, record every
    boundary state, then split the boundary at the minimal hybrid distance.

    The minimal-counterfactual filter uses the metric distance to the seed,
    not BFS depth: a boundary state can be discovered deeper than its metric
    distance when the short route leaves the region.
    """
    run = _Run(f, policy, seed, config)
    cap = run.config.max_region

    visited_mark = {seed}
    parents = {seed: None}
    queue = deque([seed])
    region = set()
    raw_boundary = []
    seed_action = None
    processed = 0

    def cap_error():
        # Counterfactuals stay unset in the partial result: the minimal layer
        # cannot be certified before the region is fully mapped.
        partial = _finish(
            run, MODE_EXACT, seed_action, region, None, [],
            raw_boundary, True, processed, len(visited_mark), parents,
        )
        return RegionCapExceededError(cap, partial)

    while queue:
        layer = [queue.popleft()] if not run.config.batch else _drain(queue)
        actions = run.ask_layer(layer)
        processed += len(layer)
        if seed_action is None:
            seed_action = actions[0]
        for s, a in zip(layer, actions):
            if a == seed_action:
                region.add(s)
                if cap is not None and len(region) > cap:
                    raise cap_error()
                for s2 in run.neighbors(s):
                    if s2 not in visited_mark:
                        visited_mark.add(s2)
                        parents[s2] = s
                        queue.append(s2)
            else:
                raw_boundary.append((s, a))

    if raw_boundary:
        dists = [hybrid_distance(f, seed, s) for s, _ in raw_boundary]
        cf_min = min(dists)
        cf_members = [p for p, d in zip(raw_boundary, dists) if d == cf_min]
        boundary = [p for p, d in zip(raw_boundary, dists) if d != cf_min]
    else:
        cf_min, cf_members, boundary = None, [], []

    return _finish(run, MODE_EXACT, seed_action, region, cf_min, cf_members,
                   boundary, False, processed, len(visited_mark), parents)


def _drain(queue):
    layer = list(queue)
    queue.clear()
    return layer


def stache_cutoff(f: Factorization, policy, seed: tuple,
                  config: SearchConfig | None = None) -> CompositeExplanation:
    """Pruned search: stop expanding past the first fully resolved layer of
    counterfactuals.  Returns the complete minimal-counterfactual set and the
    portion of the region within that distance."""
    run = _Run(f, policy, seed, config)
    cap = run.config.max_region

    visited_mark = {seed}
    parents = {seed: None}
    queue = deque([(seed, 0)])
    region = set()
    cf_members = []
    min_dist = math.inf
    seed_action = None
    truncated = False
    processed = 0

    while queue:
        if run.config.batch:
            # Drain exactly one depth layer; depths in the queue never decrease.
            depth = queue[0][1]
            entries = []
            while queue and queue[0][1] == depth:
                entries.append(queue.popleft())
            if depth > min_dist:
                # Entries queued before min_dist tightened; dropping them
                # unqueried means the region may extend past the cutoff.
                truncated = True
                continue
        else:
            entry = queue.popleft()
            if entry[1] > min_dist:
                truncated = True
                continue
            entries = [entry]
        actions = run.ask_layer([s for s, _ in entries])
        processed += len(entries)
        if seed_action is None:
            seed_action = actions[0]
        for (s, d), a in zip(entries, actions):
            if a != seed_action:
                if d < min_dist:
                    min_dist = d
                    cf_members = [(s, a)]
                else:  # BFS order makes d == min_dist the only other case
                    cf_members.append((s, a))
            else:
                region.add(s)
                if cap is not None and len(region) > cap:
                    partial = _finish(
                        run, MODE_CUTOFF, seed_action, region, None, [],
                        cf_members, True, processed, len(visited_mark), parents,
                    )
                    raise RegionCapExceededError(cap, partial)
                for s2 in run.neighbors(s):
                    if s2 not in visited_mark:
                        if d + 1 <= min_dist:
                            visited_mark.add(s2)
                            parents[s2] = s
                            queue.append((s2, d + 1))
                        else:
                            truncated = True

    cf_min = None if min_dist is math.inf else int(min_dist)
    return _finish(run, MODE_CUTOFF, seed_action, region, cf_min, cf_members,
                   [], truncated, processed, len(visited_mark), parents)


def shortest_invariant_path(expl: CompositeExplanation, target: tuple) -> list:
    """Seed-to-target path through the region, one unit step at a time.

    Uses the BFS parent links when the explanation still carries them,
    otherwise replays a BFS restricted to the stored region states (which
    yields the same depths, since the original search never expanded
    non-region states).
    """
    if target not in expl.region.states:
        raise NotInRegionError(f"state {target!r} is not in the robustness region")
    parents = expl.parents
    if parents is None or target not in parents:
        parents = _region_parents(expl)
    path = [target]
    while path[-1] != expl.seed:
        path.append(parents[path[-1]])
    path.reverse()
    return path


def _region_parents(expl):
    members = expl.region.states
    parents = {expl.seed: None}
    queue = deque([expl.seed])
    while queue:
        s = queue.popleft()
        for s2 in immediate_neighbors(expl.factorization, s):
            if s2 in members and s2 not in parents:
                parents[s2] = s
                queue.append(s2)
    return parents

"""Brute-force ground truth for regions and minimal counterfactuals.

Deliberately shares nothing with the search module beyond the space
primitives: regions come from union-find over a precomputed edge list,
counterfactuals from an exhaustive distance scan with no graph traversal.
Slow as intended; correctness reference only.
"""

from __future__ import annotations

from .errors import SpaceTooLargeError
from .factored_space import enumerate_space, hybrid_distance, immediate_neighbors
from .policies.base import as_policy

DEFAULT_ORACLE_CAP = 1_000_000


class UnionFind:
    """Disjoint sets over 0..n-1 with path compression and union by size."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


class ComponentLabeling:
    """Connected components of the same-action subgraph, all seeds at once."""

    def __init__(self, f, policy, cap=DEFAULT_ORACLE_CAP, mask=None):
        policy = as_policy(policy)
        states = list(enumerate_space(f, cap))
        if mask is not None:
            states = [s for s in states if mask(s)]
        self.f = f
        self.states = states
        self.pos = {s: i for i, s in enumerate(states)}
        self.actions = [policy.query(s) for s in states]
        self.uf = UnionFind(len(states))
        for i, s in enumerate(states):
            for s2 in immediate_neighbors(f, s):
                j = self.pos.get(s2)
                if j is not None and j > i and self.actions[j] == self.actions[i]:
                    self.uf.union(i, j)

    def region_of(self, seed):
        root = self.uf.find(self.pos[seed])
        return frozenset(
            s for i, s in enumerate(self.states) if self.uf.find(i) == root
        )

    def action_of(self, seed):
        return self.actions[self.pos[seed]]


def oracle_region(f, policy, seed, cap=DEFAULT_ORACLE_CAP, mask=None):
    """Connected same-action component containing the seed, via union-find."""
    if f.size() > cap:
        raise SpaceTooLargeError(f"space has {f.size()} states, oracle cap {cap}")
    return ComponentLabeling(f, policy, cap, mask).region_of(seed)


def oracle_min_counterfactuals(f, policy, seed, cap=DEFAULT_ORACLE_CAP, mask=None):
    """Global minimal counterfactuals by scanning every state in the space.

    Returns ``(min_distance, states)``; ``(None, frozenset())`` when the
    policy never deviates from its action at the seed.
    """
    if f.size() > cap:
        raise SpaceTooLargeError(f"space has {f.size()} states, oracle cap {cap}")
    policy = as_policy(policy)
    seed_action = policy.query(seed)
    best = None
    members = []
    for s in enumerate_space(f, cap):
        if mask is not None and not mask(s):
            continue
        if policy.query(s) == seed_action:
            continue
        d = hybrid_distance(f, seed, s)
        if best is None or d < best:
            best = d
            members = [s]
        elif d == best:
            members.append(s)
    return best, frozenset(members)

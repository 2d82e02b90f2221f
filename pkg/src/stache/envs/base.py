"""Enumerable deterministic environment models.

A model bundles the factorization, named actions, a deterministic transition
function and an explicit initial-state list.  Transitions return
``(successor, reward, done)``; a ``done`` successor ends the episode and is
never expanded when computing the reachable set.
"""

from __future__ import annotations

from collections import deque


class EnvironmentModel:
    """Immutable deterministic single-agent model over a factored space."""

    def __init__(self, name, factorization, action_names, transition, discount,
                 initial_states):
        self.name = name
        self.factorization = factorization
        self.action_names = tuple(action_names)
        self._transition = transition
        self.discount = discount
        self.initial_states = tuple(initial_states)
        self._reachable = None

    @property
    def n_actions(self):
        return len(self.action_names)

    def transition(self, state, action):
        """Deterministic step: returns (successor, reward, done)."""
        if not 0 <= action < self.n_actions:
            raise ValueError(f"action {action} out of range for {self.name}")
        return self._transition(state, action)

    def encode(self, state):
        """Native integer id of a state (mixed-radix rank in factor order)."""
        return self.factorization.state_index(state)

    def decode(self, native_id):
        return self.factorization.state_from_index(native_id)

    def reachable_states(self):
        """Closure of the initial distribution under the dynamics.

        States entered through a ``done`` transition are counted as reachable
        but not expanded further, matching episode semantics.
        """
        if self._reachable is None:
            seen = set(self.initial_states)
            frontier = deque(self.initial_states)
            while frontier:
                s = frontier.popleft()
                for a in range(self.n_actions):
                    s2, _, done = self._transition(s, a)
                    if s2 not in seen:
                        seen.add(s2)
                        if not done:
                            frontier.append(s2)
            self._reachable = frozenset(seen)
        return self._reachable

    def is_reachable(self, state):
        return state in self.reachable_states()

    def __repr__(self):
        return (f"EnvironmentModel({self.name!r}, "
                f"{self.factorization.size()} states, {self.n_actions} actions)")

"""Deterministic black-box policies and their JSON table persistence."""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import (
    FactorizationMismatchError,
    IncompletePolicyError,
    InvalidStateError,
)
from ..factored_space import (
    Factorization,
    enumerate_space,
    factorization_from_dict,
    factorization_to_dict,
)

POLICY_SCHEMA = "stache-policy/1"


class TablePolicy:
    """Total deterministic policy backed by an explicit state -> action table."""

    def __init__(self, factorization: Factorization, table: dict, metadata=None):
        self.factorization = factorization
        self._table = dict(table)
        self.metadata = dict(metadata or {})
        n = factorization.size()
        if len(self._table) != n:
            self._raise_incomplete()

    def _raise_incomplete(self):
        for s in enumerate_space(self.factorization, cap=None):
            if s not in self._table:
                raise IncompletePolicyError(s)
        raise IncompletePolicyError(None, "policy table has extra entries")

    @classmethod
    def from_index_array(cls, factorization, actions, metadata=None):
        """Build from an action array indexed by native state id."""
        table = {}
        for i, s in enumerate(enumerate_space(factorization, cap=None)):
            table[s] = int(actions[i])
        return cls(factorization, table, metadata)

    def query(self, state) -> int:
        try:
            return self._table[state]
        except KeyError:
            self.factorization.validate_state(state)
            raise  # unreachable for a validated state: table is total

    def query_batch(self, states):
        return [self.query(s) for s in states]

    def __call__(self, state):
        return self.query(state)

    def items(self):
        """Entries in native-id order."""
        for s in enumerate_space(self.factorization, cap=None):
            yield s, self._table[s]


class CallablePolicy:
    """Adapter giving a plain function the policy interface."""

    def __init__(self, fn, metadata=None):
        self._fn = fn
        self.metadata = dict(metadata or {})

    def query(self, state):
        return self._fn(state)

    def query_batch(self, states):
        return [self._fn(s) for s in states]

    def __call__(self, state):
        return self._fn(state)


def as_policy(obj):
    """Accept either a policy object or a bare callable."""
    if hasattr(obj, "query"):
        return obj
    if callable(obj):
        return CallablePolicy(obj)
    raise TypeError(f"not a policy: {obj!r}")


def save_policy_table(policy, path, factorization=None):
    """Write a policy as a stache-policy/1 JSON table covering the full space."""
    factorization = factorization or getattr(policy, "factorization", None)
    if factorization is None:
        raise ValueError("factorization required to tabulate this policy")
    policy = as_policy(policy)
    entries = []
    for s in enumerate_space(factorization, cap=None):
        entries.append([list(s), int(policy.query(s))])
    doc = {
        "schema": POLICY_SCHEMA,
        "factorization": factorization_to_dict(factorization),
        "metadata": dict(getattr(policy, "metadata", {}) or {}),
        "entries": entries,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_policy_table(path, expect_factorization=None) -> TablePolicy:
    """Load a stache-policy/1 table; validates schema, totality and domains.

    Entries may list explicit state values or native integer ids.
    """
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != POLICY_SCHEMA:
        raise ValueError(f"unexpected policy schema: {doc.get('schema')!r}")
    factorization = factorization_from_dict(doc["factorization"])
    if expect_factorization is not None and factorization != expect_factorization:
        raise FactorizationMismatchError(
            f"policy table factorization does not match expected "
            f"({factorization.names} vs {expect_factorization.names})"
        )
    table = {}
    for entry in doc["entries"]:
        key, action = entry
        if isinstance(key, list):
            state = tuple(key)
            factorization.validate_state(state)
        elif isinstance(key, int):
            state = factorization.state_from_index(key)
        else:
            raise InvalidStateError(f"bad table key: {key!r}")
        if state in table and table[state] != int(action):
            raise ValueError(f"conflicting table entries for state {state}")
        table[state] = int(action)
    for s in enumerate_space(factorization, cap=None):
        if s not in table:
            raise IncompletePolicyError(s)
    return TablePolicy(factorization, table, doc.get("metadata"))

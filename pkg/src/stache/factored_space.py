"""Factored state spaces: typed factors, the hybrid metric, and unit neighbors.

A state is a plain tuple with one value per factor.  Numerical factors are
bounded integer ranges and contribute Manhattan distance; categorical factors
are finite unordered sets and contribute Hamming distance.  Two states at
hybrid distance exactly 1 are unit neighbors, which induces the similarity
graph that every search in this package traverses.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .errors import InvalidStateError, SpaceTooLargeError

FACTORIZATION_SCHEMA = "stache-factorization/1"

# Guard for full-space enumeration; callers may raise it explicitly.
DEFAULT_SPACE_CAP = 1_000_000


@dataclass(frozen=True)
class NumericalFactor:
    """Contiguous integer range [lo, hi], both bounds inclusive."""

    name: str
    lo: int
    hi: int

    def __post_init__(self):
        if not isinstance(self.lo, int) or not isinstance(self.hi, int):
            raise ValueError(f"factor {self.name!r}: bounds must be integers")
        if self.lo > self.hi:
            raise ValueError(f"factor {self.name!r}: lo={self.lo} > hi={self.hi}")

    @property
    def domain(self):
        return tuple(range(self.lo, self.hi + 1))

    def __contains__(self, value):
        return isinstance(value, int) and self.lo <= value <= self.hi


@dataclass(frozen=True)
class CategoricalFactor:
    """Finite set of symbols; order fixes iteration, not distance."""

    name: str
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError(f"factor {self.name!r}: empty categorical domain")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"factor {self.name!r}: duplicate categorical values")

    @property
    def domain(self):
        return self.values

    def __contains__(self, value):
        return value in self.values


@dataclass(frozen=True)
class Factorization:
    """Ordered factor list; the state space is the Cartesian product of domains."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("factorization needs at least one factor")
        names = [f.name for f in self.factors]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate factor names: {names}")
        for f in self.factors:
            if not isinstance(f, (NumericalFactor, CategoricalFactor)):
                raise TypeError(f"unsupported factor spec: {f!r}")

    def __len__(self):
        return len(self.factors)

    @property
    def names(self):
        return tuple(f.name for f in self.factors)

    def size(self):
        """Number of states in the full product space."""
        n = 1
        for f in self.factors:
            n *= len(f.domain)
        return n

    def validate_state(self, state):
        """Raise InvalidStateError unless ``state`` lies in the product space."""
        if not isinstance(state, tuple):
            raise InvalidStateError(f"state must be a tuple, got {type(state).__name__}")
        if len(state) != len(self.factors):
            raise InvalidStateError(
                f"state has {len(state)} values, expected {len(self.factors)}"
            )
        for f, v in zip(self.factors, state):
            if v not in f:
                raise InvalidStateError(
                    f"value {v!r} outside domain of factor {f.name!r}"
                )

    def is_valid_state(self, state):
        try:
            self.validate_state(state)
        except InvalidStateError:
            return False
        return True

    def state_index(self, state):
        """Mixed-radix rank of ``state`` in lexicographic factor order.

        Doubles as the canonical native id for environments whose id layout
        follows factor order (Taxi's conventional encoding does).
        """
        self.validate_state(state)
        idx = 0
        for f, v in zip(self.factors, state):
            if isinstance(f, NumericalFactor):
                pos = v - f.lo
            else:
                pos = f.values.index(v)
            idx = idx * len(f.domain) + pos
        return idx

    def state_from_index(self, idx):
        """Inverse of state_index."""
        if not 0 <= idx < self.size():
            raise InvalidStateError(f"state index {idx} out of range")
        positions = []
        for f in reversed(self.factors):
            idx, pos = divmod(idx, len(f.domain))
            positions.append(pos)
        positions.reverse()
        return tuple(f.domain[p] for f, p in zip(self.factors, positions))

    def sort_key(self, state):
        """Total order on states: lexicographic by position within each domain."""
        key = []
        for f, v in zip(self.factors, state):
            if isinstance(f, NumericalFactor):
                key.append(v - f.lo)
            else:
                key.append(f.values.index(v))
        return tuple(key)


def hybrid_distance(f: Factorization, a: tuple, b: tuple) -> int:
    """Manhattan distance over numerical factors plus Hamming over categorical."""
    f.validate_state(a)
    f.validate_state(b)
    total = 0
    for spec, x, y in zip(f.factors, a, b):
        if isinstance(spec, NumericalFactor):
            total += abs(x - y)
        elif x != y:
            total += 1
    return total


def immediate_neighbors(f: Factorization, s: tuple) -> list:
    """All states at hybrid distance exactly 1 from ``s``, in fixed order.

    Factors are scanned in index order; a numerical factor yields the -1 step
    then the +1 step (when in bounds); a categorical factor yields every other
    domain value in domain order.
    """
    f.validate_state(s)
    out = []
    for j, spec in enumerate(f.factors):
        v = s[j]
        if isinstance(spec, NumericalFactor):
            if v - 1 >= spec.lo:
                out.append(s[:j] + (v - 1,) + s[j + 1:])
            if v + 1 <= spec.hi:
                out.append(s[:j] + (v + 1,) + s[j + 1:])
        else:
            for w in spec.values:
                if w != v:
                    out.append(s[:j] + (w,) + s[j + 1:])
    return out


def enumerate_space(f: Factorization, cap: int = DEFAULT_SPACE_CAP):
    """Yield every state of the product space once, in lexicographic order."""
    n = f.size()
    if cap is not None and n > cap:
        raise SpaceTooLargeError(f"space has {n} states, cap is {cap}")
    return itertools.product(*(spec.domain for spec in f.factors))


def factorization_to_dict(f: Factorization) -> dict:
    factors = []
    for spec in f.factors:
        if isinstance(spec, NumericalFactor):
            factors.append(
                {"name": spec.name, "kind": "numerical", "lo": spec.lo, "hi": spec.hi}
            )
        else:
            factors.append(
                {"name": spec.name, "kind": "categorical", "values": list(spec.values)}
            )
    return {"schema": FACTORIZATION_SCHEMA, "factors": factors}


def factorization_from_dict(doc: dict) -> Factorization:
    if doc.get("schema") != FACTORIZATION_SCHEMA:
        raise ValueError(f"unexpected factorization schema: {doc.get('schema')!r}")
    factors = []
    for item in doc["factors"]:
        kind = item.get("kind")
        if kind == "numerical":
            factors.append(NumericalFactor(item["name"], item["lo"], item["hi"]))
        elif kind == "categorical":
            factors.append(CategoricalFactor(item["name"], tuple(item["values"])))
        else:
            raise ValueError(f"unknown factor kind: {kind!r}")
    return Factorization(tuple(factors))


def factorization_to_json(f: Factorization) -> str:
    return json.dumps(factorization_to_dict(f), indent=2) + "\n"


def factorization_from_json(text: str) -> Factorization:
    return factorization_from_dict(json.loads(text))

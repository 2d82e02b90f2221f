"""Exception types shared across the package."""


class StacheError(Exception):
    """Base class for all package errors."""


class InvalidStateError(StacheError):
    """A state tuple does not belong to the factorization's product space."""


class SpaceTooLargeError(StacheError):
    """Full enumeration of the product space would exceed the configured cap."""


class PolicyQueryError(StacheError):
    """A policy failed to answer a query; carries the offending state."""

    def __init__(self, state, message="policy query failed"):
        super().__init__(f"{message}: state={state!r}")
        self.state = state


class DeterminismViolationError(PolicyQueryError):
    """An external policy returned two different actions for the same state."""

    def __init__(self, state, first, second):
        super().__init__(
            state, f"non-deterministic policy: got {second} after {first}"
        )
        self.first = first
        self.second = second


class IncompletePolicyError(StacheError):
    """A policy table does not cover the full product space."""

    def __init__(self, state, message="policy table missing state"):
        super().__init__(f"{message}: {state!r}")
        self.state = state


class FactorizationMismatchError(StacheError):
    """Two components disagree about the factorization they operate on."""


class RegionCapExceededError(StacheError):
    """The robustness region outgrew the configured size cap.

    ``partial`` holds the explanation accumulated before the cap was hit.
    """

    def __init__(self, cap, partial):
        super().__init__(f"region size exceeded cap of {cap} states")
        self.cap = cap
        self.partial = partial


class NotInRegionError(StacheError):
    """A path was requested to a state outside the robustness region."""


class TrainingError(StacheError):
    """A trainer failed to converge within its iteration budget."""


class RenderSchemaError(StacheError):
    """An explanation document does not match the expected schema."""

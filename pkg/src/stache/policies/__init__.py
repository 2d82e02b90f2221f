from .base import (
    POLICY_SCHEMA,
    CallablePolicy,
    TablePolicy,
    as_policy,
    load_policy_table,
    save_policy_table,
)
from .external import RPC_SCHEMA, ExternalPolicy, ProtocolConfig, external_policy
from .training import (
    CheckpointSet,
    evaluate_policy,
    q_learning_with_checkpoints,
    value_iteration,
)

__all__ = [
    "POLICY_SCHEMA",
    "RPC_SCHEMA",
    "TablePolicy",
    "CallablePolicy",
    "as_policy",
    "save_policy_table",
    "load_policy_table",
    "ExternalPolicy",
    "ProtocolConfig",
    "external_policy",
    "CheckpointSet",
    "value_iteration",
    "q_learning_with_checkpoints",
    "evaluate_policy",
]

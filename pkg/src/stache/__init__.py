"""Exact black-box explanations for deterministic policies on factored
discrete state spaces: robustness regions and minimal counterfactuals."""

from .errors import (
    DeterminismViolationError,
    FactorizationMismatchError,
    IncompletePolicyError,
    InvalidStateError,
    NotInRegionError,
    PolicyQueryError,
    RegionCapExceededError,
    RenderSchemaError,
    SpaceTooLargeError,
    StacheError,
    TrainingError,
)
from .factored_space import (
    CategoricalFactor,
    Factorization,
    NumericalFactor,
    enumerate_space,
    factorization_from_dict,
    factorization_from_json,
    factorization_to_dict,
    factorization_to_json,
    hybrid_distance,
    immediate_neighbors,
)
from .envs import EnvironmentModel, make_env, minigrid_model, taxi_model
from .policies import (
    CallablePolicy,
    CheckpointSet,
    ExternalPolicy,
    ProtocolConfig,
    TablePolicy,
    as_policy,
    evaluate_policy,
    external_policy,
    load_policy_table,
    q_learning_with_checkpoints,
    save_policy_table,
    value_iteration,
)
from .search import (
    MODE_CUTOFF,
    MODE_EXACT,
    CompositeExplanation,
    CounterfactualSet,
    RobustnessRegion,
    SearchConfig,
    SearchStats,
    explanation_from_dict,
    explanation_from_json,
    shortest_invariant_path,
    stache_cutoff,
    stache_exact,
)
from .oracle import ComponentLabeling, oracle_min_counterfactuals, oracle_region
from .estimators import QLearningAgent, StacheExplainer, ValueIterationAgent
from .render import render_svg, render_text

__version__ = "0.1.0"

__all__ = [
    "StacheError",
    "InvalidStateError",
    "SpaceTooLargeError",
    "PolicyQueryError",
    "DeterminismViolationError",
    "IncompletePolicyError",
    "FactorizationMismatchError",
    "RegionCapExceededError",
    "NotInRegionError",
    "TrainingError",
    "RenderSchemaError",
    "NumericalFactor",
    "CategoricalFactor",
    "Factorization",
    "hybrid_distance",
    "immediate_neighbors",
    "enumerate_space",
    "factorization_to_dict",
    "factorization_from_dict",
    "factorization_to_json",
    "factorization_from_json",
    "EnvironmentModel",
    "make_env",
    "taxi_model",
    "minigrid_model",
    "TablePolicy",
    "CallablePolicy",
    "as_policy",
    "CheckpointSet",
    "ExternalPolicy",
    "ProtocolConfig",
    "external_policy",
    "save_policy_table",
    "load_policy_table",
    "value_iteration",
    "q_learning_with_checkpoints",
    "evaluate_policy",
    "MODE_EXACT",
    "MODE_CUTOFF",
    "SearchConfig",
    "SearchStats",
    "RobustnessRegion",
    "CounterfactualSet",
    "CompositeExplanation",
    "stache_exact",
    "stache_cutoff",
    "shortest_invariant_path",
    "explanation_from_dict",
    "explanation_from_json",
    "ComponentLabeling",
    "oracle_region",
    "oracle_min_counterfactuals",
    "StacheExplainer",
    "ValueIterationAgent",
    "QLearningAgent",
    "render_svg",
    "render_text",
    "__version__",
]

"""Scikit-learn style wrappers around the explainer and the tabular trainers.

These follow the estimator contract (constructor stores hyperparameters
verbatim, ``fit`` returns self, fitted attributes carry a trailing
underscore, ``get_params``/``set_params`` work), so the pieces slot into
pipelines, grid searches and other ecosystem tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .policies import as_policy, q_learning_with_checkpoints, value_iteration
from .search import MODE_CUTOFF, MODE_EXACT, SearchConfig, stache_cutoff, stache_exact


def _as_state(row):
    """Coerce an array row to a plain state tuple (numpy scalars unboxed)."""
    return tuple(v.item() if isinstance(v, np.generic) else v for v in row)


class StacheExplainer(BaseEstimator):
    """Computes composite explanations for one policy over one factorization.

    ``fit`` binds the policy (analogous to how nearest-neighbor estimators
    bind their data); each ``explain`` call runs an independent search.
    """

    def __init__(self, mode=MODE_EXACT, max_region=None, batch=False):
        self.mode = mode
        self.max_region = max_region
        self.batch = batch

    def fit(self, policy, factorization=None):
        factorization = factorization or getattr(policy, "factorization", None)
        if factorization is None:
            raise ValueError("pass a factorization or a policy that carries one")
        self.policy_ = as_policy(policy)
        self.factorization_ = factorization
        return self

    def _config(self):
        return SearchConfig(max_region=self.max_region, batch=self.batch)

    def explain(self, state):
        check_is_fitted(self, "policy_")
        search = {MODE_EXACT: stache_exact, MODE_CUTOFF: stache_cutoff}[self.mode]
        return search(self.factorization_, self.policy_, tuple(state),
                      self._config())

    def predict(self, X):
        """Policy actions for an array-like of states; composes with sklearn
        metrics and model-selection utilities."""
        check_is_fitted(self, "policy_")
        return np.array([self.policy_.query(_as_state(row)) for row in X])


class ValueIterationAgent(BaseEstimator):
    """Exact dynamic-programming trainer; ``predict`` is the greedy policy."""

    def __init__(self, tol=1e-8, max_iter=100_000):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, model, y=None):
        self.model_ = model
        self.policy_ = value_iteration(model, tol=self.tol, max_iter=self.max_iter)
        return self

    def predict(self, X):
        check_is_fitted(self, "policy_")
        return np.array([self.policy_.query(_as_state(row)) for row in X])


class QLearningAgent(BaseEstimator):
    """Seeded tabular Q-learning with greedy snapshots along the run."""

    def __init__(self, episodes=2000, checkpoints=(0.0, 0.5, 1.0), seed=0,
                 alpha=0.25, epsilon_start=1.0, epsilon_final=0.05,
                 anneal_fraction=0.6, max_steps=200):
        self.episodes = episodes
        self.checkpoints = checkpoints
        self.seed = seed
        self.alpha = alpha
        self.epsilon_start = epsilon_start
        self.epsilon_final = epsilon_final
        self.anneal_fraction = anneal_fraction
        self.max_steps = max_steps

    def fit(self, model, y=None):
        self.model_ = model
        self.checkpoint_set_ = q_learning_with_checkpoints(
            model,
            episodes=self.episodes,
            checkpoints=self.checkpoints,
            seed=self.seed,
            alpha=self.alpha,
            epsilon_start=self.epsilon_start,
            epsilon_final=self.epsilon_final,
            anneal_fraction=self.anneal_fraction,
            max_steps=self.max_steps,
        )
        self.policy_ = self.checkpoint_set_.policies[-1]
        return self

    def predict(self, X):
        check_is_fitted(self, "policy_")
        return np.array([self.policy_.query(_as_state(row)) for row in X])

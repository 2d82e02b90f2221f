"""Tabular policy training: value iteration and checkpointed Q-learning.

Both trainers break argmax ties by lowest action index, so downstream region
and counterfactual numbers are reproducible bit for bit.  Q-learning snapshots
the greedy policy at requested fractions of the episode budget; the fraction-0
snapshot is the greedy policy of the randomly initialized table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError
from ..factored_space import enumerate_space
from .base import TablePolicy


def _transition_tables(model):
    """Dense (next_id, reward, done) arrays over the full product space."""
    f = model.factorization
    n = f.size()
    n_actions = model.n_actions
    next_id = np.empty((n, n_actions), dtype=np.int64)
    reward = np.empty((n, n_actions), dtype=np.float64)
    done = np.empty((n, n_actions), dtype=bool)
    for i, s in enumerate(enumerate_space(f, cap=None)):
        for a in range(n_actions):
            s2, r, dn = model.transition(s, a)
            next_id[i, a] = f.state_index(s2)
            reward[i, a] = r
            done[i, a] = dn
    return next_id, reward, done


def value_iteration(model, tol=1e-8, max_iter=100_000, metadata=None) -> TablePolicy:
    """Converged greedy policy; Bellman residual below ``tol`` everywhere."""
    next_id, reward, done = _transition_tables(model)
    gamma = model.discount
    v = np.zeros(model.factorization.size())
    for _ in range(max_iter):
        q = reward + gamma * np.where(done, 0.0, v[next_id])
        v_new = q.max(axis=1)
        residual = np.abs(v_new - v).max()
        v = v_new
        if residual < tol:
            break
    else:
        raise TrainingError(
            f"value iteration did not converge within {max_iter} iterations "
            f"(residual {residual:.3e})"
        )
    q = reward + gamma * np.where(done, 0.0, v[next_id])
    actions = q.argmax(axis=1)  # argmax takes the lowest index on ties
    meta = {"name": f"vi-{model.name}", "source": "value_iteration",
            "checkpoint": "converged"}
    meta.update(metadata or {})
    return TablePolicy.from_index_array(model.factorization, actions, meta)


@dataclass(frozen=True)
class CheckpointSet:
    """Greedy-policy snapshots at increasing fractions of a training run."""

    checkpoints: tuple  # ((fraction, TablePolicy), ...)
    seed: int
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        tags = [t for t, _ in self.checkpoints]
        if any(not 0.0 <= t <= 1.0 for t in tags):
            raise ValueError(f"checkpoint fractions must lie in [0, 1]: {tags}")
        if any(b <= a for a, b in zip(tags, tags[1:])):
            raise ValueError(f"checkpoint fractions must strictly increase: {tags}")

    @property
    def tags(self):
        return tuple(t for t, _ in self.checkpoints)

    @property
    def policies(self):
        return tuple(p for _, p in self.checkpoints)

    def policy_at(self, tag):
        for t, p in self.checkpoints:
            if t == tag:
                return p
        raise KeyError(f"no checkpoint at fraction {tag}")


def q_learning_with_checkpoints(
    model,
    episodes=2000,
    checkpoints=(0.0, 0.5, 1.0),
    seed=0,
    alpha=0.25,
    epsilon_start=1.0,
    epsilon_final=0.05,
    anneal_fraction=0.6,
    max_steps=200,
    init_scale=1e-2,
) -> CheckpointSet:
    """Seeded epsilon-greedy tabular Q-learning over the model's dynamics."""
    fractions = sorted(checkpoints)
    rng = np.random.default_rng(seed)
    f = model.factorization
    next_id, reward, done = _transition_tables(model)
    n, n_actions = reward.shape
    q = rng.uniform(0.0, init_scale, size=(n, n_actions))

    initial_ids = np.array([f.state_index(s) for s in model.initial_states])
    anneal_steps = max(1, int(anneal_fraction * episodes))

    def snapshot(tag):
        meta = {"name": f"q-{model.name}-{int(round(tag * 100)):03d}",
                "source": "q_learning",
                "checkpoint": f"{int(round(tag * 100))}%"}
        return tag, TablePolicy.from_index_array(f, q.argmax(axis=1), meta)

    targets = {}
    for tag in fractions:
        targets.setdefault(min(int(tag * episodes), episodes), []).append(tag)

    snaps = []
    gamma = model.discount
    for ep in range(episodes):
        for tag in targets.get(ep, ()):
            snaps.append(snapshot(tag))
        eps = epsilon_start + (epsilon_final - epsilon_start) * min(
            1.0, ep / anneal_steps
        )
        s = initial_ids[rng.integers(len(initial_ids))]
        for _ in range(max_steps):
            if rng.random() < eps:
                a = int(rng.integers(n_actions))
            else:
                a = int(q[s].argmax())
            s2, r, dn = next_id[s, a], reward[s, a], done[s, a]
            target = r if dn else r + gamma * q[s2].max()
            q[s, a] += alpha * (target - q[s, a])
            if dn:
                break
            s = s2
    for tag in targets.get(episodes, ()):
        snaps.append(snapshot(tag))

    hyper = {
        "episodes": episodes,
        "alpha": alpha,
        "epsilon_start": epsilon_start,
        "epsilon_final": epsilon_final,
        "anneal_fraction": anneal_fraction,
        "max_steps": max_steps,
        "init_scale": init_scale,
        "discount": gamma,
    }
    return CheckpointSet(tuple(snaps), seed=seed, hyperparameters=hyper)


def evaluate_policy(model, policy, episodes=200, seed=0, max_steps=200):
    """Mean undiscounted return of the greedy policy over seeded resets."""
    rng = np.random.default_rng(seed)
    initial = model.initial_states
    total = 0.0
    for _ in range(episodes):
        s = initial[rng.integers(len(initial))]
        for _ in range(max_steps):
            s, r, dn = model.transition(s, policy.query(s))
            total += r
            if dn:
                break
    return total / episodes

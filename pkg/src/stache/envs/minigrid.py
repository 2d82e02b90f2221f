"""Empty 6x6 grid with a wall border and a randomly placed goal.

The walkable interior is x, y in {1..4}.  State factors: agent x, agent y,
facing direction (0=right, 1=down, 2=left, 3=up, treated as categorical) and
goal x, goal y.  Reaching the goal ends the episode with reward 1; states
where the agent sits on the goal are absorbing.
"""

from __future__ import annotations

from ..factored_space import CategoricalFactor, Factorization, NumericalFactor
from .base import EnvironmentModel

ACTION_NAMES = ("TurnLeft", "TurnRight", "MoveForward")

# (dx, dy) per direction id: right, down, left, up.
_DIR_VECTORS = ((1, 0), (0, 1), (-1, 0), (0, -1))

LO, HI = 1, 4


def minigrid_factorization():
    return Factorization((
        NumericalFactor("agent_x", LO, HI),
        NumericalFactor("agent_y", LO, HI),
        CategoricalFactor("dir", (0, 1, 2, 3)),
        NumericalFactor("goal_x", LO, HI),
        NumericalFactor("goal_y", LO, HI),
    ))


def _step(state, action):
    ax, ay, d, gx, gy = state
    if (ax, ay) == (gx, gy):                    # absorbing once on the goal
        return state, 0.0, True
    if action == 0:                             # TurnLeft
        return (ax, ay, (d - 1) % 4, gx, gy), 0.0, False
    if action == 1:                             # TurnRight
        return (ax, ay, (d + 1) % 4, gx, gy), 0.0, False
    dx, dy = _DIR_VECTORS[d]
    nx, ny = ax + dx, ay + dy
    if not (LO <= nx <= HI and LO <= ny <= HI):  # bumped the border wall
        return state, 0.0, False
    if (nx, ny) == (gx, gy):
        return (nx, ny, d, gx, gy), 1.0, True
    return (nx, ny, d, gx, gy), 0.0, False


def _initial_states():
    states = []
    for ax in range(LO, HI + 1):
        for ay in range(LO, HI + 1):
            for d in range(4):
                for gx in range(LO, HI + 1):
                    for gy in range(LO, HI + 1):
                        if (ax, ay) != (gx, gy):
                            states.append((ax, ay, d, gx, gy))
    return states


def minigrid_model():
    return EnvironmentModel(
        name="minigrid",
        factorization=minigrid_factorization(),
        action_names=ACTION_NAMES,
        transition=_step,
        discount=0.95,
        initial_states=_initial_states(),
    )

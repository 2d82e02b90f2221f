"""Self-contained Taxi on the classic 5x5 map.

State factors: taxi row, taxi column, passenger index P (0..3 = landmark,
4 = in taxi) and destination index D (0..3).  Native ids follow the
conventional layout ``((row*5 + col)*5 + P)*4 + D``.
"""

from __future__ import annotations

from ..factored_space import CategoricalFactor, Factorization, NumericalFactor
from .base import EnvironmentModel

ACTION_NAMES = ("South", "North", "East", "West", "Pickup", "Dropoff")

# Landmarks R, G, Y, B in index order.
LANDMARKS = ((0, 0), (0, 4), (4, 0), (4, 3))

# (row, col) pairs with a wall on their east side.
_EAST_WALLS = frozenset({(0, 1), (1, 1), (3, 0), (3, 2), (4, 0), (4, 2)})

GRID = 5
SEED_S1 = (0, 0, 0, 2)
SEED_S2 = (0, 1, 2, 1)


def taxi_factorization():
    return Factorization((
        NumericalFactor("row", 0, GRID - 1),
        NumericalFactor("col", 0, GRID - 1),
        CategoricalFactor("P", (0, 1, 2, 3, 4)),
        CategoricalFactor("D", (0, 1, 2, 3)),
    ))


def _step(state, action):
    row, col, p, d = state
    reward = -1
    done = False
    if action == 0 and row < GRID - 1:          # South
        row += 1
    elif action == 1 and row > 0:               # North
        row -= 1
    elif action == 2 and col < GRID - 1 and (row, col) not in _EAST_WALLS:
        col += 1                                # East
    elif action == 3 and col > 0 and (row, col - 1) not in _EAST_WALLS:
        col -= 1                                # West
    elif action == 4:                           # Pickup
        if p < 4 and (row, col) == LANDMARKS[p]:
            p = 4
        else:
            reward = -10
    elif action == 5:                           # Dropoff
        if p == 4 and (row, col) == LANDMARKS[d]:
            p = d
            reward = 20
            done = True
        elif p == 4 and (row, col) in LANDMARKS:
            p = LANDMARKS.index((row, col))
        else:
            reward = -10
    return (row, col, p, d), reward, done


def _initial_states():
    states = []
    for row in range(GRID):
        for col in range(GRID):
            for p in range(4):
                for d in range(4):
                    if p != d:
                        states.append((row, col, p, d))
    return states


def taxi_model():
    return EnvironmentModel(
        name="taxi",
        factorization=taxi_factorization(),
        action_names=ACTION_NAMES,
        transition=_step,
        discount=0.99,
        initial_states=_initial_states(),
    )

from .base import EnvironmentModel
from .minigrid import minigrid_model
from .taxi import taxi_model

BUILTIN_ENVS = {
    "taxi": taxi_model,
    "minigrid": minigrid_model,
}


def make_env(name):
    """Construct a built-in environment model by CLI name."""
    try:
        return BUILTIN_ENVS[name]()
    except KeyError:
        raise ValueError(
            f"unknown environment {name!r}; choose from {sorted(BUILTIN_ENVS)}"
        ) from None


__all__ = ["EnvironmentModel", "taxi_model", "minigrid_model", "make_env",
           "BUILTIN_ENVS"]

"""Shared fixtures: environment models, trained policies, toy spaces."""

import pytest
from hypothesis import settings

from stache import (
    CategoricalFactor,
    Factorization,
    NumericalFactor,
    make_env,
    q_learning_with_checkpoints,
    value_iteration,
)

settings.register_profile("ci", deadline=None, max_examples=60)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def taxi():
    return make_env("taxi")


@pytest.fixture(scope="session")
def minigrid():
    return make_env("minigrid")


@pytest.fixture(scope="session")
def taxi_vi(taxi):
    return value_iteration(taxi)


@pytest.fixture(scope="session")
def minigrid_vi(minigrid):
    return value_iteration(minigrid)


@pytest.fixture(scope="session")
def taxi_checkpoints(taxi):
    # Seeded defaults; the suite's golden numbers are frozen against this run.
    return q_learning_with_checkpoints(taxi)


@pytest.fixture(scope="session")
def toy_space():
    """Three small factors, 90 states: big enough for path structure,
    small enough for all-pairs graph scans."""
    return Factorization((
        NumericalFactor("x", 0, 5),
        NumericalFactor("y", 0, 4),
        CategoricalFactor("c", ("r", "g", "b")),
    ))


@pytest.fixture(scope="session")
def tiny_space():
    """Eight states; every state triple is enumerable."""
    return Factorization((
        NumericalFactor("x", 0, 1),
        NumericalFactor("y", 0, 1),
        CategoricalFactor("c", (0, 1)),
    ))


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" in getattr(rep, "nodeid", ""):
                name = rep.nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {name}")

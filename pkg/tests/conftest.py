from __future__ import annotations

import warnings

import numpy as np
import pytest

from mpsdrive.errors import NonImaginaryOverlap
from mpsdrive.mps import normalize, project_gauge
from mpsdrive.trajectory import ParamPoint, builtin_loop, state_at

DECAY_VALUES = np.array([1.05, -0.48, 0.39, 1.2])
DECAY_RATES = np.array([-3.81, 1.29, 2.1, -0.49])


@pytest.fixture(scope="session")
def decay_state():
    return state_at(ParamPoint(DECAY_VALUES, DECAY_RATES))


@pytest.fixture(scope="session")
def loop():
    return builtin_loop()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(rng, d=2, chi=2):
    A = rng.normal(size=(d, chi, chi)) + 1j * rng.normal(size=(d, chi, chi))
    psi = normalize(A)
    dA = rng.normal(size=A.shape) + 1j * rng.normal(size=A.shape)
    # random directions change the norm as well; projection removes that part
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonImaginaryOverlap)
        return psi, project_gauge(dA, psi)[0]


GHZ = np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], dtype=complex)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

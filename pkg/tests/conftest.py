from __future__ import annotations

import numpy as np
import pytest

from qudit_locc.hilbert import Operator, StateVector

ACCEPTANCE_LINES: list[str] = []


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_involution(d: int, rng: np.random.Generator) -> Operator:
    """V diag(+-1) V^dagger with Haar-ish V; both signs appear when d >= 2."""
    signs = rng.choice([-1.0, 1.0], size=d)
    signs[0], signs[-1] = 1.0, -1.0
    v = random_unitary(d, rng)
    return Operator((d,), (v * signs) @ v.conj().T)


def random_state(dims, rng: np.random.Generator) -> StateVector:
    n = int(np.prod(dims))
    amps = rng.normal(size=n) + 1j * rng.normal(size=n)
    return StateVector(tuple(dims), amps / np.linalg.norm(amps))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_rotation(rng, n=3):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q


def random_F(rng, n=3, spread=1.0):
    """det > 0 with singular values in roughly exp([-spread, spread])."""
    s = np.exp(rng.uniform(-spread, spread, size=n))
    return random_rotation(rng, n) @ np.diag(s) @ random_rotation(rng, n)


def F_strategy(n=3, spread=1.5):
    """Hypothesis strategy for well-conditioned F with det > 0."""
    logs = arrays(float, n, elements=st.floats(-spread, spread))
    angles = arrays(float, 2 * n, elements=st.floats(0, 2 * np.pi))

    def build(args):
        ls, ang = args
        return rot(ang[:n], n) @ np.diag(np.exp(ls)) @ rot(ang[n:], n)

    return st.tuples(logs, angles).map(build)


def rot(angles, n):
    if n == 2:
        c, s = np.cos(angles[0]), np.sin(angles[0])
        return np.array([[c, -s], [s, c]])
    a, b, g = angles[:3]
    Rz = lambda t: np.array([[np.cos(t), -np.sin(t), 0], [np.sin(t), np.cos(t), 0], [0, 0, 1]])
    Rx = lambda t: np.array([[1, 0, 0], [0, np.cos(t), -np.sin(t)], [0, np.sin(t), np.cos(t)]])
    return Rz(a) @ Rx(b) @ Rz(g)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(number, title, parts):
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name} {'ok' if good else 'FAILED'} ({info})" for name, good, info in parts)
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

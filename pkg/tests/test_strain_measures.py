import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elliptika import strain_measures as sm
from elliptika import tensor_core as tc
from elliptika.errors import DistortionUndefinedError, OrientationError

from conftest import F_strategy, random_F, random_rotation

E = np.exp
S3 = np.sqrt(3.0)
U1 = np.diag([E(1.0), E(1.0), E(-2.0)])
U2 = np.diag([E(S3), 1.0, E(-S3)])


def fd_gradient(f, F, h=1e-6):
    G = np.zeros_like(F)
    for i in range(F.shape[0]):
        for j in range(F.shape[1]):
            D = np.zeros_like(F)
            D[i, j] = h
            G[i, j] = (f(F + D) - f(F - D)) / (2 * h)
    return G


def test_omega_log_examples():
    assert sm.omega_log(np.eye(3)) == 0
    assert np.allclose(sm.omega_log_gradient(np.eye(3)), 0)
    assert np.isclose(sm.omega_log(np.diag([E(8.0), E(2.0)])), 68.0, rtol=1e-14)


def test_omega_log_orientation():
    with pytest.raises(OrientationError):
        sm.omega_log(np.diag([1.0, -1.0]))


def test_omega_devlog_examples():
    assert np.isclose(sm.omega_devlog(U1), 6.0, rtol=1e-14)
    assert np.isclose(sm.omega_devlog(U2), 6.0, rtol=1e-14)
    for a in (0.1, 2.0, 7.5):
        assert abs(sm.omega_devlog(a * np.eye(3))) < 1e-24
        assert abs(sm.omega_devlog(a * np.eye(2))) < 1e-24


def test_omega_svk_examples():
    assert sm.omega_svk(np.eye(2)) == 0
    assert np.allclose(sm.omega_svk_gradient(np.eye(3)), 0)
    F = 0.5 * np.eye(2)
    H = np.outer([1.0, 0], [0, 1.0])
    assert np.sum(sm.omega_svk_gradient(F) * H) == 0
    # along F + tH, omega = t^4 - t^2 + 9/8 exactly, so the second derivative at 0 is -2
    t = np.linspace(-0.2, 0.2, 9)
    assert np.allclose(sm.omega_svk(F + t[:, None, None] * H), t ** 4 - t ** 2 + 9 / 8, rtol=1e-14)
    assert np.isclose(sm.omega_svk_second(F, H), -2.0, rtol=1e-14)


def test_omega_svk_second_against_gradient_fd(rng):
    for _ in range(20):
        F, H = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
        h = 1e-6
        fd = np.sum((sm.omega_svk_gradient(F + h * H) - sm.omega_svk_gradient(F - h * H)) * H) / (2 * h)
        an = sm.omega_svk_second(F, H)
        assert abs(fd - an) <= 1e-6 * max(1.0, abs(an))


@pytest.mark.parametrize("measure", [sm.OMEGA_LOG, sm.OMEGA_DEVLOG, sm.OMEGA_SVK])
@pytest.mark.parametrize("n", [2, 3])
def test_gradients_match_fd(rng, measure, n):
    for _ in range(10):
        F = random_F(rng, n, 1.0)
        G = measure.gradient(F)
        fd = fd_gradient(measure.value, F)
        assert np.linalg.norm(G - fd) <= 1e-6 * max(1.0, np.linalg.norm(G))


def test_seth_hill_examples(rng):
    F = random_F(rng, 3)
    assert np.isclose(sm.seth_hill_measure(F, 0.0), sm.omega_log(F), rtol=1e-14)
    assert np.isclose(sm.seth_hill_measure(np.diag([S3, 1.0]), 1.0), 1.0, rtol=1e-14)
    for _ in range(20):
        F = random_F(rng, 3)
        assert abs(sm.seth_hill_measure(F, 1e-8) - sm.omega_log(F)) <= 1e-5


def test_criscione_examples():
    k = sm.criscione_invariants(U1)
    assert abs(k.k1) < 1e-14 and np.isclose(k.k2, np.sqrt(6)) and np.isclose(k.k3, -1.0)
    k = sm.criscione_invariants(U2)
    assert abs(k.k1) < 1e-14 and np.isclose(k.k2, np.sqrt(6)) and abs(k.k3) < 1e-14
    Q = random_rotation(np.random.default_rng(0))
    k = sm.criscione_invariants(2.0 * Q)
    assert np.isclose(k.k1, 3 * np.log(2.0)) and abs(k.k2) < 1e-12
    with pytest.raises(DistortionUndefinedError):
        k.k3


def test_ihat_examples():
    i = sm.ihat_invariants(U1)
    assert np.allclose([i.i1, i.i2, i.i3], [E(3.0), E(6.0), 1.0], rtol=1e-13)
    i = sm.ihat_invariants(U2)
    assert np.allclose([i.i1, i.i2, i.i3], [E(3 * S3), E(3 * S3), 1.0], rtol=1e-13)
    assert np.allclose(sm.ihat_invariants(np.eye(3)), 1.0)


@given(F_strategy(3), st.integers(0, 2 ** 31))
def test_measures_objective_and_isotropic(F, seed):
    rng = np.random.default_rng(seed)
    Q1, Q2 = random_rotation(rng), random_rotation(rng)
    for m in (sm.OMEGA_LOG, sm.OMEGA_DEVLOG, sm.OMEGA_SVK):
        a, b = m(Q1 @ F @ Q2), m(F)
        assert abs(a - b) <= 1e-10 * max(1.0, abs(b))
    assert abs(sm.omega_log(Q1)) < 1e-24 and abs(sm.omega_devlog(Q1)) < 1e-24 and abs(sm.omega_svk(Q1)) < 1e-24


@given(F_strategy(3), st.floats(0.1, 10))
def test_devlog_isochoric_and_symmetric(F, a):
    w = sm.omega_devlog(F)
    assert abs(sm.omega_devlog(a * F) - w) <= 1e-10 * max(1.0, w)
    assert abs(sm.omega_devlog(np.linalg.inv(F)) - w) <= 1e-10 * max(1.0, w)


@given(F_strategy(3))
def test_log_measure_left_right(F):
    w = sm.omega_log(F)
    assert abs(sm.omega_log(F.T) - w) <= 1e-10 * max(1.0, w)
    lu, lv = tc.log_stretch(F, "right"), tc.log_stretch(F, "left")
    assert abs(np.sum(lu * lu) - np.sum(lv * lv)) <= 1e-10 * max(1.0, w)


@given(F_strategy(3))
def test_k1_is_log_det(F):
    k = sm.criscione_invariants(F)
    assert abs(k.k1 - np.log(np.linalg.det(F))) <= 1e-10
    assert k.k2 >= 0


@given(F_strategy(3, 2.5) | F_strategy(2, 2.5))
def test_pairwise_ratio_identity(F):
    a, b = sm.omega_devlog(F), sm.omega_devlog_pairwise(F)
    assert abs(a - b) <= 1e-10 * max(1.0, a)


@given(F_strategy(3, 2.0))
def test_ihat_scaling_and_inverse(F):
    i = sm.ihat_invariants(F)
    j = sm.ihat_invariants(3.7 * F)
    k = sm.ihat_invariants(np.linalg.inv(F))
    assert np.isclose(i.i1, j.i1, rtol=1e-10) and np.isclose(i.i2, j.i2, rtol=1e-10)
    assert np.isclose(k.i1, i.i2, rtol=1e-10)
    assert i.i1 > 0 and i.i2 > 0 and i.i3 > 0


def test_batched_values(rng):
    Fs = np.array([random_F(rng, 3) for _ in range(30)])
    for m in (sm.OMEGA_LOG, sm.OMEGA_DEVLOG, sm.OMEGA_SVK):
        assert np.allclose(m(Fs), [m(F) for F in Fs], rtol=1e-13)

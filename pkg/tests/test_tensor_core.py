import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from elliptika import tensor_core as tc
from elliptika.errors import InvalidInputError, NotSPDError, OrientationError

from conftest import F_strategy, random_F, random_rotation

E = np.exp


def test_sym_eig_diagonal():
    d = tc.sym_eig(np.diag([E(4.0), E(16.0)]))
    assert np.allclose(d.eigenvalues, [E(16.0), E(4.0)], rtol=1e-15)
    assert np.allclose(np.abs(d.eigenvectors), [[0, 1], [1, 0]])


def test_sym_eig_of_FFt_diagonal():
    F = np.diag([E(8.0), E(2.0)])
    d = tc.sym_eig(F @ F.T)
    assert np.allclose(d.eigenvalues, [E(16.0), E(4.0)], rtol=1e-15)


def _cubic_roots(S):
    """Eigenvalues from the characteristic polynomial in 50-digit arithmetic."""
    mp.mp.dps = 50
    M = mp.matrix(S.tolist())
    c2 = -(M[0, 0] + M[1, 1] + M[2, 2])
    c1 = (M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0] + M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
          + M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
    c0 = -mp.det(M)
    r = mp.polyroots([1, c2, c1, c0], maxsteps=200, extraprec=200)
    return np.array(sorted((float(mp.re(x)) for x in r), reverse=True))


def test_sym_eig_random_against_cubic_oracle(rng):
    for _ in range(25):
        A = rng.normal(size=(3, 3))
        S = A + A.T
        d = tc.sym_eig(S)
        nrm = np.linalg.norm(S)
        assert np.allclose(d.eigenvalues, _cubic_roots(S), atol=1e-12 * nrm)
        assert np.linalg.norm(d.reconstruct() - S) < 1e-12 * nrm
        assert np.allclose(d.eigenvectors.T @ d.eigenvectors, np.eye(3), atol=1e-12)


def test_sym_eig_graded_spectrum():
    F = np.diag([1.0, E(20.0), E(15.0)]) + np.outer([0, 1, 1], [0, 10 * E(20.0), -25 * E(15.0)]) * 0.01 / 29
    d = tc.sym_eig(F @ F.T)
    # smallest eigenvalue is det^2 / (product of the other two); relative accuracy is the point
    prod = np.prod(d.eigenvalues)
    assert abs(prod / np.linalg.det(F) ** 2 - 1) < 1e-10


def test_sym_eig_batched_matches_single(rng):
    A = rng.normal(size=(40, 3, 3))
    S = A + np.swapaxes(A, -1, -2)
    batch = tc.sym_eig(S).eigenvalues
    single = np.array([tc.sym_eig(s).eigenvalues for s in S])
    assert np.allclose(batch, single, rtol=1e-13, atol=1e-13)


def test_sym_eig_repeated_eigenvalues():
    d = tc.sym_eig(np.eye(3) * 2.0)
    assert np.allclose(d.eigenvalues, 2.0)
    assert np.allclose(d.reconstruct(), 2 * np.eye(3))


def test_sym_eig_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        tc.sym_eig(np.array([[1.0, np.nan], [np.nan, 1.0]]))
    with pytest.raises(InvalidInputError):
        tc.sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_matrix_functions_trivial():
    assert np.allclose(tc.primary_matrix_function(np.eye(3), np.log), 0)
    assert np.allclose(tc.spd_log(np.diag([E(16.0), E(4.0)])), np.diag([16.0, 4.0]))
    assert np.allclose(tc.spd_log(np.diag([E(1.0), E(1.0), E(-2.0)])), np.diag([1.0, 1.0, -2.0]))
    assert np.allclose(tc.spd_log(np.eye(2)), 0)


def test_spd_log_requires_spd():
    with pytest.raises(NotSPDError):
        tc.spd_log(np.diag([1.0, -1.0]))
    with pytest.raises(NotSPDError):
        tc.spd_log(np.diag([1.0, 0.0, 2.0]))


def test_primary_matrix_function_domain():
    with pytest.raises(Exception):
        tc.primary_matrix_function(np.diag([1.0, -2.0]), np.sqrt, domain=(0, np.inf))


def test_stretches_trivial():
    assert np.allclose(tc.right_stretch(np.eye(3)), np.eye(3))
    F = np.diag([E(8.0), E(2.0)])
    assert np.allclose(tc.right_stretch(F), F, rtol=1e-14)
    assert np.allclose(tc.left_stretch(F), F, rtol=1e-14)


def test_stretch_against_svd(rng):
    for _ in range(50):
        F = random_F(rng, 3, 2.0)
        U = tc.right_stretch(F)
        V = tc.left_stretch(F)
        sv = np.linalg.svd(F, compute_uv=False)
        assert np.allclose(np.sort(np.linalg.eigvalsh(U))[::-1], sv, rtol=1e-10)
        assert np.allclose(U @ U, F.T @ F, rtol=1e-12, atol=1e-12 * np.linalg.norm(F) ** 2)
        assert np.allclose(V @ V, F @ F.T, rtol=1e-12, atol=1e-12 * np.linalg.norm(F) ** 2)


def test_stretch_orientation_error():
    with pytest.raises(OrientationError):
        tc.right_stretch(np.diag([1.0, -1.0]))


def test_deviatoric_examples():
    assert np.allclose(tc.deviatoric(np.eye(3)), 0)
    D = np.diag([1.0, 1.0, -2.0])
    assert np.allclose(tc.deviatoric(D), D)
    D = np.diag([np.sqrt(3), 0, -np.sqrt(3)])
    assert np.allclose(tc.deviatoric(D), D)
    assert np.isclose(np.sum(D * D), 6.0)


def _minor_cofactor(A):
    n = A.shape[0]
    C = np.zeros_like(A)
    for i in range(n):
        for j in range(n):
            M = np.delete(np.delete(A, i, 0), j, 1)
            C[i, j] = (-1) ** (i + j) * (np.linalg.det(M) if M.size else 1.0)
    return C


def test_cofactor_examples(rng):
    assert np.allclose(tc.cofactor(np.eye(3)), np.eye(3))
    assert np.allclose(tc.cofactor(np.outer([1.0, 2, 3], [4.0, -1, 2])), 0)
    for n in (2, 3):
        for _ in range(20):
            A = rng.normal(size=(n, n))
            C = tc.cofactor(A)
            assert np.allclose(C, _minor_cofactor(A), rtol=1e-12, atol=1e-12)
            assert np.isclose(np.sum(C * A), n * np.linalg.det(A), rtol=1e-12)


def test_rotation_examples():
    assert np.allclose(tc.rotation_about_axis(np.array([0, 0.6, 0.8]), 0.0), np.eye(3))
    assert np.allclose(tc.rotation_about_axis(np.array([0.0, 0, 1]), np.pi / 2),
                       [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-15)
    v = np.array([0.0, 5.0, 2.0]) / np.sqrt(29)
    Q = tc.rotation_about_axis(v, np.pi / 2)
    expected = np.array([[0, -2, 5], [2, 0, 0], [-5, 0, 0]]) / np.sqrt(29) \
        + np.array([[0, 0, 0], [0, 25, 10], [0, 10, 4]]) / 29
    assert np.allclose(Q, expected, atol=1e-15)
    # the anti part matches the printed first row and column exactly
    assert np.allclose(Q[0] * np.sqrt(29), [0, -2, 5], atol=1e-14)
    assert np.allclose(Q[:, 0] * np.sqrt(29), [0, 2, -5], atol=1e-14)
    # the printed lower block (25, 10; 10, 4)/sqrt(29) would not be orthogonal
    printed = np.array([[0, -2, 5], [2, 25, 10], [-5, 10, 4]]) / np.sqrt(29)
    assert not np.allclose(printed.T @ printed, np.eye(3), atol=1e-3)


def test_rotation_rejects_non_unit_axis():
    with pytest.raises(InvalidInputError):
        tc.rotation_about_axis(np.array([0.0, 0.0, 2.0]), 0.3)


@given(arrays(float, 3, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 0.1),
       st.floats(-7, 7))
def test_rotation_properties(v, theta):
    v = v / np.linalg.norm(v)
    Q = tc.rotation_about_axis(v, theta)
    assert np.allclose(Q.T @ Q, np.eye(3), atol=1e-12)
    assert np.isclose(np.linalg.det(Q), 1.0, atol=1e-12)
    assert np.allclose(Q @ v, v, atol=1e-12)


def _random_spd(draw_logs, angles):
    from conftest import rot
    Q = rot(angles, 3)
    return Q @ np.diag(np.exp(draw_logs)) @ Q.T


@given(arrays(float, 3, elements=st.floats(-3, 3)), arrays(float, 3, elements=st.floats(0, 6.3)))
def test_log_exp_roundtrip(logs, angles):
    S = _random_spd(logs, angles)
    assert np.allclose(tc.sym_exp(tc.spd_log(S)), S, rtol=1e-10, atol=1e-10 * np.linalg.norm(S))
    T = _random_spd(logs, angles)
    T = (T - T.T) * 0 + tc.spd_log(T)
    assert np.allclose(tc.spd_log(tc.sym_exp(T)), T, atol=1e-10 * (1 + np.linalg.norm(T)))


@given(F_strategy(3, 2.0))
def test_trace_log_is_log_det(F):
    U = tc.right_stretch(F)
    assert np.isclose(np.trace(tc.spd_log(U)), np.log(np.linalg.det(U)), rtol=1e-10, atol=1e-10)


@given(F_strategy(3, 2.0), st.integers(0, 2 ** 31))
def test_singular_value_isotropy(F, seed):
    rng = np.random.default_rng(seed)
    Q1, Q2 = random_rotation(rng), random_rotation(rng)
    a = np.linalg.eigvalsh(tc.right_stretch(Q1 @ F @ Q2))
    b = np.linalg.eigvalsh(tc.right_stretch(F))
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


@given(arrays(float, (3, 3), elements=st.floats(-5, 5)))
def test_deviatoric_idempotent(A):
    S = A + A.T
    D = tc.deviatoric(S)
    assert abs(np.trace(D)) <= 1e-14 * max(1.0, np.linalg.norm(S))
    assert np.allclose(tc.deviatoric(D), D, atol=1e-14 * max(1.0, np.linalg.norm(S)))


@pytest.mark.parametrize("f,df", [(lambda x: np.log(x) ** 2, lambda x: 2 * np.log(x) / x),
                                  (lambda x: x * x, lambda x: 2 * x)])
def test_trace_derivative_rule(rng, f, df):
    for _ in range(10):
        S = random_F(rng, 3, 0.8)
        S = S @ S.T
        H = rng.normal(size=(3, 3))
        H = H + H.T
        g = lambda t: np.trace(tc.primary_matrix_function(S + t * H, f))
        h = 1e-5
        fd = (g(h) - g(-h)) / (2 * h)
        an = np.sum(tc.primary_matrix_function(S, df) * H)
        assert abs(fd - an) <= 1e-6 * max(1.0, abs(an))


def test_unit_vector():
    v = tc.unit_vector([0.6, 0.8])
    assert abs(np.linalg.norm(v) - 1) <= 1e-12
    with pytest.raises(InvalidInputError):
        tc.unit_vector([3.0, 4.0])

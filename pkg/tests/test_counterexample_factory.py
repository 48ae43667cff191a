import mpmath as mp
import numpy as np
import pytest

from elliptika import counterexample_factory as cf
from elliptika import tensor_core as tc
from elliptika.convexity_lab import concave_critical_point
from elliptika.errors import DegenerateDirectionError, DomainError

from conftest import random_F

E = np.exp
S2 = np.sqrt(2.0)


def numeric_mu(case, t):
    Ft = case.probe.at(t)
    B = Ft @ np.swapaxes(Ft, -1, -2)
    return np.sort(tc.sym_eig(B, invariants=tc.stretch_invariants(Ft)).eigenvalues, axis=-1)


def test_eta_2d_fixture():
    c = cf.case_log_2d()
    assert np.allclose(c.probe.eta, S2 * np.array([-E(8.0), 4 * E(2.0)]), rtol=1e-14)
    # the swapped vector is not a critical direction
    swapped = cf.RankOneProbe(c.probe.F, c.probe.xi, S2 * np.array([4 * E(2.0), -E(8.0)]), (-1e-4, 1e-4))
    assert not concave_critical_point(c.measure, swapped).is_counterexample


def test_eta_2d_degenerate():
    with pytest.raises(DegenerateDirectionError):
        cf.eta_orthogonal_2d(np.eye(2), np.array([1.0, 0.0]))


def test_eta_orthogonality_random(rng):
    for _ in range(100):
        F2, F3 = random_F(rng, 2, 1.5), random_F(rng, 3, 1.5)
        xi2, xi3 = rng.normal(size=2), rng.normal(size=3)
        eta = cf.eta_orthogonal_2d(F2, xi2, rng.uniform(-2, 2))
        w, m = tc.log_stretch(F2) @ xi2, tc.inv_transpose(F2) @ eta
        assert abs(w @ m) <= 1e-10 * np.linalg.norm(w) * np.linalg.norm(m)
        eta = cf.eta_orthogonal_3d(F3, xi3, rng.uniform(0, 2 * np.pi))
        w, m = tc.deviatoric(tc.log_stretch(F3)) @ xi3, tc.inv_transpose(F3) @ eta
        assert abs(w @ m) <= 1e-10 * np.linalg.norm(w) * np.linalg.norm(m)


def test_eta_3d_fixture_collinear():
    F = np.diag([1.0, E(20.0), E(15.0)])
    eta = cf.eta_orthogonal_3d(F, np.array([0.0, 1.0, 1.0]) / S2, np.pi / 2)
    ref = np.array([0.0, 10 * E(20.0), -25 * E(15.0)]) / 29
    cos = eta @ ref / (np.linalg.norm(eta) * np.linalg.norm(ref))
    assert abs(cos - 1) <= 1e-10


def test_eta_3d_theta_zero_and_pi():
    F = np.diag([1.0, E(2.0), E(-1.0)])
    xi = np.array([0.3, 0.5, 0.8])
    w = tc.deviatoric(tc.log_stretch(F)) @ xi
    for th in (0.0, np.pi):
        m = tc.inv_transpose(F) @ cf.eta_orthogonal_3d(F, xi, th)
        assert abs(w @ m) <= 1e-10 * np.linalg.norm(w) * np.linalg.norm(m)


def test_eta_3d_eigenvector_direction():
    F = np.diag([1.0, E(2.0), E(-1.0)])
    eta = cf.eta_orthogonal_3d(F, np.array([1.0, 0.0, 0.0]), 0.7)
    assert np.linalg.norm(eta) > 0


def test_case_svk():
    c = cf.case_svk()
    assert c.probe.t_interval == (-0.2, 0.2)
    t = np.linspace(-0.2, 0.2, 11)
    assert np.allclose(tc.det(c.probe.at(t)), 0.25)
    assert c.expected_first == 0 and c.expected_second == -0.5


def test_log2d_spectral_fixtures():
    c = cf.case_log_2d()
    mu, mu1, mu2 = cf.mu_closed_form(c, 0.0, derivatives=True)
    e12, e16 = E(12.0), E(16.0)
    assert np.allclose(mu, [E(4.0), e16], rtol=1e-14)
    assert abs(mu1[1] / (-2 * e16) - 1) < 1e-12
    assert abs(mu2[1] / (2 * e16 * (7 + 2 * e12) / (e12 - 1)) - 1) < 1e-12


def test_devlog3d_spectral_fixtures():
    c = cf.case_devlog_3d()
    mu, mu1, mu2 = cf.mu_closed_form(c, 0.0, derivatives=True)
    e10, e40 = E(10.0), E(40.0)
    assert np.allclose(mu, [1.0, E(30.0), e40], rtol=1e-13)
    assert abs(mu1[2] / (10 * S2 * e40 / 29) - 1) < 1e-12
    assert abs(mu2[2] / (25 * (e40 + 8 * E(50.0)) / (841 * (e10 - 1))) - 1) < 1e-12


@pytest.mark.parametrize("make", [cf.case_log_2d, cf.case_devlog_3d])
def test_oracle_vs_sym_eig(make):
    c = make()
    t = np.linspace(*c.probe.t_interval, 101)
    mu = cf.mu_closed_form(c, t)
    assert np.max(np.abs(mu - numeric_mu(c, t)) / mu) <= 1e-9
    det2 = tc.det(c.probe.at(t)) ** 2
    assert np.max(np.abs(np.prod(mu, axis=-1) / det2 - 1)) <= 1e-10


def _mp_mu(case, t):
    mp.mp.dps = 60
    F = mp.matrix(case.probe.F.tolist()) + mp.mpf(t) * mp.matrix(np.outer(case.probe.xi, case.probe.eta).tolist())
    return sorted(float(x) for x in mp.eigsy(F * F.T)[0])


def test_oracle_vs_high_precision():
    for make in (cf.case_log_2d, cf.case_devlog_3d):
        c = make()
        for t in (-0.2, 0.0, 0.13):
            ref = np.array(_mp_mu(c, t))
            assert np.max(np.abs(cf.mu_closed_form(c, t) / ref - 1)) <= 1e-12


def test_oracle_derivatives_match_fd():
    for make in (cf.case_log_2d, cf.case_devlog_3d):
        c = make()
        mu, mu1, mu2 = cf.mu_closed_form(c, 0.05, derivatives=True)
        h = 1e-4
        a, b = cf.mu_closed_form(c, 0.05 + h), cf.mu_closed_form(c, 0.05 - h)
        assert np.allclose((a - b) / (2 * h), mu1, rtol=1e-6, atol=1e-6 * np.max(mu))
        assert np.allclose((a - 2 * mu + b) / h ** 2, mu2, rtol=1e-4, atol=1e-4 * np.max(mu))


def test_mu_closed_form_domain():
    c = cf.case_devlog_3d()
    with pytest.raises(DomainError):
        cf.mu_closed_form(c, 29 * S2 / 15 + 0.01)
    with pytest.raises(DomainError):
        cf.mu_closed_form(cf.case_log_2d(), -0.34)


def test_oracle_line_derivatives_match_reference():
    e12, e10 = E(12.0), E(10.0)
    _, h2 = cf.oracle_line_derivatives(cf.case_log_2d())
    assert abs(h2 / ((110 - 2 * e12) / (e12 - 1)) - 1) <= 1e-9
    _, h2 = cf.oracle_line_derivatives(cf.case_devlog_3d())
    assert abs(h2 / (-25 * (4 * e10 - 49) / (841 * (e10 - 1))) - 1) <= 1e-9


def test_voliso_orthogonality_all_alpha():
    F0 = np.diag([1.0, E(20.0), E(10.0)])
    D = tc.deviatoric(tc.log_stretch(F0))
    for a in np.linspace(0, 2 * np.pi, 13)[:-1]:
        c = cf.case_voliso_3d(a)
        xi, m = c.probe.xi, tc.inv_transpose(F0) @ c.probe.eta
        nm = np.linalg.norm(m)
        assert abs(xi @ m) <= 1e-10 * nm
        assert abs((D @ xi) @ m) <= 1e-10 * nm * np.linalg.norm(D @ xi)


def test_voliso_reference_constant():
    assert abs(cf.voliso_reference_value() + 6.70031) < 1e-5


def test_voliso_alpha_dependence_recorded():
    # the construction's h''(0) varies with alpha; the default alpha is its minimiser
    vals = [concave_critical_point(c.measure, c.probe).second
            for c in (cf.case_voliso_3d(a) for a in (0.0, np.pi / 6, np.pi / 3, np.pi / 2))]
    assert max(vals) - min(vals) > 100
    c = cf.case_voliso_3d()
    best = concave_critical_point(c.measure, c.probe).second
    for da in (-1e-2, 1e-2):
        c = cf.case_voliso_3d(cf.VOLISO_ALPHA + da)
        assert concave_critical_point(c.measure, c.probe).second > best
    assert abs(best + 5.3443) < 1e-3


@pytest.mark.parametrize("name", sorted(cf.CASES))
def test_every_case_is_counterexample(name):
    c = cf.CASES[name]()
    assert c.expected_second < 0
    t = np.linspace(*c.probe.t_interval, 65)
    assert np.all(tc.det(c.probe.at(t)) > 0)
    assert concave_critical_point(c.measure, c.probe).is_counterexample

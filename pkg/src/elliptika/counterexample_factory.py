"""Explicit concave critical points of the logarithmic and SVK strain measures.

Each NamedCase carries a rank-one probe, the reference closed-form value of
h''(0) and, where one exists, a closed-form eigenvalue oracle mu_i(t) for
(F + t xi(x)eta)(F + t xi(x)eta)^T together with its first two t-derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import strain_measures as sm
from . import tensor_core as tc
from .convexity_lab.probes import RankOneProbe
from .errors import DegenerateDirectionError, DomainError, InvalidInputError

E = np.exp
SQRT2, SQRT3 = np.sqrt(2.0), np.sqrt(3.0)
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
M0 = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])

# minimiser of h''(0) over alpha for the volumetric-isochoric family
VOLISO_ALPHA = 0.19132388497112752


@dataclass(frozen=True, eq=False)
class NamedCase:
    identifier: str
    probe: RankOneProbe
    measure: sm.StrainMeasure
    expected_first: float
    expected_second: float
    eigenvalue_oracle: Optional[Callable] = None   # t -> (mu, mu', mu'') each (..., n)
    domain: tuple = (-np.inf, np.inf)
    note: str = ""


def _degenerate(v, ref):
    return np.linalg.norm(v) <= 1e-12 * max(1.0, ref)


def eta_orthogonal_2d(F, xi, a: float = -1.0) -> np.ndarray:
    """eta = a F^T J (log V) xi, so that <(log V) xi, F^{-T} eta> = 0."""
    F = tc.as_matrix(F, "F")
    if F.shape != (2, 2):
        raise InvalidInputError("eta_orthogonal_2d is two-dimensional")
    xi = np.asarray(xi, float)
    lv_xi = tc.log_stretch(F, "left") @ xi
    if _degenerate(lv_xi, np.linalg.norm(xi)):
        raise DegenerateDirectionError("(log V) xi vanishes")
    return a * F.T @ (J2 @ lv_xi)


def eta_orthogonal_3d(F, xi, theta: float) -> np.ndarray:
    """eta = F^T Q(v, theta) M0 v with v the unit direction of (dev log V) xi."""
    F = tc.as_matrix(F, "F")
    if F.shape != (3, 3):
        raise InvalidInputError("eta_orthogonal_3d is three-dimensional")
    xi = np.asarray(xi, float)
    w = tc.deviatoric(tc.log_stretch(F, "left")) @ xi
    if _degenerate(w, np.linalg.norm(xi)):
        raise DegenerateDirectionError("(dev log V) xi vanishes")
    v = w / np.linalg.norm(w)
    m0 = M0 @ v
    if _degenerate(m0, 1.0):
        raise DegenerateDirectionError("(dev log V) xi is parallel to e3; M0 maps it to zero")
    return F.T @ (tc.rotation_about_axis(v, theta) @ m0)


def eta_cross_3d(F, xi) -> np.ndarray:
    """eta = F^T (xi x (dev log V) xi): orthogonal to both xi and (dev log V) xi after F^{-T}."""
    F = tc.as_matrix(F, "F")
    xi = np.asarray(xi, float)
    c = np.cross(xi, tc.deviatoric(tc.log_stretch(F, "left")) @ xi)
    if _degenerate(c, np.linalg.norm(xi)):
        raise DegenerateDirectionError("xi is an eigenvector of dev log V")
    return F.T @ c


# --------------------------------------------------------------------------
# closed-form eigenvalue oracles


def _larger_root(P, R):
    """Larger root of x^2 - P x + R with first two t-derivatives.

    P, R are (value, d1, d2) triples.  The smaller root is R / larger, which
    avoids the subtractive branch of the quadratic formula.
    """
    p, p1, p2 = P
    r, r1, r2 = R
    D = p * p - 4 * r
    D1 = 2 * p * p1 - 4 * r1
    D2 = 2 * p1 * p1 + 2 * p * p2 - 4 * r2
    sq = np.sqrt(D)
    x = 0.5 * (p + sq)
    x1 = 0.5 * (p1 + D1 / (2 * sq))
    x2 = 0.5 * (p2 + D2 / (2 * sq) - D1 * D1 / (4 * D * sq))
    return x, x1, x2


def _quotient(R, X):
    r, r1, r2 = R
    x, x1, x2 = X
    y = r / x
    y1 = (r1 - y * x1) / x
    y2 = (r2 - 2 * y1 * x1 - y * x2) / x
    return y, y1, y2


def _mu_log2d(t):
    t = np.asarray(t, float)
    e12, e4 = E(12.0), E(4.0)
    # mu = e^4 x with x^2 - P x + e^12 (3t+1)^2 = 0
    P = (1 + 32 * t * t + 8 * t + e12 * (2 * t * t - 2 * t + 1), 64 * t + 8 + e12 * (4 * t - 2),
         np.full_like(t, 64 + 4 * e12))
    R = (e12 * (3 * t + 1) ** 2, 6 * e12 * (3 * t + 1), np.full_like(t, 18 * e12))
    x = _larger_root(P, R)
    y = _quotient(R, x)
    mu = [np.stack([e4 * a, e4 * b], axis=-1) for a, b in zip(x, y)]
    return tuple(mu)


def _mu_devlog3d(t):
    t = np.asarray(t, float)
    e10, e30 = E(10.0), E(30.0)
    # mu_{2,3} = e^30 x / 841 with x^2 - P x + R = 0
    a = (100 * t * t + 290 * SQRT2 * t + 841, 200 * t + 290 * SQRT2, np.full_like(t, 200.0))
    b = (625 * t * t - 725 * SQRT2 * t + 841, 1250 * t - 725 * SQRT2, np.full_like(t, 1250.0))
    P = tuple(e10 * u + v for u, v in zip(a, b))
    # product mu2 mu3 = e^70 (15t - 29 sqrt2)^2 / 1682  ->  R = 841 e^10 (15t - 29 sqrt2)^2 / 2
    s = 15 * t - 29 * SQRT2
    R = (841 * e10 * s * s / 2, 841 * e10 * 15 * s, np.full_like(t, 841 * e10 * 225.0))
    x = _larger_root(P, R)
    y = _quotient(R, x)
    c = e30 / 841
    one = (np.ones_like(t), np.zeros_like(t), np.zeros_like(t))
    return tuple(np.stack([u, c * v, c * w], axis=-1) for u, v, w in zip(one, y, x))


# --------------------------------------------------------------------------
# named cases


def case_svk(dim: int = 2) -> NamedCase:
    F = 0.5 * np.eye(dim)
    I = np.eye(dim)
    probe = RankOneProbe(F, I[0], I[1], (-0.2, 0.2))
    return NamedCase("svk", probe, sm.OMEGA_SVK, 0.0, -0.5,
                     note="reference second derivative; direct expansion 4(1/4+1/4-1) gives -2")


def case_log_2d() -> NamedCase:
    F = np.diag([E(8.0), E(2.0)])
    xi = np.array([1.0, 1.0]) / SQRT2
    eta = eta_orthogonal_2d(F, xi, -1.0)
    probe = RankOneProbe(F, xi, eta, (-0.3, 0.3))
    e12 = E(12.0)
    return NamedCase("log2d", probe, sm.OMEGA_LOG, 0.0, (110 - 2 * e12) / (e12 - 1), _mu_log2d, (-1 / 3, np.inf))


def case_devlog_3d() -> NamedCase:
    F = np.diag([1.0, E(20.0), E(15.0)])
    xi = np.array([0.0, 1.0, 1.0]) / SQRT2
    eta = np.array([0.0, 10 * E(20.0), -25 * E(15.0)]) / 29
    probe = RankOneProbe(F, xi, eta, (-1.0, 1.0))
    e10 = E(10.0)
    lim = 29 * SQRT2 / 15
    return NamedCase("devlog3d", probe, sm.OMEGA_DEVLOG, 0.0, -25 * (4 * e10 - 49) / (841 * (e10 - 1)),
                     _mu_devlog3d, (-lim, lim))


def voliso_reference_value() -> float:
    e20, e40 = E(20.0), E(40.0)
    return 75 * (e40 * (319 - 185 * SQRT3) + 140 * e20 + 185 * SQRT3 + 301) / (16 * (e40 - 1))


def voliso_xi(alpha):
    return np.array([SQRT3 / 2 * np.sin(alpha), SQRT3 / 2 * np.cos(alpha), 0.5])


def case_voliso_3d(alpha: float = VOLISO_ALPHA) -> NamedCase:
    """Isochoric probe with det(F0 + t xi(x)eta) constant.

    The default angle minimises h''(0); the stored expected value is the
    reference closed form, which the construction does not reproduce.
    """
    F0 = np.diag([1.0, E(20.0), E(10.0)])
    xi = voliso_xi(alpha)
    eta = eta_cross_3d(F0, xi)
    probe = RankOneProbe(F0, xi, eta, (-0.5, 0.5))
    return NamedCase("voliso3d", probe, sm.OMEGA_DEVLOG, 0.0, voliso_reference_value(),
                     note=f"alpha = {alpha!r}")


CASES = {"svk": case_svk, "log2d": case_log_2d, "devlog3d": case_devlog_3d, "voliso3d": case_voliso_3d}


def mu_closed_form(case: NamedCase, t, derivatives=False):
    """Closed-form eigenvalues (ascending) of B(t) = (F + t xi(x)eta)(F + t xi(x)eta)^T."""
    if case.eigenvalue_oracle is None:
        raise InvalidInputError(f"case {case.identifier} has no closed-form eigenvalues")
    t = np.asarray(t, float)
    lo, hi = case.domain
    if np.any(t <= lo) or np.any(t >= hi):
        raise DomainError(f"t outside ({lo}, {hi})")
    mu, mu1, mu2 = case.eigenvalue_oracle(t)
    order = np.argsort(mu, axis=-1)
    pick = lambda a: np.take_along_axis(a, order, axis=-1)
    if derivatives:
        return pick(mu), pick(mu1), pick(mu2)
    return pick(mu)


def oracle_line_derivatives(case: NamedCase, t=0.0):
    """h'(t), h''(t) of h = omega(F + t xi(x)eta) from the closed-form eigenvalues.

    omega is ||log U||^2 or ||dev log U||^2, i.e. sum of (1/2 log mu_i)^2 with
    or without the mean removed.
    """
    mu, mu1, mu2 = mu_closed_form(case, t, derivatives=True)
    ell = 0.5 * np.log(mu)
    ell1 = 0.5 * mu1 / mu
    ell2 = 0.5 * (mu2 / mu - (mu1 / mu) ** 2)
    if case.measure is sm.OMEGA_DEVLOG:
        ell = ell - ell.mean(axis=-1, keepdims=True)
        ell1 = ell1 - ell1.mean(axis=-1, keepdims=True)
        ell2 = ell2 - ell2.mean(axis=-1, keepdims=True)
    h1 = 2 * np.sum(ell * ell1, axis=-1)
    h2 = 2 * np.sum(ell1 * ell1 + ell * ell2, axis=-1)
    return h1, h2

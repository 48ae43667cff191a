"""Scalar necessary/sufficient conditions on profiles Psi and on isotropic energies."""
from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from .probes import EPS, value_fn
from .reports import ConvexityReport, Verdict, grid_verdict


def profile_derivatives(psi, s):
    """(Psi', Psi'') at s; central differences when the profile has no closures."""
    s = np.asarray(s, dtype=float)
    d1 = getattr(psi, "d1", None)
    d2 = getattr(psi, "d2", None)
    f = getattr(psi, "value", psi)
    if d1 is not None:
        p1 = np.asarray(d1(s), dtype=float)
    else:
        h = EPS ** (1 / 3) * (1 + np.abs(s))
        p1 = (f(s + h) - f(s - h)) / (2 * h)
    if d2 is not None:
        p2 = np.asarray(d2(s), dtype=float)
    else:
        h = EPS ** 0.25 * (1 + np.abs(s))
        p2 = (f(s + h) - 2 * f(s) + f(s - h)) / (h * h)
    return np.broadcast_to(p1, s.shape), np.broadcast_to(p2, s.shape)


def _normalise(residual, scale):
    # the inequalities are homogeneous in Psi; dividing by |Psi'| makes the
    # reported worst value and its location independent of Psi's scale
    scale = np.abs(scale)
    return np.where(scale > 0, residual / np.where(scale > 0, scale, 1.0), residual)


def criterion_2d(psi, eta_grid=None, tol=1e-10) -> ConvexityReport:
    """2 eta Psi''(eta) + (1 - sqrt(2 eta)) Psi'(eta) >= 0."""
    eta = np.linspace(0.0, 10.0, 10001) if eta_grid is None else np.asarray(eta_grid, float)
    p1, p2 = profile_derivatives(psi, eta)
    raw = 2 * eta * p2 + (1 - np.sqrt(2 * eta)) * p1
    v = grid_verdict(_normalise(raw, p1), eta, tol)
    return ConvexityReport("criterion2d", {"criterion2d": v},
                           {"grid": [float(eta[0]), float(eta[-1]), len(eta)], "raw_worst": float(np.min(raw))})


def convexify_1d_coefficient(t):
    """(log t - 1) / (2 log^2 t)."""
    x = np.log(np.asarray(t, dtype=float))
    return (x - 1) / (2 * x * x)


def max_convexify_coefficient(bounds=(1.01, 100.0)):
    """(max value, argmax t) of the 1D coefficient, bounded scalar search in log t."""
    lo, hi = np.log(bounds[0]), np.log(bounds[1])
    res = minimize_scalar(lambda x: -float(convexify_1d_coefficient(np.exp(x))), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    return -float(res.fun), float(np.exp(res.x))


def convexify_1d_check(psi, t_grid=None, tol=1e-10) -> ConvexityReport:
    """Psi''((log t)^2) >= c(t) Psi'((log t)^2) with c the 1D coefficient."""
    t = np.geomspace(1e-3, 1e3, 6000) if t_grid is None else np.asarray(t_grid, float)
    t = t[np.abs(np.log(t)) > 1e-9]
    s = np.log(t) ** 2
    c = convexify_1d_coefficient(t)
    p1, p2 = profile_derivatives(psi, s)
    v = grid_verdict(_normalise(p2 - c * p1, p1), t, tol)
    cmax, targ = max_convexify_coefficient()
    return ConvexityReport("conv1d", {"conv1d": v}, {"coefficient_max": cmax, "coefficient_argmax": targ})


def sendova_walton_check(psi, t_grid=None, tol=1e-10) -> ConvexityReport:
    """Psi~''(t) >= (3t/8 + 1/t) Psi~'(t) for Psi~(t) = Psi(t^2), plus the reduced form."""
    t = np.linspace(0.05, 5.0, 2000) if t_grid is None else np.asarray(t_grid, float)
    t = t[t > 0]
    p1, p2 = profile_derivatives(psi, t * t)
    pt1 = 2 * t * p1
    pt2 = 2 * p1 + 4 * t * t * p2
    full = grid_verdict(_normalise(pt2 - (3 * t / 8 + 1 / t) * pt1, pt1), t, tol)
    reduced = grid_verdict(_normalise(p2 - 3 / 16 * p1, p1), t, tol)
    return ConvexityReport("sw", {"full": full, "reduced": reduced},
                           {"forms_agree": full.satisfied == reduced.satisfied})


def monotonicity_necessity_check(psi, grid=None, tol=0.0) -> ConvexityReport:
    """min Psi' on the grid; a negative value rules out rank-one convexity of Psi o omega."""
    s = np.linspace(0.0, 10.0, 2001) if grid is None else np.asarray(grid, float)
    p1, _ = profile_derivatives(psi, s)
    v = grid_verdict(p1, s, tol)
    return ConvexityReport("mono", {"mono": v}, {"flagged": not v.satisfied})


def _diag(lam):
    n = lam.shape[-1]
    D = np.zeros(lam.shape + (n,))
    idx = np.arange(n)
    D[..., idx, idx] = lam
    return D


def baker_ericksen_check(E, n_samples=500, seed=0, bounds=(0.1, 10.0), dim=3, tol=1e-6) -> ConvexityReport:
    """(l_i - l_j)(l_i g_i - l_j g_j) >= 0 with g(l) = E(diag l), g_i by central FD."""
    f = value_fn(E)
    rng = np.random.default_rng(seed)
    lam = np.exp(rng.uniform(np.log(bounds[0]), np.log(bounds[1]), size=(n_samples, dim)))
    h = EPS ** (1 / 3) * lam
    pts = [lam]
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        pts += [lam + h[:, i:i + 1] * e, lam - h[:, i:i + 1] * e]
    vals = np.asarray(f(_diag(np.stack(pts, axis=1))), dtype=float)
    g0 = vals[:, 0]
    lg = np.stack([lam[:, i] * (vals[:, 1 + 2 * i] - vals[:, 2 + 2 * i]) / (2 * h[:, i]) for i in range(dim)],
                  axis=1)
    worst, where = np.inf, None
    for i in range(dim):
        for j in range(i + 1, dim):
            be = (lam[:, i] - lam[:, j]) * (lg[:, i] - lg[:, j])
            r = be / (1.0 + np.abs(g0))
            k = int(np.argmin(r))
            if r[k] < worst:
                worst, where = float(r[k]), lam[k].tolist()
    v = Verdict(bool(worst >= -tol), worst, where, tol)
    return ConvexityReport("be", {"be": v}, {"n_samples": n_samples, "seed": seed, "bounds": list(bounds)})


def baker_ericksen_ordering_check(E, n_chains=200, seed=0, bounds=(0.1, 10.0), tol=1e-10) -> ConvexityReport:
    """g decreases along 3-point chains l > l' > l'' in log-majorisation (equal determinant).

    Each step moves two log-stretches towards each other by a random fraction,
    which keeps their sum and so the determinant.
    """
    f = value_fn(E)
    rng = np.random.default_rng(seed)
    x = rng.uniform(np.log(bounds[0]), np.log(bounds[1]), size=(n_chains, 3))
    chain = [x]
    for _ in range(2):
        y = chain[-1].copy()
        i, j = rng.choice(3, size=2, replace=False)
        frac = rng.uniform(0.05, 0.45, size=n_chains)
        d = frac * (y[:, i] - y[:, j])
        y[:, i] -= d
        y[:, j] += d
        chain.append(y)
    g = [np.asarray(f(_diag(np.exp(c))), dtype=float) for c in chain]
    drops = np.stack([g[0] - g[1], g[1] - g[2]], axis=1) / (1.0 + np.abs(g[0]))[:, None]
    k = np.unravel_index(np.argmin(drops), drops.shape)
    v = Verdict(bool(drops[k] >= -tol), float(drops[k]), np.exp(chain[k[1]][k[0]]).tolist(), tol)
    return ConvexityReport("be-ordering", {"be-ordering": v}, {"n_chains": n_chains, "seed": seed})

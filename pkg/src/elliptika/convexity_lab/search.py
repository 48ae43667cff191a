"""Derivative-free search for concave critical points of a strain measure or energy."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .. import tensor_core as tc
from ..errors import ElliptikaError, InvalidInputError
from .probes import RankOneProbe, concave_critical_point, gradient_fn, stencil_derivatives, value_fn
from .reports import jsonable
from .scan import sphere_angles, sphere_point


@dataclass(frozen=True)
class SearchConfig:
    eps_grad: float = 1e-6
    rho0: float = 1e2
    rho_factor: float = 10.0
    max_continuations: int = 6
    log_bound: float = 10.0     # diagonal of F lives in exp([-L, L])
    maxfev: int = 600
    workers: int = 1


@dataclass(frozen=True, eq=False)
class SearchResult:
    probe: RankOneProbe
    first: float
    second: float
    certified: bool
    seed_index: int
    seeds_tried: int
    seed: int
    evaluations: int

    def to_dict(self):
        return jsonable({"probe": self.probe.to_dict(), "first": self.first, "second": self.second,
                         "certified": self.certified, "seed_index": self.seed_index,
                         "seeds_tried": self.seeds_tried, "seed": self.seed, "evaluations": self.evaluations})


class _Problem:
    """Search coordinates: log-diagonal of F, angles of xi, and the direction m of eta = F^T m.

    With an analytic gradient G, h'(0) = (F G^T xi) . m, so m is drawn from the
    orthogonal complement of F G^T xi and the constraint holds by construction;
    otherwise m ranges over the sphere and only the penalty enforces it.
    """

    def __init__(self, target, dim, cfg):
        self.f, self.g = value_fn(target), gradient_fn(target)
        self.target, self.n, self.cfg = target, dim, cfg
        self.k = dim - 1
        self.projected = self.g is not None
        self.nm = dim - 2 if self.projected else dim - 1
        self.npar = dim + self.k + self.nm
        self.evals = 0

    def unpack(self, x):
        n, k, L = self.n, self.k, self.cfg.log_bound
        F = np.diag(np.exp(L * np.tanh(x[:n])))
        xi = sphere_point(x[n:n + k], n)
        tail = x[n + k:]
        if not self.projected:
            m = sphere_point(tail, n)
        else:
            a = F @ (self.g(F).T @ xi)
            na = np.linalg.norm(a)
            a = a / na if na > 0 else np.eye(n)[-1]
            if n == 2:
                m = np.array([-a[1], a[0]])
            else:
                j = int(np.argmin(np.abs(a)))
                w1 = np.cross(a, np.eye(3)[j])
                w1 /= np.linalg.norm(w1)
                w2 = np.cross(a, w1)
                m = np.cos(tail[0]) * w1 + np.sin(tail[0]) * w2
        # eta = F^T m with unit m keeps h'' O(1) however graded F is
        return F, xi, F.T @ m

    def derivs(self, F, xi, eta):
        self.evals += 1
        r = stencil_derivatives(self.f, F, tc.outer(xi, eta), self.g)
        if not r["finite"]:
            return np.nan, np.nan
        first = r["first_analytic"] if self.g is not None else r["first_fd"]
        return float(first), float(r["second"])

    def objective(self, x, rho):
        try:
            d1, d2 = self.derivs(*self.unpack(x))
        except (ElliptikaError, FloatingPointError, np.linalg.LinAlgError):
            return 1e30
        if not np.isfinite(d1 + d2):
            return 1e30
        return d2 + rho * d1 * d1


def _polish(prob, F, xi, eta):
    """Project eta onto {h'(0) = 0}: h'(0) = xi . G eta is linear in eta."""
    if prob.g is not None:
        G = prob.g(F)
    else:
        n = prob.n
        G = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                E = np.zeros((n, n))
                E[i, j] = 1.0
                G[i, j] = stencil_derivatives(prob.f, F, E)["first_fd"]
    a = G.T @ xi
    na = a @ a
    if na <= 0:
        return eta
    return eta - (a @ eta) / na * a


def _run_seed(prob, x0):
    cfg = prob.cfg
    rho, x = cfg.rho0, np.asarray(x0, float)
    for _ in range(cfg.max_continuations):
        res = minimize(prob.objective, x, args=(rho,), method="Nelder-Mead",
                       options={"maxfev": cfg.maxfev, "xatol": 1e-10, "fatol": 1e-12, "adaptive": True})
        x = res.x
        try:
            d1, _ = prob.derivs(*prob.unpack(x))
        except (ElliptikaError, FloatingPointError, np.linalg.LinAlgError):
            break
        if abs(d1) <= cfg.eps_grad:
            break
        rho *= cfg.rho_factor
    F, xi, eta = prob.unpack(x)
    try:
        eta = _polish(prob, F, xi, eta)
        root = abs(RankOneProbe(F, xi, eta, (0.0, 1e-12)).det_root())
        half = min(0.5, 0.5 * root) if np.isfinite(root) else 0.5
        probe = RankOneProbe(F, xi, eta, (-half, half))
        v = concave_critical_point(prob.target, probe)
    except (ElliptikaError, FloatingPointError, np.linalg.LinAlgError):
        return None
    certified = v.is_counterexample and abs(v.first) <= cfg.eps_grad
    return probe, v, bool(certified)


def _init_vector(init: RankOneProbe, n, L, projected):
    d = np.diag(init.F)
    if not np.allclose(init.F, np.diag(d)) or np.any(d <= 0):
        raise InvalidInputError("initial probe must have a positive diagonal F")
    y = np.clip(np.log(d) / L, -0.999999, 0.999999)
    m = np.linalg.solve(init.F.T, init.eta)
    tail = sphere_angles(m) if not projected else np.zeros(n - 2)
    return np.concatenate([np.arctanh(y), sphere_angles(init.xi), tail])


def search_violation(target, dim, n_seeds=200, seed=7, config: SearchConfig | None = None,
                     init: RankOneProbe | None = None, stop_at_first=True) -> SearchResult:
    """Minimise h''(0) + rho h'(0)^2 over diagonal F, unit xi and eta = F^T m, m unit.

    Seeds are tried in order; with ``stop_at_first`` the search returns the
    first certified probe, otherwise the most negative certified (or best) one.
    """
    if dim not in (2, 3):
        raise InvalidInputError("dim must be 2 or 3")
    cfg = config or SearchConfig()
    prob = _Problem(target, dim, cfg)
    rng = np.random.default_rng(seed)
    starts = [rng.normal(size=prob.npar) for _ in range(n_seeds)]
    if init is not None:
        x0 = _init_vector(init, dim, cfg.log_bound, prob.projected)
        starts = [x0] + [x0 + 0.05 * s for s in starts[:-1]]

    best, best_idx, tried = None, -1, 0
    batch = max(1, int(cfg.workers))
    for lo in range(0, n_seeds, batch):
        idx = list(range(lo, min(n_seeds, lo + batch)))
        if batch > 1:
            with ThreadPoolExecutor(max_workers=batch) as ex:
                outs = list(ex.map(lambda i: _run_seed(prob, starts[i]), idx))
        else:
            outs = [_run_seed(prob, starts[i]) for i in idx]
        tried = idx[-1] + 1
        for i, out in zip(idx, outs):
            if out is None:
                continue
            key = (not out[2], out[1].second)
            if best is None or key < (not best[2], best[1].second):
                best, best_idx = out, i
        if stop_at_first and best is not None and best[2]:
            break
    if best is None:
        raise ElliptikaError("search produced no admissible probe")
    probe, v, cert = best
    return SearchResult(probe, v.first, v.second, cert, best_idx, tried, seed, prob.evals)

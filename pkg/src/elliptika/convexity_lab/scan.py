"""Legendre-Hadamard scans: sampled minimum of h''(0) over rank-one directions."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import tensor_core as tc
from ..errors import ElliptikaError
from .probes import stencil_derivatives, value_fn
from .reports import ConvexityReport, Verdict


def sphere_point(angles, n):
    if n == 1:
        return np.ones(angles.shape[:-1] + (1,))
    if n == 2:
        a = angles[..., 0]
        return np.stack([np.cos(a), np.sin(a)], axis=-1)
    th, ph = angles[..., 0], angles[..., 1]
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)


def sphere_angles(v):
    v = np.asarray(v, float) / np.linalg.norm(v, axis=-1, keepdims=True)
    n = v.shape[-1]
    if n == 1:
        return np.zeros(v.shape[:-1] + (0,))
    if n == 2:
        return np.arctan2(v[..., 1], v[..., 0])[..., None]
    return np.stack([np.arccos(np.clip(v[..., 2], -1, 1)), np.arctan2(v[..., 1], v[..., 0])], axis=-1)


def _second_batch(f, F, xi, eta, tol_rel):
    """h''(0) with error estimate for each direction; failures flagged."""
    H = tc.outer(xi, eta)
    try:
        r = stencil_derivatives(f, F, H)
        ok = np.asarray(r["finite"], bool)
        return r["second"], r["second_err"], r["h0"], ok
    except (ElliptikaError, FloatingPointError, ValueError, np.linalg.LinAlgError):
        if len(xi) == 1:
            nan = np.full(1, np.nan)
            return nan, nan, nan, np.zeros(1, bool)
        parts = [_second_batch(f, F, xi[i:i + 1], eta[i:i + 1], tol_rel) for i in range(len(xi))]
        return tuple(np.concatenate([p[k] for p in parts]) for k in range(4))


def _margin(second, err, h0, tol_rel):
    tol = tol_rel * (np.abs(h0) + 1.0)
    return second / (tol + err), tol


def _refine(f, F, xi, eta, tol_rel, max_evals=300):
    """Coordinate descent on sphere angles of xi and of m = F^{-T} eta / c."""
    n = F.shape[-1]
    Finv_t = tc.inv_transpose(F)
    m = Finv_t @ eta
    c = np.linalg.norm(m)
    p = np.concatenate([sphere_angles(xi), sphere_angles(m)])
    k = n - 1

    def build(p):
        return sphere_point(p[:k], n), c * (tc.transpose(F) @ sphere_point(p[k:], n))

    def obj(p):
        x, e = build(p)
        s, err, h0, ok = _second_batch(f, F, x[None], e[None], tol_rel)
        if not ok[0]:
            return np.inf, None
        return float(s[0]), (float(s[0]), float(err[0]), float(h0[0]))

    best, info = obj(p)
    step, evals = 0.2, 1
    while step > 1e-4 and evals < max_evals:
        improved = False
        for i in range(len(p)):
            for sgn in (1.0, -1.0):
                q = p.copy()
                q[i] += sgn * step
                val, inf = obj(q)
                evals += 1
                if val < best:
                    best, info, p, improved = val, inf, q, True
                    break
        if not improved:
            step *= 0.5
    x, e = build(p)
    return x, e, info


def critical_directions(F, n, rng):
    """Directions along which the logarithmic measures have a critical point at F.

    With D = log V (2D) or dev log V (3D) and m = F^{-T} eta, m is orthogonal to
    D xi: a quarter turn of D xi in 2D; in 3D alternately xi x D xi (which also
    keeps det constant) or a random unit vector orthogonal to D xi.  eta = F^T m
    carries F's own scale, so h'' stays resolvable when F is strongly graded.
    """
    F = tc.as_matrix(F, "F")
    dim = F.shape[-1]
    L = tc.log_stretch(F, "left")
    if dim == 3:
        L = tc.deviatoric(L)
    xi = rng.normal(size=(n, dim))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    w = xi @ L.T
    if dim == 2:
        m = np.stack([w[:, 1], -w[:, 0]], axis=1)
    else:
        m = np.cross(xi, w)
        r = np.cross(w, rng.normal(size=(n, dim)))
        m[1::2] = r[1::2] * (np.linalg.norm(w[1::2], axis=1) / np.maximum(np.linalg.norm(r[1::2], axis=1), 1e-300))[:, None]
    keep = np.linalg.norm(m, axis=1) > 1e-12 * (1.0 + np.linalg.norm(L))
    return list(zip(xi[keep], m[keep] @ F))


def lh_scan(E, F, n_directions=2000, refine=False, seed=0, seed_directions=None, tol=1e-8, workers=1,
            n_refine=3, n_critical=0) -> ConvexityReport:
    """Sampled Legendre-Hadamard check of E at F.

    Random directions are unit pairs (xi, eta); ``seed_directions`` are used as
    supplied and ``n_critical`` adds directions from ``critical_directions``.
    A direction counts as a violation only when h'' < -(tol (|h0|+1) + FD error).
    """
    f = value_fn(E)
    F = tc.as_matrix(F, "F")
    n = F.shape[-1]
    rng = np.random.default_rng(seed)
    xi = rng.normal(size=(n_directions, n))
    eta = rng.normal(size=(n_directions, n))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    eta /= np.linalg.norm(eta, axis=1, keepdims=True)
    seed_directions = list(seed_directions or [])
    if n_critical and n > 1:
        seed_directions += critical_directions(F, n_critical, rng)
    if seed_directions:
        sx = np.array([np.asarray(a, float) for a, _ in seed_directions])
        se = np.array([np.asarray(b, float) for _, b in seed_directions])
        xi, eta = np.concatenate([sx, xi]), np.concatenate([se, eta])

    chunks = np.array_split(np.arange(len(xi)), max(1, int(workers)) * 4) if workers > 1 else [np.arange(len(xi))]
    chunks = [c for c in chunks if len(c)]
    job = lambda idx: _second_batch(f, F, xi[idx], eta[idx], tol)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as ex:
            parts = list(ex.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    second, err, h0, ok = (np.concatenate([p[k] for p in parts]) for k in range(4))

    skipped = int(np.sum(~ok))
    margin, tol_abs = _margin(second, err, h0, tol)
    margin = np.where(ok, margin, np.inf)
    order = np.argsort(margin, kind="stable")

    refined = []
    if refine and np.any(ok):
        for i in order[:n_refine]:
            if not ok[i]:
                continue
            x, e, info = _refine(f, F, xi[i], eta[i], tol)
            if info is not None:
                refined.append((x, e) + info)
    cands = [(second[i], err[i], h0[i], xi[i], eta[i]) for i in order[:1] if ok[i]]
    cands += [(s, er, z, x, e) for x, e, s, er, z in refined]
    if not cands:
        v = Verdict(True, float("nan"), None, tol)
        return ConvexityReport("lh", {"lh": v}, {"seed": seed, "n_directions": int(len(xi)), "skipped": skipped})

    def cand_margin(c):
        return c[0] / (tol * (abs(c[2]) + 1.0) + c[1])

    best = min(cands, key=cand_margin)
    s, er, z, x, e = best
    tol_here = tol * (abs(z) + 1.0)
    v = Verdict(bool(s >= -(tol_here + er)), float(s), {"xi": x.tolist(), "eta": e.tolist()}, tol_here)
    okv = second[ok]
    details = {
        "seed": seed,
        "n_directions": int(len(xi)),
        "skipped": skipped,
        "min_second": float(min(np.min(okv), min(c[0] for c in cands))) if okv.size else float(s),
        "fd_error": float(er),
        "refined": bool(refine),
    }
    return ConvexityReport("lh", {"lh": v}, details)

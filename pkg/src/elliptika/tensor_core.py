"""Dense tensor algebra for 1x1, 2x2 and 3x3 matrices.

Every routine broadcasts over leading axes, so a stack of matrices has
shape ``(..., n, n)``.  The symmetric eigensolver is closed form and keeps
high relative accuracy on positive definite, strongly graded input (the
spectra met here span up to e^40).
"""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, InvalidInputError, NotSPDError, OrientationError

EPS = np.finfo(float).eps
_TWO_PI_3 = 2.0 * np.pi / 3.0


class SpectralDecomposition(NamedTuple):
    """Eigenvalues sorted descending, eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues[..., None, :]) @ np.swapaxes(Q, -1, -2)


def as_matrix(A, name="matrix") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2] or A.shape[-1] not in (1, 2, 3):
        raise InvalidInputError(f"{name} must have shape (..., n, n) with n in 1..3, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return A


def unit_vector(v, name="vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} has non-finite entries")
    nv = np.linalg.norm(v, axis=-1)
    if np.any(abs(nv - 1.0) > 1e-12):
        raise InvalidInputError(f"{name} must have unit norm")
    return v


def identity_like(A) -> np.ndarray:
    return np.broadcast_to(np.eye(A.shape[-1]), A.shape).copy()


def transpose(A):
    return np.swapaxes(A, -1, -2)


def trace(A):
    return np.trace(A, axis1=-2, axis2=-1)


def frobenius_inner(A, B):
    return np.sum(A * B, axis=(-2, -1))


def frobenius_norm(A):
    return np.sqrt(frobenius_inner(A, A))


def sym(A):
    return 0.5 * (A + transpose(A))


def deviatoric(S):
    n = S.shape[-1]
    return S - (trace(S) / n)[..., None, None] * np.eye(n)


def outer(a, b):
    return np.asarray(a, float)[..., :, None] * np.asarray(b, float)[..., None, :]


def cofactor(A) -> np.ndarray:
    """Cofactor matrix by minor expansion (no inverse needed)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[-1]
    if n == 1:
        return np.ones_like(A)
    if n == 2:
        C = np.empty_like(A)
        C[..., 0, 0] = A[..., 1, 1]
        C[..., 0, 1] = -A[..., 1, 0]
        C[..., 1, 0] = -A[..., 0, 1]
        C[..., 1, 1] = A[..., 0, 0]
        return C
    C = np.empty_like(A)
    for i in range(3):
        i1, i2 = (i + 1) % 3, (i + 2) % 3
        for j in range(3):
            j1, j2 = (j + 1) % 3, (j + 2) % 3
            C[..., i, j] = A[..., i1, j1] * A[..., i2, j2] - A[..., i1, j2] * A[..., i2, j1]
    return C


def det(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    n = A.shape[-1]
    if n == 1:
        return A[..., 0, 0].copy()
    if n == 2:
        return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    return np.sum(A[..., 0, :] * cofactor(A)[..., 0, :], axis=-1)


def inv_transpose(F) -> np.ndarray:
    return transpose(np.linalg.inv(F))


def anti(v) -> np.ndarray:
    """Skew matrix with anti(v) @ w == cross(v, w)."""
    v = np.asarray(v, dtype=float)
    W = np.zeros(v.shape[:-1] + (3, 3))
    W[..., 0, 1], W[..., 0, 2] = -v[..., 2], v[..., 1]
    W[..., 1, 0], W[..., 1, 2] = v[..., 2], -v[..., 0]
    W[..., 2, 0], W[..., 2, 1] = -v[..., 1], v[..., 0]
    return W


def rotation_about_axis(axis, angle) -> np.ndarray:
    """Rodrigues form cos(a) Id + sin(a) anti(axis) + (1 - cos(a)) axis x axis."""
    axis = unit_vector(axis, "axis")
    if axis.shape[-1] != 3:
        raise InvalidInputError("axis must be a 3-vector")
    c, s = np.cos(angle), np.sin(angle)
    return c * np.eye(3) + s * anti(axis) + (1.0 - c) * outer(axis, axis)


# --------------------------------------------------------------------------
# symmetric eigensolver


def _sign_normalise(Q):
    # first non-negligible component of each column made positive
    mag = np.abs(Q)
    big = mag > 1e-12 * np.max(mag, axis=-2, keepdims=True)
    first = np.argmax(big, axis=-2)
    lead = np.take_along_axis(Q, first[..., None, :], axis=-2)
    return Q * np.where(lead < 0, -1.0, 1.0)


def _sort_desc(vals, vecs):
    order = np.argsort(-vals, axis=-1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=-1)
    vecs = np.take_along_axis(vecs, order[..., None, :], axis=-1)
    return vals, vecs


def _eig2(A, inv):
    a, b, d = A[:, 0, 0], A[:, 0, 1], A[:, 1, 1]
    half = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), b)
    dt = inv[1] if inv is not None else a * d - b * b
    big = np.where(half >= 0, half + rad, half - rad)
    safe = np.where(big != 0, big, 1.0)
    other = np.where(big != 0, dt / safe, half - rad)
    hi = np.where(half >= 0, big, other)
    lo = np.where(half >= 0, other, big)
    th = 0.5 * np.arctan2(2.0 * b, a - d)
    c, s = np.cos(th), np.sin(th)
    Q = np.empty_like(A)
    Q[:, 0, 0], Q[:, 1, 0] = c, s
    Q[:, 0, 1], Q[:, 1, 1] = -s, c
    return np.stack([hi, lo], axis=-1), Q


def _cross(a, b):
    # np.cross is slow on small stacks
    return np.stack([a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
                     a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
                     a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]], axis=-1)


def _null_vector(M):
    """Best cross product of rows of a rank-2 symmetric 3x3 matrix."""
    r0, r1, r2 = M[:, 0], M[:, 1], M[:, 2]
    cands = np.stack([_cross(r0, r1), _cross(r0, r2), _cross(r1, r2)], axis=1)
    norms = np.linalg.norm(cands, axis=-1)
    k = np.argmax(norms, axis=1)
    idx = np.arange(M.shape[0])
    best = norms[idx, k]
    v = cands[idx, k] / np.where(best > 0, best, 1.0)[:, None]
    return v, best


def _eig3(A, inv):
    m = A.shape[0]
    I = np.eye(3)
    q = np.trace(A, axis1=1, axis2=2) / 3.0
    B = A - q[:, None, None] * I
    p = np.sqrt(np.sum(B * B, axis=(1, 2)) / 6.0)
    flat = p <= 0
    ps = np.where(flat, 1.0, p)
    r = np.clip(det(B / ps[:, None, None]) / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    l1 = q + 2 * p * np.cos(phi)
    l3 = q + 2 * p * np.cos(phi + _TWO_PI_3)
    l2 = 3 * q - l1 - l3

    # most isolated eigenvalue first: its kernel vector is well conditioned
    top = (l1 - l2) >= (l2 - l3)
    lam_iso = np.where(top, l1, l3)
    u, ncross = _null_vector(A - lam_iso[:, None, None] * I)
    bad = ~flat & ~(ncross >= 0.1 * p * p)

    # remaining pair: 2x2 Jacobi solve on the orthogonal complement of u
    k = np.argmin(np.abs(u), axis=1)
    w1 = _cross(u, I[k])
    w1 /= np.maximum(np.linalg.norm(w1, axis=1), 1e-300)[:, None]
    w2 = _cross(u, w1)
    Aw1 = np.einsum("mij,mj->mi", A, w1)
    Aw2 = np.einsum("mij,mj->mi", A, w2)
    a = np.sum(w1 * Aw1, axis=1)
    b = np.sum(w1 * Aw2, axis=1)
    d = np.sum(w2 * Aw2, axis=1)
    half = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), b)
    th = 0.5 * np.arctan2(2.0 * b, a - d)
    c, s = np.cos(th), np.sin(th)
    y_hi = c[:, None] * w1 + s[:, None] * w2
    y_lo = -s[:, None] * w1 + c[:, None] * w2
    lam_u = np.einsum("mi,mi->m", u, np.einsum("mij,mj->mi", A, u))

    vals = np.stack([lam_u, half + rad, half - rad], axis=1)
    vecs = np.stack([u, y_hi, y_lo], axis=2)
    vals, vecs = _sort_desc(vals, vecs)

    # relative-accuracy refinement of the two smaller eigenvalues (SPD only)
    if inv is None:
        I1 = np.trace(A, axis1=1, axis2=2)
        I2 = np.trace(cofactor(A), axis1=1, axis2=2)
        I3 = det(A)
    else:
        I1, I2, I3 = inv
    la, lb, lc = vals[:, 0], vals[:, 1], vals[:, 2]
    pd = ~flat & ~bad & (la > 0) & (I3 > 0) & (I2 > 0)
    if np.any(pd):
        with np.errstate(all="ignore"):
            pa = ((la - I1) * la + I2) * la - I3
            dpa = (3 * la - 2 * I1) * la + I2
            la_n = la - pa / dpa
            pn = ((la_n - I1) * la_n + I2) * la_n - I3
            # near a double root p' ~ gap and the step is rounding noise / gap;
            # the polish is only meant to fix rounding-level error
            better = (np.isfinite(la_n) & (np.abs(pn) < np.abs(pa)) & (la_n > 0)
                      & (np.abs(la_n - la) <= 1e-12 * la))
            la_r = np.where(better, la_n, la)
            prod = I3 / la_r
            ssum = (I2 - prod) / la_r
            disc = np.maximum(ssum * ssum - 4 * prod, 0.0)
            lb_r = 0.5 * (ssum + np.sqrt(disc))
            lc_r = prod / lb_r
            e_ref = EPS * ssum / np.maximum(lb_r - lc_r, np.sqrt(EPS) * ssum)
            use_b = pd & (lb_r > 0) & (EPS * la_r / lb_r > e_ref)
            use_c = pd & (lc_r > 0) & (EPS * la_r / lc_r > e_ref)
        vals[:, 0] = np.where(pd, la_r, la)
        vals[:, 1] = np.where(use_b, lb_r, lb)
        vals[:, 2] = np.where(use_c, lc_r, lc)

        # graded case: recompute the smallest eigenvector from its own kernel
        graded = use_c & top & ((vals[:, 1] - vals[:, 2]) > 0.1 * vals[:, 1])
        if np.any(graded):
            g = np.nonzero(graded)[0]
            v3, n3 = _null_vector(A[g] - vals[g, 2][:, None, None] * I)
            v1 = vecs[g, :, 0]
            v3 = v3 - np.sum(v3 * v1, axis=1)[:, None] * v1
            nv = np.linalg.norm(v3, axis=1)
            ok = (n3 > 0) & (nv > 0.5)
            v3 = v3 / np.where(nv > 0, nv, 1.0)[:, None]
            v2 = _cross(v3, v1)
            gi = g[ok]
            vecs[gi, :, 2] = v3[ok]
            vecs[gi, :, 1] = v2[ok]

    vals, vecs = _sort_desc(vals, vecs)
    if np.any(flat):
        vals[flat] = q[flat][:, None]
        vecs[flat] = I
    if np.any(bad):
        w, V = np.linalg.eigh(A[bad])
        vals[bad] = w[:, ::-1]
        vecs[bad] = V[:, :, ::-1]
    return vals, vecs


def sym_eig(S, invariants=None) -> SpectralDecomposition:
    """Eigen-decomposition of symmetric S (..., n, n), n <= 3.

    ``invariants`` optionally supplies (I1, ..., In) of S computed more
    accurately than S's own entries allow (e.g. from F for S = F^T F).
    """
    S = as_matrix(S, "S")
    n = S.shape[-1]
    scale_s = np.max(np.abs(S), axis=(-2, -1), initial=0.0)
    if np.any(np.abs(S - transpose(S)) > 1e-10 * np.maximum(scale_s, 1e-300)[..., None, None]):
        raise InvalidInputError("S is not symmetric")
    lead = S.shape[:-2]
    A = sym(S).reshape(-1, n, n)
    scale = np.where(scale_s > 0, scale_s, 1.0).reshape(-1)
    A = A / scale[:, None, None]
    inv = None
    if invariants is not None:
        inv = [np.broadcast_to(np.asarray(x, float), lead).reshape(-1) / scale ** (k + 1)
               for k, x in enumerate(invariants)]
    if n == 1:
        vals, vecs = A[:, 0, :].copy(), np.ones_like(A)
    elif n == 2:
        vals, vecs = _eig2(A, inv)
        vals, vecs = _sort_desc(vals, vecs)
    else:
        vals, vecs = _eig3(A, inv)
    vals = vals * scale[:, None]
    vecs = _sign_normalise(vecs)
    return SpectralDecomposition(vals.reshape(lead + (n,)), vecs.reshape(lead + (n, n)))


def primary_matrix_function(S, f: Callable, domain=None) -> np.ndarray:
    """Q diag(f(lambda)) Q^T; ``domain`` is an optional open interval (lo, hi)."""
    dec = sym_eig(S)
    lam = dec.eigenvalues
    if domain is not None:
        lo, hi = domain
        if np.any(lam <= lo) or np.any(lam >= hi):
            raise DomainError(f"eigenvalues outside ({lo}, {hi})")
    Q = dec.eigenvectors
    return sym((Q * f(lam)[..., None, :]) @ transpose(Q))


def spd_log(S) -> np.ndarray:
    dec = sym_eig(S)
    if np.any(dec.eigenvalues <= 0):
        raise NotSPDError("matrix logarithm needs a positive definite argument")
    Q = dec.eigenvectors
    return sym((Q * np.log(dec.eigenvalues)[..., None, :]) @ transpose(Q))


def sym_exp(S) -> np.ndarray:
    return primary_matrix_function(S, np.exp)


# --------------------------------------------------------------------------
# stretches


def stretch_invariants(F):
    """Invariants of F^T F (= those of F F^T) computed from F's minors."""
    n = F.shape[-1]
    I1 = np.sum(F * F, axis=(-2, -1))
    if n == 1:
        return (I1,)
    J = det(F)
    if n == 2:
        return (I1, J * J)
    C = cofactor(F)
    return (I1, np.sum(C * C, axis=(-2, -1)), J * J)


def check_orientation(F):
    J = det(F)
    if np.any(J <= 0):
        raise OrientationError("det F must be positive")
    return J


def stretch_spectrum(F, side="right", need_orientation=True):
    """Principal stretches (descending) and the right or left principal axes."""
    F = as_matrix(F, "F")
    if need_orientation:
        check_orientation(F)
    S = transpose(F) @ F if side == "right" else F @ transpose(F)
    dec = sym_eig(S, invariants=stretch_invariants(F))
    return np.sqrt(np.maximum(dec.eigenvalues, 0.0)), dec.eigenvectors


def singular_values(F) -> np.ndarray:
    return stretch_spectrum(F, need_orientation=False)[0]


def _from_spectrum(vals, Q):
    return sym((Q * vals[..., None, :]) @ transpose(Q))


def right_stretch(F) -> np.ndarray:
    sig, Q = stretch_spectrum(F, "right")
    return _from_spectrum(sig, Q)


def left_stretch(F) -> np.ndarray:
    sig, Q = stretch_spectrum(F, "left")
    return _from_spectrum(sig, Q)


def log_stretch(F, side="left") -> np.ndarray:
    sig, Q = stretch_spectrum(F, side)
    return _from_spectrum(np.log(sig), Q)

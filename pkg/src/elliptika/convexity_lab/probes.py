"""Rank-one lines t -> F + t xi (x) eta and finite-difference derivatives along them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .. import tensor_core as tc
from ..errors import IntervalError, InvalidInputError, NumericalError

EPS = np.finfo(float).eps


def value_fn(E):
    """Accept an EnergyDefinition, a StrainMeasure or a bare callable F -> W."""
    f = getattr(E, "value", E)
    if not callable(f):
        raise InvalidInputError("energy must be callable or expose .value")
    return f


def gradient_fn(E):
    return getattr(E, "gradient", None)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RankOneProbe:
    F: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    t_interval: tuple = (-0.1, 0.1)

    def __post_init__(self):
        F = tc.as_matrix(self.F, "F")
        if F.ndim != 2:
            raise InvalidInputError("a probe holds a single matrix")
        n = F.shape[0]
        xi, eta = np.asarray(self.xi, float), np.asarray(self.eta, float)
        if xi.shape != (n,) or eta.shape != (n,):
            raise InvalidInputError("xi and eta must be vectors matching F")
        if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(eta))):
            raise InvalidInputError("xi and eta must be finite")
        if not np.any(xi) or not np.any(eta):
            raise InvalidInputError("xi and eta must be nonzero")
        t0, t1 = (float(x) for x in self.t_interval)
        if not t0 <= 0.0 <= t1 or t0 == t1:
            raise InvalidInputError("t_interval must contain 0")
        object.__setattr__(self, "F", _frozen(F))
        object.__setattr__(self, "xi", _frozen(xi))
        object.__setattr__(self, "eta", _frozen(eta))
        object.__setattr__(self, "t_interval", (t0, t1))
        # det(F + tH) is affine in t, so positivity at the ends covers the interval
        ts = np.linspace(t0, t1, 65)
        d = tc.det(self.at(ts))
        if np.any(d <= 0):
            raise IntervalError(f"det(F + t xi(x)eta) <= 0 at t = {ts[np.argmax(d <= 0)]:.17g}")

    @property
    def dim(self) -> int:
        return self.F.shape[0]

    @property
    def direction(self) -> np.ndarray:
        return tc.outer(self.xi, self.eta)

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.F + t[..., None, None] * self.direction

    def det_root(self) -> float:
        """t at which det(F + tH) vanishes (inf if never)."""
        slope = float(tc.frobenius_inner(tc.cofactor(self.F), self.direction))
        if slope == 0.0:
            return np.inf
        return -float(tc.det(self.F)) / slope

    def step_scale(self) -> float:
        return 1.0 + float(np.linalg.norm(self.F) / np.linalg.norm(self.direction))

    def with_interval(self, t_interval) -> "RankOneProbe":
        return RankOneProbe(self.F, self.xi, self.eta, t_interval)

    def to_dict(self) -> dict:
        return {"F": self.F.tolist(), "xi": self.xi.tolist(), "eta": self.eta.tolist(),
                "t_interval": list(self.t_interval)}

    @classmethod
    def from_dict(cls, d) -> "RankOneProbe":
        return cls(np.array(d["F"]), np.array(d["xi"]), np.array(d["eta"]), tuple(d.get("t_interval", (-0.1, 0.1))))


class LineDerivatives(NamedTuple):
    first: float            # analytic when a gradient exists, else Richardson FD
    second: float           # Richardson FD
    first_err: float
    second_err: float
    step1: float
    step2: float
    h0: float
    first_fd: float
    first_analytic: Optional[float]
    second_single: float    # plain central difference at step2

    @property
    def gradient_consistent(self) -> bool:
        if self.first_analytic is None:
            return True
        return abs(self.first_fd - self.first_analytic) <= self.first_err + 1e-6 * (abs(self.h0) + 1.0)


def _steps(F, H, max_step=None):
    scale = 1.0 + np.linalg.norm(F, axis=(-2, -1)) / np.linalg.norm(H, axis=(-2, -1))
    h1, h2 = EPS ** (1 / 3) * scale, EPS ** 0.25 * scale
    if max_step is not None:
        h1, h2 = np.minimum(h1, max_step), np.minimum(h2, max_step)
    return h1, h2, scale


def _det_cap(F, H):
    slope = tc.frobenius_inner(tc.cofactor(F), H)
    with np.errstate(divide="ignore"):
        root = np.where(slope != 0, np.abs(tc.det(F) / np.where(slope != 0, slope, 1.0)), np.inf)
    # the widest stencil point sits at 2h; keep it well inside det > 0
    return 0.125 * root


def stencil_derivatives(f, F, H, grad=None):
    """Vectorised Richardson derivatives of t -> f(F + tH) at t = 0.

    F and H broadcast to (..., n, n).  Returns dict of arrays.
    """
    F, H = np.broadcast_arrays(np.asarray(F, float), np.asarray(H, float))
    h1, h2, _ = _steps(F, H)
    cap = _det_cap(F, H)
    h1, h2 = np.minimum(h1, cap), np.minimum(h2, cap)
    if np.any(h2 <= 0) or np.any(h1 <= 0) or np.any(h2 < 1e-300):
        raise NumericalError("step underflow")
    offs = np.array([0.0, 1, -1, 2, -2])
    ts = np.concatenate([offs * h1[..., None], offs[1:] * h2[..., None]], axis=-1)  # (..., 9)
    pts = F[..., None, :, :] + ts[..., None, None] * H[..., None, :, :]
    vals = np.asarray(f(pts), dtype=float)
    f0 = vals[..., 0]
    a1, m1, a2, m2 = (vals[..., k] for k in range(1, 5))
    b1, n1, b2, n2 = (vals[..., k] for k in range(5, 9))
    fmax = np.max(np.abs(vals), axis=-1)
    d1a = (a1 - m1) / (2 * h1)
    d1b = (a2 - m2) / (4 * h1)
    first_fd = (4 * d1a - d1b) / 3
    first_err = np.abs(first_fd - d1a) + 2 * EPS * fmax / h1
    d2a = (b1 - 2 * f0 + n1) / h2 ** 2
    d2b = (b2 - 2 * f0 + n2) / (4 * h2 ** 2)
    second = (4 * d2a - d2b) / 3
    second_err = np.abs(second - d2a) + 8 * EPS * fmax / h2 ** 2
    out = dict(h0=f0, first_fd=first_fd, first_err=first_err, second=second, second_err=second_err,
               second_single=d2a, step1=h1, step2=h2, finite=np.all(np.isfinite(vals), axis=-1))
    if grad is not None:
        out["first_analytic"] = tc.frobenius_inner(grad(F), H)
    return out


def line_derivatives(E, probe: RankOneProbe) -> LineDerivatives:
    f, g = value_fn(E), gradient_fn(E)
    r = stencil_derivatives(f, probe.F, probe.direction, g)
    if not r["finite"]:
        raise NumericalError("non-finite energy value on the FD stencil")
    fa = float(r["first_analytic"]) if g is not None else None
    first = fa if fa is not None else float(r["first_fd"])
    return LineDerivatives(first, float(r["second"]), float(r["first_err"]), float(r["second_err"]),
                           float(r["step1"]), float(r["step2"]), float(r["h0"]), float(r["first_fd"]), fa,
                           float(r["second_single"]))


@dataclass(frozen=True, eq=False)
class LineProfile:
    probe: RankOneProbe
    t: np.ndarray
    h: np.ndarray
    derivatives: LineDerivatives

    @property
    def samples(self):
        return np.column_stack([self.t, self.h])


def line_profile(E, probe: RankOneProbe, n_samples: int = 101, t_interval=None) -> LineProfile:
    if n_samples < 3:
        raise InvalidInputError("need at least 3 samples")
    t0, t1 = t_interval if t_interval is not None else probe.t_interval
    t = np.linspace(t0, t1, n_samples)
    if not np.any(t == 0.0) and t0 <= 0.0 <= t1:
        t = np.sort(np.append(t, 0.0))
    d = tc.det(probe.at(t))
    if np.any(d <= 0):
        raise IntervalError(f"det(F + t xi(x)eta) <= 0 at t = {t[np.argmax(d <= 0)]:.17g}")
    h = np.asarray(value_fn(E)(probe.at(t)), dtype=float)
    if not np.all(np.isfinite(h)):
        raise NumericalError("non-finite profile value")
    return LineProfile(probe, t, h, line_derivatives(E, probe))


class CriticalPointVerdict(NamedTuple):
    first: float
    second: float
    is_counterexample: bool
    tol_grad: float
    tol_curv: float
    second_err: float


def concave_critical_point(omega, probe: RankOneProbe, tol_grad=None, tol_curv=None) -> CriticalPointVerdict:
    d = line_derivatives(omega, probe)
    scale = probe.step_scale()
    if tol_grad is None:
        tol_grad = 1e-8 * (abs(d.h0) + 1.0) / scale
    if tol_curv is None:
        tol_curv = 1e-8 * (abs(d.h0) + 1.0)
    ok = abs(d.first) <= tol_grad and d.second < -tol_curv
    return CriticalPointVerdict(d.first, d.second, bool(ok), tol_grad, tol_curv, d.second_err)

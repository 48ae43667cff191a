"""Isotropic strain measures and invariant sets built on principal stretches."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import tensor_core as tc
from .errors import DistortionUndefinedError, InvalidInputError


@dataclass(frozen=True)
class StrainMeasure:
    """A scalar measure omega(F) with optional analytic derivatives.

    ``second(F, H)`` is the second directional derivative D^2 omega(F).(H, H).
    """

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    second: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    dims: tuple = (1, 2, 3)

    def __call__(self, F):
        return self.value(F)


def log_stretches(F) -> np.ndarray:
    """log of the principal stretches, descending."""
    sig, _ = tc.stretch_spectrum(F)
    return np.log(sig)


def omega_log(F):
    """||log U||^2."""
    ell = log_stretches(F)
    return np.sum(ell * ell, axis=-1)


def omega_log_gradient(F):
    F = tc.as_matrix(F, "F")
    return 2.0 * tc.log_stretch(F, "left") @ tc.inv_transpose(F)


def omega_devlog(F):
    """||dev_n log U||^2."""
    ell = log_stretches(F)
    ell = ell - ell.mean(axis=-1, keepdims=True)
    return np.sum(ell * ell, axis=-1)


def omega_devlog_pairwise(F):
    # (1/2n) sum over ordered pairs log^2(s_i/s_j); equals omega_devlog
    ell = log_stretches(F)
    n = ell.shape[-1]
    diff = ell[..., :, None] - ell[..., None, :]
    return np.sum(diff * diff, axis=(-2, -1)) / (2 * n)


def omega_devlog_gradient(F):
    F = tc.as_matrix(F, "F")
    return 2.0 * tc.deviatoric(tc.log_stretch(F, "left")) @ tc.inv_transpose(F)


def omega_svk(F):
    """||F^T F - Id||^2 (no orientation requirement)."""
    F = tc.as_matrix(F, "F")
    E = tc.transpose(F) @ F - np.eye(F.shape[-1])
    return np.sum(E * E, axis=(-2, -1))


def omega_svk_gradient(F):
    F = tc.as_matrix(F, "F")
    return 4.0 * (F @ tc.transpose(F) @ F - F)


def omega_svk_second(F, H):
    F = tc.as_matrix(F, "F")
    H = np.asarray(H, dtype=float)
    FtH = tc.transpose(F) @ H
    HFt = H @ tc.transpose(F)
    sq = lambda A: np.sum(A * A, axis=(-2, -1))
    return 4.0 * (sq(HFt) + sq(FtH) + tc.trace(FtH @ FtH) - sq(H))


def _seth_hill_fn(s, m):
    if m == 0:
        return np.log(s)
    # (s^{2m} - 1) / (2m), accurate for small m
    return np.expm1(2.0 * m * np.log(s)) / (2.0 * m)


def seth_hill_measure(F, m: float):
    """sum_i f_m(s_i)^2 with f_m(s) = (s^{2m}-1)/(2m) and f_0 = log."""
    sig, _ = tc.stretch_spectrum(F)
    f = _seth_hill_fn(sig, float(m))
    return np.sum(f * f, axis=-1)


def seth_hill(m: float) -> StrainMeasure:
    return StrainMeasure(f"seth-hill({m:g})", lambda F: seth_hill_measure(F, m))


class CriscioneInvariants:
    """(K1, K2, K3): amount of dilation, amount of distortion, mode of distortion."""

    __slots__ = ("k1", "k2", "_k3")

    def __init__(self, k1, k2, k3=None):
        self.k1, self.k2, self._k3 = k1, k2, k3

    @property
    def k3(self):
        if self._k3 is None:
            raise DistortionUndefinedError("K3 is undefined for a pure dilation (K2 = 0)")
        return self._k3

    def __iter__(self):
        return iter((self.k1, self.k2, self.k3))

    def __repr__(self):
        k3 = "undefined" if self._k3 is None else repr(self._k3)
        return f"CriscioneInvariants(k1={self.k1!r}, k2={self.k2!r}, k3={k3})"


def criscione_invariants(F) -> CriscioneInvariants:
    """Single deformation only; K3 raises when the distortion vanishes."""
    F = tc.as_matrix(F, "F")
    if F.shape[-1] != 3 or F.ndim != 2:
        raise InvalidInputError("criscione_invariants expects a single 3x3 matrix")
    ell = log_stretches(F)
    k1 = float(np.sum(ell))
    dev = ell - ell.mean()
    k2 = float(np.sqrt(np.sum(dev * dev)))
    if k2 <= 1e-12 * (1.0 + float(np.sqrt(np.sum(ell * ell)))):
        return CriscioneInvariants(k1, k2)
    k3 = 3.0 * np.sqrt(6.0) * float(np.prod(dev / k2))
    return CriscioneInvariants(k1, k2, float(np.clip(k3, -1.0, 1.0)))


class IhatInvariants(NamedTuple):
    i1: np.ndarray
    i2: np.ndarray
    i3: np.ndarray


def ihat_invariants(F) -> IhatInvariants:
    """I1 = l1^2/(l2 l3), I2 = l1 l2 / l3^2, I3 = det F with l1 >= l2 >= l3."""
    F = tc.as_matrix(F, "F")
    if F.shape[-1] != 3:
        raise InvalidInputError("ihat invariants are three-dimensional")
    sig, _ = tc.stretch_spectrum(F)
    l1, l2, l3 = sig[..., 0], sig[..., 1], sig[..., 2]
    return IhatInvariants(l1 * l1 / (l2 * l3), l1 * l2 / (l3 * l3), tc.det(F))


OMEGA_LOG = StrainMeasure("omega-log", omega_log, omega_log_gradient)
OMEGA_DEVLOG = StrainMeasure("omega-devlog", omega_devlog, omega_devlog_gradient)
OMEGA_SVK = StrainMeasure("omega-svk", omega_svk, omega_svk_gradient, omega_svk_second, dims=(2, 3))

MEASURES = {m.name: m for m in (OMEGA_LOG, OMEGA_DEVLOG, OMEGA_SVK)}

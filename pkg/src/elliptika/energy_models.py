"""Energy families W(F) built from strain measures and scalar profiles."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import strain_measures as sm
from . import tensor_core as tc
from .errors import DomainError, InvalidInputError, NotStressFreeError, OverflowGuardError

OVERFLOW_LIMIT = 1e300
_LOG_LIMIT = np.log(OVERFLOW_LIMIT)


@dataclass(frozen=True)
class ScalarProfile:
    """Psi with optional analytic derivatives; callables must accept arrays."""

    value: Callable
    d1: Optional[Callable] = None
    d2: Optional[Callable] = None
    domain: tuple = (-np.inf, np.inf)
    name: str = "profile"

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        lo, hi = self.domain
        if np.any(s < lo) or np.any(s > hi):
            raise DomainError(f"{self.name}: argument outside [{lo}, {hi}]")
        return self.value(s)

    def scaled(self, c: float) -> "ScalarProfile":
        d1 = None if self.d1 is None else (lambda s, f=self.d1: c * f(s))
        d2 = None if self.d2 is None else (lambda s, f=self.d2: c * f(s))
        return ScalarProfile(lambda s, f=self.value: c * f(s), d1, d2, self.domain, f"{c:g}*{self.name}")


def identity_profile() -> ScalarProfile:
    return ScalarProfile(lambda s: s * 1.0, lambda s: np.ones_like(s), lambda s: np.zeros_like(s), name="identity")


def constant_profile(c: float = 0.0) -> ScalarProfile:
    return ScalarProfile(lambda s: np.full_like(s, c, dtype=float), lambda s: np.zeros_like(s),
                         lambda s: np.zeros_like(s), name=f"constant({c:g})")


def quadratic_profile(a: float = 1.0) -> ScalarProfile:
    """a*s^2."""
    return ScalarProfile(lambda s: a * s * s, lambda s: 2 * a * s, lambda s: np.full_like(s, 2 * a, dtype=float),
                         name=f"quadratic({a:g})")


def linear_profile(c: float = 1.0) -> ScalarProfile:
    return ScalarProfile(lambda s: c * s, lambda s: np.full_like(s, c, dtype=float), lambda s: np.zeros_like(s),
                         name=f"linear({c:g})")


def exponential_profile(mu: float = 1.0, k: float = 1.0) -> ScalarProfile:
    """(mu/k) e^{k s}, guarded against overflow."""
    if k == 0:
        raise InvalidInputError("k must be nonzero")

    def _exp(s):
        s = np.asarray(s, dtype=float)
        if np.any(k * s > _LOG_LIMIT):
            raise OverflowGuardError("exponential profile would exceed 1e300")
        return np.exp(k * s)

    return ScalarProfile(lambda s: mu / k * _exp(s), lambda s: mu * _exp(s), lambda s: mu * k * _exp(s),
                         name=f"exp(mu={mu:g},k={k:g})")


def convexifier_1d() -> ScalarProfile:
    """e^{s/8}: makes t -> Psi(log^2 t) convex."""
    return exponential_profile(mu=1.0 / 8.0, k=1.0 / 8.0)


def sine_profile() -> ScalarProfile:
    return ScalarProfile(np.sin, np.cos, lambda s: -np.sin(s), name="sin")


PROFILES = {
    "identity": identity_profile,
    "constant": constant_profile,
    "quadratic": quadratic_profile,
    "linear": linear_profile,
    "exp": exponential_profile,
    "exp8": convexifier_1d,
    "sin": sine_profile,
}


@dataclass(frozen=True)
class EnergyDefinition:
    value: Callable
    gradient: Optional[Callable] = None
    dim: Optional[int] = None
    description: str = ""
    components: dict = field(default_factory=dict)

    def __call__(self, F):
        return self.value(F)

    def shifted(self, offset: float) -> "EnergyDefinition":
        """E - offset (gradient unchanged)."""
        return replace(self, value=lambda F, f=self.value: f(F) - offset,
                       description=f"{self.description} - {offset:g}")


def _check_dim(F, dim):
    F = tc.as_matrix(F, "F")
    if dim is not None and F.shape[-1] != dim:
        raise InvalidInputError(f"energy is {dim}-dimensional, got {F.shape[-1]}x{F.shape[-1]}")
    return F


def compose(psi: ScalarProfile, omega: sm.StrainMeasure, dim=None) -> EnergyDefinition:
    """W(F) = Psi(omega(F))."""

    def value(F):
        return psi(omega.value(_check_dim(F, dim)))

    grad = None
    if omega.gradient is not None and psi.d1 is not None:
        def grad(F):
            F = _check_dim(F, dim)
            return psi.d1(omega.value(F))[..., None, None] * omega.gradient(F)

    return EnergyDefinition(value, grad, dim, f"{psi.name} o {omega.name}", {"profile": psi, "measure": omega})


def _quadratic_form(F):
    return np.sum(F * F, axis=(-2, -1))


QUADRATIC_ENERGY = EnergyDefinition(_quadratic_form, lambda F: 2.0 * np.asarray(F, float), None, "||F||^2")


def hencky_energy(mu: float, kappa: float, dim: int = 3) -> EnergyDefinition:
    """mu ||dev log U||^2 + kappa/2 [tr log U]^2."""

    def value(F):
        ell = sm.log_stretches(_check_dim(F, dim))
        tr = ell.sum(axis=-1)
        dev = ell - tr[..., None] / ell.shape[-1]
        return mu * np.sum(dev * dev, axis=-1) + 0.5 * kappa * tr * tr

    def grad(F):
        F = _check_dim(F, dim)
        logv = tc.log_stretch(F, "left")
        return (2 * mu * tc.deviatoric(logv) + kappa * tc.trace(logv)[..., None, None] * np.eye(F.shape[-1])) \
            @ tc.inv_transpose(F)

    return EnergyDefinition(value, grad, dim, f"hencky(mu={mu:g},kappa={kappa:g})")


def hencky_energy_lame(mu: float, lam: float, dim: int = 3) -> EnergyDefinition:
    """mu ||log U||^2 + lam/2 [tr log U]^2 (lam = kappa - 2 mu / n)."""

    def value(F):
        ell = sm.log_stretches(_check_dim(F, dim))
        tr = ell.sum(axis=-1)
        return mu * np.sum(ell * ell, axis=-1) + 0.5 * lam * tr * tr

    return EnergyDefinition(value, None, dim, f"hencky-lame(mu={mu:g},lambda={lam:g})")


def exp_hencky_energy(mu: float, kappa: float, k: float, khat: float, dim: int = 3) -> EnergyDefinition:
    """mu/k e^{k ||dev log U||^2} + kappa/(2 khat) e^{khat (log det U)^2}."""
    iso = compose(exponential_profile(mu, k), sm.OMEGA_DEVLOG, dim)

    def vol_value(F):
        K1 = np.log(tc.check_orientation(_check_dim(F, dim)))
        if np.any(khat * K1 * K1 > _LOG_LIMIT):
            raise OverflowGuardError("volumetric exponential would exceed 1e300")
        return kappa / (2 * khat) * np.exp(khat * K1 * K1)

    def vol_grad(F):
        F = _check_dim(F, dim)
        K1 = np.log(tc.check_orientation(F))
        return (kappa * K1 * np.exp(khat * K1 * K1))[..., None, None] * tc.inv_transpose(F)

    vol = EnergyDefinition(vol_value, vol_grad, dim, "exp-hencky volumetric")

    def value(F):
        out = iso.value(F) + vol_value(F)
        if np.any(out > OVERFLOW_LIMIT):
            raise OverflowGuardError("energy exceeds 1e300")
        return out

    return EnergyDefinition(value, lambda F: iso.gradient(F) + vol_grad(F), dim,
                            f"exp-hencky(mu={mu:g},kappa={kappa:g},k={k:g},khat={khat:g})",
                            {"iso": iso, "vol": vol})


def vol_iso_energy(psi: ScalarProfile, wvol: ScalarProfile, dim: int = 3) -> EnergyDefinition:
    """Psi(||dev log V||^2) + Wvol(det F)."""
    iso = compose(psi, sm.OMEGA_DEVLOG, dim)

    def value(F):
        F = _check_dim(F, dim)
        return iso.value(F) + wvol(tc.check_orientation(F))

    grad = None
    if iso.gradient is not None and wvol.d1 is not None:
        def grad(F):
            F = _check_dim(F, dim)
            J = tc.check_orientation(F)
            # D(det F).H = det F tr(F^{-1} H)
            return iso.gradient(F) + (wvol.d1(J) * J)[..., None, None] * tc.inv_transpose(F)

    return EnergyDefinition(value, grad, dim, f"vol-iso({psi.name}, {wvol.name})", {"iso": iso, "vol": wvol})


def ihat_energy() -> EnergyDefinition:
    """I1hat + I2hat; polyconvex, isochoric and tension-compression symmetric."""

    def value(F):
        inv = sm.ihat_invariants(_check_dim(F, 3))
        return inv.i1 + inv.i2

    return EnergyDefinition(value, None, 3, "ihat")


def _second_along(E, F, H, h=1e-3):
    f = lambda t: float(E.value(F + t * H))
    d = lambda s: (f(s) - 2 * f(0.0) + f(-s)) / (s * s)
    return (4 * d(h / 2) - d(h)) / 3


def _first_along(E, F, H, h=1e-5):
    f = lambda t: float(E.value(F + t * H))
    return (f(h) - f(-h)) / (2 * h)


def linearization_moduli(E: EnergyDefinition, dim: int = 3, tol_value=1e-10, tol_stress=1e-6):
    """(mu, kappa) of the quadratic expansion mu ||dev sym H||^2 + kappa/2 (tr H)^2 at Id."""
    n = E.dim or dim
    I = np.eye(n)
    w0 = float(E.value(I))
    if abs(w0) > tol_value:
        raise NotStressFreeError(f"E(Id) = {w0:g} != 0")
    if E.gradient is not None:
        stress = float(np.max(np.abs(E.gradient(I))))
    else:
        stress = max(abs(_first_along(E, I, tc.outer(I[i], I[j]))) for i in range(n) for j in range(n))
    if stress > tol_stress:
        raise NotStressFreeError(f"stress at Id = {stress:g} != 0")
    if n == 1:
        return 0.0, _second_along(E, I, I)
    shear = np.zeros((n, n))
    shear[0, 0], shear[1, 1] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    mu = 0.5 * _second_along(E, I, shear)
    kappa = _second_along(E, I, I / np.sqrt(n)) / n
    return mu, kappa

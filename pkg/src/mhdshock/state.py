"""Polytropic gas with a field aligned to the velocity, h = kappa * rho * u.

Everything here is vectorised: the fields of a FlowState may be floats or
numpy arrays of a common shape.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CavitationError, DomainError


@dataclass(frozen=True)
class ThermoParams:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise DomainError(f"gamma must exceed 1, got {self.gamma}")


@dataclass(frozen=True)
class FlowState:
    """Velocity (radial, azimuthal, axial), pressure, entropy, kappa."""
    U1: object
    U2: object
    U3: object
    P: object
    S: object
    kappa: object = 0.0

    def speed2(self):
        return self.U1 * self.U1 + self.U2 * self.U2 + self.U3 * self.U3

    def rho(self, thermo):
        return density(self.P, self.S, thermo)

    def check(self):
        if np.any(np.asarray(self.P) <= 0) or np.any(np.asarray(self.S) <= 0):
            raise DomainError("pressure and entropy must be positive")
        return self


@dataclass(frozen=True)
class Derived:
    rho: object
    e: object
    c2: object
    mach2: object
    alfven2: object
    alfven_infinite: object
    bernoulli: object
    total_pressure: object
    h_vector: tuple


class Regime(str, Enum):
    PURELY_HYPERBOLIC = "purely_hyperbolic"
    MIXED = "elliptic_hyperbolic_mixed"
    DEGENERATE = "degenerate"


def density(P, S, thermo):
    return (P / S) ** (1.0 / thermo.gamma)


def pressure(rho, S, thermo):
    return S * rho ** thermo.gamma


def sound_speed2(rho, S, thermo):
    return thermo.gamma * S * rho ** (thermo.gamma - 1.0)


def derived_quantities(state, thermo):
    state.check()
    g = thermo.gamma
    rho = density(state.P, state.S, thermo)
    q2 = state.speed2()
    c2 = sound_speed2(rho, state.S, thermo)
    k = np.asarray(state.kappa, dtype=float)
    h = tuple(state.kappa * rho * u for u in (state.U1, state.U2, state.U3))
    infinite = (k == 0.0)
    with np.errstate(divide="ignore"):
        alf = np.where(infinite, np.inf, 1.0 / np.where(infinite, 1.0, k * k * rho))
    if np.ndim(alf) == 0:
        alf = float(alf)
        infinite = bool(infinite)
    return Derived(
        rho=rho,
        e=state.P / ((g - 1.0) * rho),
        c2=c2,
        mach2=q2 / c2,
        alfven2=alf,
        alfven_infinite=infinite,
        bernoulli=0.5 * q2 + g * state.P / ((g - 1.0) * rho),
        total_pressure=state.P + 0.5 * state.kappa ** 2 * rho ** 2 * q2,
        h_vector=h,
    )


def bernoulli(state, thermo):
    g = thermo.gamma
    rho = density(state.P, state.S, thermo)
    return 0.5 * state.speed2() + g * state.P / ((g - 1.0) * rho)


def density_from_bernoulli(B, S, speed2, thermo, check=True):
    """rho from (B, S, |u|^2); raises CavitationError when B <= |u|^2/2."""
    g = thermo.gamma
    w = B - 0.5 * speed2
    if check and np.any(np.asarray(w) <= 0):
        raise CavitationError("B - |u|^2/2 <= 0: state left the admissible region")
    return ((g - 1.0) / (g * S)) ** (1.0 / (g - 1.0)) * w ** (1.0 / (g - 1.0))


def regime_product(mach2, alfven2):
    return (alfven2 - 1.0) * (mach2 - 1.0) * (alfven2 + mach2 - 1.0)


def classify_regime(mach2, alfven2, tol=1e-12):
    if np.isinf(alfven2) or np.isinf(mach2):
        # the product's sign is that of the finite factor (M^2 - 1)
        other = mach2 if np.isinf(alfven2) else alfven2
        if np.isinf(other):
            return Regime.PURELY_HYPERBOLIC
        val = other - 1.0
    else:
        val = regime_product(mach2, alfven2)
    if abs(val) <= tol:
        return Regime.DEGENERATE
    return Regime.PURELY_HYPERBOLIC if val > 0 else Regime.MIXED

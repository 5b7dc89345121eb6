"""Rankine-Hugoniot relations across a front r = xi(theta, x3)."""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import NoAdmissibleShockError
from .state import FlowState, bernoulli, density


@dataclass(frozen=True)
class FrontGeometry:
    xi: object
    dtheta_xi: object = 0.0
    dx3_xi: object = 0.0


@dataclass(frozen=True)
class JumpResidual:
    mass: object
    momentum: tuple
    bernoulli: object
    kappa: object

    def as_array(self):
        return np.array([self.mass, *self.momentum, self.bernoulli, self.kappa], dtype=float)

    def max_abs(self):
        return max(float(np.max(np.abs(x))) for x in
                   (self.mass, *self.momentum, self.bernoulli, self.kappa))


class Discontinuity(str, Enum):
    CONTACT = "contact"
    TANGENTIAL = "tangential"
    ALFVEN = "alfven"
    SHOCK = "shock"
    NONE = "none"


def _fluxes(s, thermo):
    rho = density(s.P, s.S, thermo)
    k2r = s.kappa ** 2 * rho
    U = (s.U1, s.U2, s.U3)
    q2 = s.speed2()
    mass = tuple(rho * u for u in U)
    # T_ij = rho U_i U_j - h_i h_j + delta_ij (P + |h|^2 / 2), written as the printed rows
    T = {}
    for i in range(3):
        for j in range(i, 3):
            if i == j:
                others = q2 - 2.0 * U[i] * U[i]
                T[i, j] = rho * U[i] ** 2 + s.P + 0.5 * s.kappa ** 2 * rho ** 2 * others
            else:
                T[i, j] = (1.0 - k2r) * rho * U[i] * U[j]
            T[j, i] = T[i, j]
    return mass, T, bernoulli(s, thermo)


def rh_rows(up, down, s2, s3, thermo):
    """Six left-hand sides with slopes s2 = d_theta xi / xi and s3 = d_x3 xi.

    Brackets are downstream minus upstream.
    """
    mu, Tu, Bu = _fluxes(up, thermo)
    md, Td, Bd = _fluxes(down, thermo)
    jm = [md[i] - mu[i] for i in range(3)]
    mass = jm[0] - s2 * jm[1] - s3 * jm[2]
    mom = []
    for i in range(3):
        jT = [Td[i, j] - Tu[i, j] for j in range(3)]
        mom.append(jT[0] - s2 * jT[1] - s3 * jT[2])
    return JumpResidual(mass, tuple(mom), Bd - Bu, down.kappa - up.kappa)


def rh_residual(up, down, front, thermo):
    s2 = front.dtheta_xi / front.xi
    return rh_rows(up, down, s2, front.dx3_xi, thermo)


def stress_tensor(s, thermo):
    """rho u(x)u - h(x)h + (P + |h|^2/2) I, built directly from the vectors."""
    rho = density(s.P, s.S, thermo)
    u = np.array([s.U1, s.U2, s.U3], dtype=float)
    h = s.kappa * rho * u
    return rho * np.outer(u, u) - np.outer(h, h) + (s.P + 0.5 * h @ h) * np.eye(3)


def classify_discontinuity(up, down, i_n, h_n, thermo, rtol=1e-10):
    ru = density(up.P, up.S, thermo)
    rd = density(down.P, down.S, thermo)
    speed = np.sqrt(max(up.speed2(), down.speed2(), 1e-300))
    flux_scale = max(ru, rd) * speed
    field_scale = max(abs(up.kappa) * ru, abs(down.kappa) * rd, 1e-300) * speed
    field_scale = max(field_scale, abs(h_n), 1.0e-300)
    flux_zero = abs(i_n) <= rtol * max(flux_scale, abs(i_n))
    field_zero = abs(h_n) <= rtol * field_scale
    same = all(abs(a - b) <= rtol * max(abs(a), abs(b), 1.0) for a, b in
               ((up.U1, down.U1), (up.U2, down.U2), (up.U3, down.U3), (up.P, down.P),
                (up.S, down.S), (up.kappa, down.kappa)))
    if same:
        return Discontinuity.NONE
    if flux_zero:
        return Discontinuity.TANGENTIAL if field_zero else Discontinuity.CONTACT
    jump_v = 1.0 / rd - 1.0 / ru
    if abs(jump_v) <= rtol * max(1.0 / ru, 1.0 / rd):
        return Discontinuity.ALFVEN
    return Discontinuity.SHOCK


def shock_adiabat_residual(up, down, h_tau_up, h_tau_down, thermo):
    g = thermo.gamma
    r1 = density(up.P, up.S, thermo)
    r2 = density(down.P, down.S, thermo)
    e1 = up.P / ((g - 1.0) * r1)
    e2 = down.P / ((g - 1.0) * r2)
    V1, V2 = 1.0 / r1, 1.0 / r2
    return (e1 - e2 + 0.5 * (up.P + down.P) * (V1 - V2)
            + 0.25 * (V1 - V2) * (abs(h_tau_up) - abs(h_tau_down)) ** 2)


def solve_normal_shock(up, thermo, sonic_tol=1e-12):
    """Downstream state of a flat shock normal to the radial flow.

    Mass, momentum and Bernoulli are reduced to one equation in the
    downstream density, solved by bracketed root finding. The aligned
    radial field drops out, so kappa only rides along.
    """
    g = thermo.gamma
    rho1 = density(up.P, up.S, thermo)
    U1 = up.U1
    if abs(up.U2) > 0 or abs(up.U3) > 0:
        raise NoAdmissibleShockError("normal shock needs a purely radial upstream state")
    c2 = g * up.P / rho1
    if U1 <= 0 or U1 * U1 <= c2 * (1.0 + sonic_tol):
        raise NoAdmissibleShockError(f"upstream not supersonic (M^2={U1 * U1 / c2:.16g})")
    m = rho1 * U1
    mom = rho1 * U1 * U1 + up.P
    B = bernoulli(up, thermo)

    def resid(rho):
        u = m / rho
        return 0.5 * u * u + g * (mom - m * u) / ((g - 1.0) * rho) - B

    # upper end: strong-shock compression limit; lower end: the vertex of the
    # Bernoulli parabola in 1/rho, which sits strictly between the two roots
    v_vertex = g * mom / ((g + 1.0) * m * m)
    lo = 1.0 / v_vertex
    hi = rho1 * (g + 1.0) / (g - 1.0)
    if not (resid(lo) > 0.0 > resid(hi)):
        raise NoAdmissibleShockError("could not bracket the downstream density")
    rho2 = brentq(resid, lo, hi, xtol=1e-15 * rho1, rtol=4 * np.finfo(float).eps, maxiter=400)
    u2 = m / rho2
    P2 = mom - m * u2
    S2 = P2 / rho2 ** g
    if not S2 > up.S:
        raise NoAdmissibleShockError("entropy condition violated")
    return FlowState(u2, 0.0, 0.0, P2, S2, up.kappa)

"""Cylindrically symmetric transonic shock and its linearisation coefficients.

The radial branches are algebraic: r*rho*U = m, B and S constant, so each
query radius is one scalar root solve of the Bernoulli relation.
"""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import (ChokedFlowError, DomainError, InconsistencyError,
                     NoShockPositionError)
from .jump import FrontGeometry, rh_residual, solve_normal_shock
from .state import FlowState, ThermoParams, bernoulli, density


class Branch(str, Enum):
    SUPERSONIC = "supersonic"
    SUBSONIC = "subsonic"


def _sonic_speed(j, S, g):
    return (g * S * j ** (g - 1.0)) ** (1.0 / (g + 1.0))


def branch_speed(r, m, B, S, branch, thermo, choke_rtol=1e-12):
    """Radial speed on a branch, vectorised over r.

    Bisection in the bracket given by the sonic speed, then two Newton
    polish steps; the Bernoulli residual ends up at rounding level.
    """
    g = thermo.gamma
    r = np.asarray(r, dtype=float)
    j = m / r
    if np.any(j <= 0):
        raise DomainError("mass flux density must be positive")
    us = _sonic_speed(j, S, g)
    phi_s = us * us * (g + 1.0) / (2.0 * (g - 1.0))
    if np.any(phi_s > B * (1.0 + choke_rtol)):
        raise ChokedFlowError("flux density exceeds the sonic maximum for (B, S)")

    def phi(u):
        return 0.5 * u * u + g * S * (j / u) ** (g - 1.0) / (g - 1.0)

    def dphi(u):
        return u - g * S * j ** (g - 1.0) * u ** (-g)

    sonic = phi_s >= B * (1.0 - choke_rtol)
    if r.ndim == 0:
        if sonic:
            return float(us)
        if Branch(branch) is Branch.SUPERSONIC:
            a, b = float(us), float(np.sqrt(2.0 * B))
        else:
            a, b = float(j * (g * S / ((g - 1.0) * B)) ** (1.0 / (g - 1.0))), float(us)
        u = brentq(lambda x: float(phi(x)) - B, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                   maxiter=200)
        du = float(dphi(u))
        if abs(du) > 1e-8 * u:
            u = u - (float(phi(u)) - B) / du
        return float(u)
    if Branch(branch) is Branch.SUPERSONIC:
        lo, hi = us.copy(), np.full_like(us, np.sqrt(2.0 * B))
    else:
        lo = j * (g * S / ((g - 1.0) * B)) ** (1.0 / (g - 1.0))
        hi = us.copy()
    sgn = 1.0 if Branch(branch) is Branch.SUPERSONIC else -1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        above = sgn * (phi(mid) - B) > 0
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
        if np.all(hi - lo <= 1e-15 * hi):
            break
    u = 0.5 * (lo + hi)
    for _ in range(2):
        du = dphi(u)
        ok = (np.abs(du) > 1e-8 * u) & ~sonic
        u = np.where(ok, u - (phi(u) - B) / np.where(ok, du, 1.0), u)
    u = np.where(sonic, us, u)
    return u if u.ndim else float(u)


def branch_state(r, m, B, S, branch, thermo, kappa=0.0):
    u = branch_speed(r, m, B, S, branch, thermo)
    rho = m / (np.asarray(r, dtype=float) * u)
    P = S * rho ** thermo.gamma
    return FlowState(u, 0.0 * u, 0.0 * u, P, S + 0.0 * u, kappa + 0.0 * u)


@dataclass(frozen=True)
class BackgroundSolution:
    r1: float
    r2: float
    rs: float
    m: float
    Bbar: float
    S_minus: float
    S_plus: float
    kappa_bar: float
    thermo: ThermoParams = field(default_factory=ThermoParams)
    Pe: float = float("nan")

    def _S(self, side):
        return self.S_minus if side == "-" else self.S_plus

    def _branch(self, side):
        return Branch.SUPERSONIC if side == "-" else Branch.SUBSONIC

    def U(self, r, side="+"):
        return branch_speed(r, self.m, self.Bbar, self._S(side), self._branch(side), self.thermo)

    def state(self, r, side="+"):
        return branch_state(r, self.m, self.Bbar, self._S(side), self._branch(side),
                            self.thermo, self.kappa_bar)

    def profile(self, r, side="+"):
        """Dict of rho, U, P, c2, M2 and the analytic radial derivatives."""
        g = self.thermo.gamma
        r = np.asarray(r, dtype=float)
        U = self.U(r, side)
        rho = self.m / (r * U)
        S = self._S(side)
        P = S * rho ** g
        c2 = g * P / rho
        M2 = U * U / c2
        dU = -U / (r * (1.0 - M2))
        drho = -rho * (1.0 / r + dU / U)
        return dict(r=r, U=U, rho=rho, P=P, S=S + 0 * r, c2=c2, M2=M2, dU=dU, drho=drho,
                    dP=c2 * drho)

    def dU(self, r, side="+"):
        return self.profile(r, side)["dU"]

    def total_pressure(self, r, side="+"):
        p = self.profile(r, side)
        return p["P"] + 0.5 * self.kappa_bar ** 2 * (p["rho"] * p["U"]) ** 2

    def mass_flux_defect(self, n=201):
        worst = 0.0
        for side, a, b in (("-", self.r1, self.rs), ("+", self.rs, self.r2)):
            r = np.linspace(a, b, n)
            p = self.profile(r, side)
            worst = max(worst, float(np.max(np.abs(r * p["rho"] * p["U"] / self.m - 1.0))))
        return worst

    def shock_states(self):
        return self.state(self.rs, "-"), self.state(self.rs, "+")

    def rh_defect(self):
        up, dn = self.shock_states()
        res = rh_residual(up, dn, FrontGeometry(self.rs), self.thermo)
        scale = max(self.m / self.rs, float(up.P))
        return res.max_abs() / scale


def _inflow_constants(inflow, r1, thermo):
    inflow.check()
    g = thermo.gamma
    rho = density(inflow.P, inflow.S, thermo)
    if abs(inflow.U2) > 0 or abs(inflow.U3) > 0:
        raise DomainError("background inflow must be purely radial")
    if inflow.U1 ** 2 <= g * inflow.P / rho:
        raise DomainError("inflow must be supersonic")
    return r1 * rho * inflow.U1, bernoulli(inflow, thermo), inflow.S


def exit_pressure_for_shock(inflow, rs, r1, r2, thermo, kappa_bar=0.0, total=False):
    m, B, Sm = _inflow_constants(inflow, r1, thermo)
    up = branch_state(rs, m, B, Sm, Branch.SUPERSONIC, thermo, kappa_bar)
    up = FlowState(float(up.U1), 0.0, 0.0, float(up.P), Sm, kappa_bar)
    dn = solve_normal_shock(up, thermo)
    ex = branch_state(r2, m, B, dn.S, Branch.SUBSONIC, thermo, kappa_bar)
    P = float(ex.P)
    if total:
        rho = m / (r2 * float(ex.U1))
        P += 0.5 * kappa_bar ** 2 * (rho * float(ex.U1)) ** 2
    return P


def admissible_exit_range(inflow, r1, r2, thermo, kappa_bar=0.0, total=False, details=False,
                          n_check=48):
    """Exit pressures with the shock at the two ends of [r1, r2], sorted.

    Monotonicity of rs -> exit pressure is checked on a dense sample and the
    direction found is returned when details=True.
    """
    rr = np.linspace(r1, r2, n_check)
    pe = np.array([exit_pressure_for_shock(inflow, r, r1, r2, thermo, kappa_bar, total) for r in rr])
    dif = np.diff(pe)
    if not (np.all(dif > 0) or np.all(dif < 0)):
        raise InconsistencyError("exit pressure is not monotone in the shock position")
    P1, P2 = sorted((pe[0], pe[-1]))
    if details:
        return P1, P2, dict(p_at_r1=pe[0], p_at_r2=pe[-1],
                            orientation="decreasing" if dif[0] < 0 else "increasing")
    return P1, P2


def solve_background(inflow, Pe, r1, r2, kappa_bar=0.0, thermo=None, total=False, rtol=1e-8):
    """Place the shock so that the subsonic exit pressure equals Pe.

    With total=True, Pe is read as the exit total pressure P + |h|^2/2.
    """
    thermo = thermo or ThermoParams()
    m, B, Sm = _inflow_constants(inflow, r1, thermo)
    pa = exit_pressure_for_shock(inflow, r1, r1, r2, thermo, kappa_bar, total)
    pb = exit_pressure_for_shock(inflow, r2, r1, r2, thermo, kappa_bar, total)
    lo, hi = min(pa, pb), max(pa, pb)
    if not (lo * (1 + 1e-12) < Pe < hi * (1 - 1e-12)):
        raise NoShockPositionError(f"Pe={Pe!r} outside the admissible range ({lo!r}, {hi!r})")

    def f(rs):
        return exit_pressure_for_shock(inflow, rs, r1, r2, thermo, kappa_bar, total) - Pe

    rs = brentq(f, r1, r2, xtol=1e-15 * r2, rtol=4 * np.finfo(float).eps, maxiter=300)
    if abs(f(rs)) > rtol * abs(Pe):
        raise InconsistencyError("exit pressure not matched")
    up = branch_state(rs, m, B, Sm, Branch.SUPERSONIC, thermo, kappa_bar)
    dn = solve_normal_shock(FlowState(float(up.U1), 0.0, 0.0, float(up.P), Sm, kappa_bar), thermo)
    return BackgroundSolution(r1=r1, r2=r2, rs=rs, m=m, Bbar=B, S_minus=Sm, S_plus=dn.S,
                              kappa_bar=kappa_bar, thermo=thermo, Pe=Pe)


def background_with_shock_at(inflow, rs, r1, r2, kappa_bar=0.0, thermo=None):
    """Background with a prescribed shock radius (exit pressure follows)."""
    thermo = thermo or ThermoParams()
    m, B, Sm = _inflow_constants(inflow, r1, thermo)
    up = branch_state(rs, m, B, Sm, Branch.SUPERSONIC, thermo, kappa_bar)
    dn = solve_normal_shock(FlowState(float(up.U1), 0.0, 0.0, float(up.P), Sm, kappa_bar), thermo)
    bg = BackgroundSolution(r1=r1, r2=r2, rs=rs, m=m, Bbar=B, S_minus=Sm, S_plus=dn.S,
                            kappa_bar=kappa_bar, thermo=thermo)
    return bg


def verify_super_alfvenic(bg, kappa_bar=None, n=401):
    """(ok, margin) with margin = min over both branches of 1/(kappa^2 rho) - 1."""
    k = bg.kappa_bar if kappa_bar is None else kappa_bar
    if k == 0.0:
        return True, float("inf")
    rho_max = 0.0
    for side, a, b in (("-", bg.r1, bg.rs), ("+", bg.rs, bg.r2)):
        r = np.linspace(a, b, n)
        rho_max = max(rho_max, float(np.max(bg.profile(r, side)["rho"])))
    margin = 1.0 / (k * k * rho_max) - 1.0
    return margin > 0.0, margin


class Coefficients:
    """d-coefficients as functions of the radius on [rs, r2] and the shock constants."""

    def __init__(self, bg):
        self.bg = bg
        g = bg.thermo.gamma
        k2 = bg.kappa_bar ** 2
        rs = bg.rs
        up, dn = bg.shock_states()
        self.P_jump = float(dn.P) - float(up.P)
        p = bg.profile(rs, "+")
        rho, U, M2, S = float(p["rho"]), float(p["U"]), float(p["M2"]), bg.S_plus
        self.rho_s, self.U_s, self.M2_s = rho, U, M2
        self.a11 = rho * (1.0 - M2)
        self.a12 = -rho * U / ((g - 1.0) * S)
        self.a21 = rho * U * (1.0 - M2)
        self.a22 = -(rho * U * U / ((g - 1.0) * S) + rho ** g / (g - 1.0))
        det = self.a11 * self.a22 - self.a12 * self.a21
        self.det = det
        self.b11, self.b12 = self.a22 / det, -self.a12 / det
        self.b21, self.b22 = -self.a21 / det, self.a11 / det
        # rows: a11 W1 + a12 W4 = R01, a21 W1 + a22 W4 = -[P] W7 / rs + R02
        self.a1 = -self.b12 * self.P_jump / rs
        self.a2 = -self.b22 * self.P_jump / rs
        self.d0_s = float(self.d0(rs))
        self.a0 = self.d0_s * rho * U / self.P_jump
        self.a3 = float(self.d(rs)) + self.a2 / self.a1 * float(self.d3(rs))
        self.a4 = self.a0 * self.a1 * self.a3 / self.d0_s
        self.k2 = k2

    # printed closed forms, kept as oracles
    def a1_closed(self):
        bg, g = self.bg, self.bg.thermo.gamma
        c2 = g * bg.S_plus * self.rho_s ** (g - 1.0)
        return g * self.U_s * self.P_jump / (bg.rs * self.rho_s * (c2 - self.U_s ** 2))

    def a2_closed(self):
        g = self.bg.thermo.gamma
        return (g - 1.0) * self.P_jump / (self.bg.rs * self.rho_s ** g)

    def a3_closed(self):
        g, M2 = self.bg.thermo.gamma, self.M2_s
        return ((g - 1.0) * M2 + 1.0) / (g * M2)

    def _p(self, r):
        return self.bg.profile(r, "+")

    def d0(self, r):
        return 1.0 - self.bg.kappa_bar ** 2 * self._p(r)["rho"]

    def d1(self, r):
        return 1.0 - self._p(r)["M2"]

    def d2(self, r):
        p = self._p(r)
        g, M2 = self.bg.thermo.gamma, p["M2"]
        return M2 * (2.0 + (g - 1.0) * M2) / (p["r"] * (1.0 - M2))

    def d3(self, r):
        p = self._p(r)
        bg, g = self.bg, self.bg.thermo.gamma
        S = bg.S_plus
        return ((bg.Bbar - 0.5 * p["U"] ** 2) / (g * S * p["U"])
                + bg.kappa_bar ** 2 * p["rho"] * p["U"] / ((g - 1.0) * S))

    def d5(self, r):
        p = self._p(r)
        g = self.bg.thermo.gamma
        return -(g - 1.0) * (p["dU"] + p["U"] / p["r"]) / p["c2"]

    def d(self, r):
        p = self._p(r)
        k2 = self.bg.kappa_bar ** 2
        return 1.0 - k2 * p["rho"] + k2 * p["rho"] * p["M2"]

    def dprime(self, r):
        p = self._p(r)
        g, k2 = self.bg.thermo.gamma, self.bg.kappa_bar ** 2
        dM2 = p["dU"] / p["U"] * p["M2"] * (2.0 + (g - 1.0) * p["M2"])
        return -k2 * (p["drho"] * (1.0 - p["M2"]) - p["rho"] * dM2)

    def d3prime(self, r):
        p = self._p(r)
        bg, g = self.bg, self.bg.thermo.gamma
        S, U, dU = bg.S_plus, p["U"], p["dU"]
        return (-dU / (g * S) - (bg.Bbar - 0.5 * U * U) * dU / (g * S * U * U)
                - bg.kappa_bar ** 2 * p["rho"] * U / (p["r"] * (g - 1.0) * S))

    def d4(self, r):
        d, d3 = self.d(r), self.d3(r)
        q = self.d3prime(r) / d - d3 * self.dprime(r) / d ** 2
        return self.d1(r) * q + (1.0 / np.asarray(r, dtype=float) + self.d2(r)) * d3 / d

    def table(self, r):
        return {name: getattr(self, name)(r) for name in
                ("d0", "d1", "d2", "d3", "d5", "d", "d4", "dprime", "d3prime")}

    def scalars(self):
        return {k: getattr(self, k) for k in
                ("a0", "a1", "a2", "a3", "a4", "a11", "a12", "a21", "a22",
                 "b11", "b12", "b21", "b22", "P_jump")}

    def positivity(self, n=100):
        r = np.linspace(self.bg.rs, self.bg.r2, n)
        t = self.table(r)
        rep = {k: float(np.min(t[k])) for k in ("d0", "d1", "d", "d4")}
        rep.update({k: getattr(self, k) for k in ("a0", "a1", "a2", "a3", "a4")})
        return rep


def coefficients_at(bg, thermo=None, check=True):
    ok, margin = verify_super_alfvenic(bg)
    if check and not ok:
        raise InconsistencyError(f"background is not super-Alfvenic (margin {margin:.3g})")
    co = Coefficients(bg)
    if check:
        bad = {k: v for k, v in co.positivity().items() if not v > 0}
        if bad:
            raise InconsistencyError(f"positivity violated: {bad}")
    return co

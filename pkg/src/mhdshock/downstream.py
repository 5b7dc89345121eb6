"""Downstream flow on the fixed box D = [rs, r2] x E.

A front displacement V7 defines the map y -> (r, theta, x3) with
r = D0 = y1 + (r2 - y1) V7 / (r2 - rs). The physical derivatives become

    D1 = s d1,   D2 = (d2 + t2 d1) / D0,   D3 = d3 + t3 d1,

with s = L / (L - V7), t_j = (y1 - r2) d_j V7 / (L - V7) and L = r2 - rs.
Here everything is written as full nonlinear expressions of the deviations
V1..V6 from the subsonic background. Background parts are differentiated
analytically; only deviations go through the discrete operators, so the
background is reproduced to rounding.
"""
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from .errors import CavitationError, GeometryError, StagnationError
from .spectral import ModalField

V_PARITY = ("cc", "sc", "cs", "cc", "cc", "cc")


class Frame:
    """Coordinate operators for a given front displacement V7 (values on E)."""

    def __init__(self, grid, bg, V7=None):
        self.grid, self.bg = grid, bg
        L = grid.r2 - grid.rs
        v7 = np.zeros(grid.eshape) if V7 is None else np.asarray(
            V7.values if isinstance(V7, ModalField) else V7, dtype=float)
        den = L - v7
        if np.any(den <= 0.05 * L):
            raise GeometryError("front displacement reaches the exit", step="frame")
        y = grid.r_col()
        self.y = y
        self.V7 = ModalField(grid, "cc", v7)
        self.D0 = ModalField(grid, "cc", y + (grid.r2 - y) / L * v7)
        self.s = L / den
        d2v, _ = grid.d2(v7, "cc")
        d3v, _ = grid.d3(v7, "cc")
        self.t2 = ModalField(grid, "sc", (y - grid.r2) * d2v / den)
        self.t3 = ModalField(grid, "cs", (y - grid.r2) * d3v / den)
        p = bg.profile(self.D0.values, "+")
        self.Ubar = ModalField(grid, "cc", p["U"])
        self.dUbar = ModalField(grid, "cc", p["dU"])
        self.c2bar_y = bg.profile(grid.y1, "+")["c2"][:, None, None]

    def D1(self, f):
        return f.d1() * self.s

    def D2(self, f):
        return (f.d2() + self.t2 * f.d1()) / self.D0

    def D3(self, f):
        return f.d3() + self.t3 * f.d1()

    def grad(self, f):
        d1 = f.d1()
        return (d1 * self.s, (f.d2() + self.t2 * d1) / self.D0, f.d3() + self.t3 * d1)


def as_fields(grid, V):
    """Coerce six arrays or ModalFields to ModalFields with the V parities."""
    out = []
    for v, p in zip(V, V_PARITY):
        if isinstance(v, ModalField):
            if v.parity != p:
                raise ValueError(f"field parity {v.parity} where {p} expected")
            out.append(v)
        else:
            out.append(ModalField(grid, p, np.asarray(v, dtype=float)))
    return out


class DownState:
    """Physical quantities of U1 = Ubar(D0) + V1, U2, U3, S, B, kappa."""

    def __init__(self, frame, V, thermo=None):
        bg = frame.bg
        g = (thermo or bg.thermo).gamma
        self.frame, self.g = frame, g
        self.V = as_fields(frame.grid, V)
        V1, V2, V3, V4, V5, V6 = self.V
        self.U1 = frame.Ubar + V1
        self.U2, self.U3 = V2, V3
        self.S = bg.S_plus + V4
        self.B = bg.Bbar + V5
        self.kappa = bg.kappa_bar + V6
        self.q = self.U1 * self.U1 + V2 * V2 + V3 * V3
        self.h = self.B - 0.5 * self.q
        if np.any(self.h.values <= 0):
            raise CavitationError("B - |U|^2/2 <= 0 downstream", step="state")
        e = 1.0 / (g - 1.0)
        self.rho = ((g - 1.0) / g / self.S).apply(lambda x: x ** e) * self.h.apply(lambda x: x ** e)
        self.c2 = (g - 1.0) * self.h
        self.P = self.rho * self.c2 / g
        self.w = 1.0 - self.kappa * self.kappa * self.rho

    def check_stagnation(self, frac=0.5):
        umin = float(np.min(self.frame.Ubar.values))
        if np.any(np.abs(self.U1.values) < frac * umin):
            raise StagnationError("radial velocity too small", step="state")


def background_state(frame):
    g = frame.grid
    return DownState(frame, [np.zeros(g.shape)] * 6)


def den_row(st, bar=None):
    """Continuity in the form with c^2 = (gamma-1)(B - |U|^2/2) (unnormalised).

    The background row (cbar^2 - Ubar^2) Ubar' + cbar^2 Ubar / D0 vanishes
    identically, so it is subtracted analytically and only deviation terms
    are summed; this keeps the rounding relative to the deviation size.
    """
    fr = st.frame
    bar = bar or background_state(fr)
    V1, V2, V3 = st.V[:3]
    U1, U2, U3, c2 = st.U1, st.U2, st.U3, st.c2
    Ub, c2b = bar.U1, bar.c2
    a1, a2, a3 = fr.grad(V1)
    b1, b2, b3 = fr.grad(V2)
    e1, e2, e3 = fr.grad(V3)
    dq = 2.0 * Ub * V1 + V1 * V1 + V2 * V2 + V3 * V3
    dc2 = (st.g - 1.0) * (st.V[4] - 0.5 * dq)
    dU1sq = 2.0 * Ub * V1 + V1 * V1
    return ((c2 - U1 * U1) * a1 + (dc2 - dU1sq) * fr.dUbar
            + (c2 - U2 * U2) * b2 + (c2 - U3 * U3) * e3
            + (dc2 * U1 + c2b * V1) / fr.D0
            - U1 * (U2 * b1 + U3 * e1)
            - U2 * (U1 * a2 + U3 * e2)
            - U3 * (U1 * a3 + U2 * b3))


def curl_lhs(st, bar=None):
    """Components of curl((1 - kappa^2 rho) u) (the modified vorticity)."""
    fr = st.frame
    bar = bar or background_state(fr)
    wU1 = w_deviation(st, bar) * st.U1 + bar.w * st.V[0]
    wU2 = st.w * st.U2
    wU3 = st.w * st.U3
    C1 = fr.D2(wU3) - fr.D3(wU2)
    C2 = fr.D3(wU1) - fr.D1(wU3)
    C3 = fr.D1(wU2) + wU2 / fr.D0 - fr.D2(wU1)
    return C1, C2, C3


def _XY(st):
    X = st.h / (st.g * st.S)
    Y = st.kappa * st.rho * st.q
    return X, Y


def j23(st, J1):
    """J2, J3 from J1 and the gradients of B, S, kappa (momentum relations)."""
    fr = st.frame
    V4, V5, V6 = st.V[3:]
    X, Y = _XY(st)
    _, S2, S3 = fr.grad(V4)
    _, B2, B3 = fr.grad(V5)
    _, K2, K3 = fr.grad(V6)
    J2 = (st.U2 * J1 + B3 - X * S3 - Y * K3) / st.U1
    J3 = (st.U3 * J1 - B2 + X * S2 + Y * K2) / st.U1
    return J2, J3


def mu_H0(st):
    """Damping and source of the J1 transport."""
    fr = st.frame
    V4, V5, V6 = st.V[3:]
    X, Y = _XY(st)
    inv = 1.0 / st.U1
    mu = fr.D2(st.U2 * inv) + fr.D3(st.U3 * inv) + 1.0 / fr.D0
    _, i2, i3 = fr.grad(inv)
    _, x2, x3 = fr.grad(X * inv)
    _, y2, y3 = fr.grad(Y * inv)
    _, S2, S3 = fr.grad(V4)
    _, B2, B3 = fr.grad(V5)
    _, K2, K3 = fr.grad(V6)
    H0 = (i3 * B2 - i2 * B3 + x2 * S3 - x3 * S2 + y2 * K3 - y3 * K2)
    return mu, H0


def transport_coefficients(st):
    """(c1, c2, c3): the streamline operator is c1 d1 + c2 d2 + c3 d3."""
    fr = st.frame
    a = st.U2 / (st.U1 * fr.D0)
    b = st.U3 / st.U1
    c1 = fr.s + a * fr.t2 + b * fr.t3
    if np.any(c1.values <= 0):
        raise StagnationError("streamline operator lost its radial component", step="transport")
    return c1, a, b


def advect(st, f):
    """D1 f + (U2/U1) D2 f + (U3/U1) D3 f."""
    fr = st.frame
    g1, g2, g3 = fr.grad(f)
    return g1 + (st.U2 / st.U1) * g2 + (st.U3 / st.U1) * g3


def total_pressure(st):
    return st.P + 0.5 * st.kappa * st.kappa * st.rho * st.rho * st.q


def _log_ratios(st, bar):
    """log(h / hbar), log(S / Sbar) and q - qbar from the deviations."""
    V1, V2, V3, V4, V5, _ = (v.values for v in st.V)
    dq = 2.0 * bar.U1.values * V1 + V1 * V1 + V2 * V2 + V3 * V3
    lh = np.log1p((V5 - 0.5 * dq) / bar.h.values)
    ls = np.log1p(V4 / bar.S.values)
    return lh, ls, dq


def rho_deviation(st, bar):
    n = 1.0 / (st.g - 1.0)
    lh, ls, _ = _log_ratios(st, bar)
    return ModalField(st.frame.grid, "cc", bar.rho.values * np.expm1(n * (lh - ls)))


def w_deviation(st, bar):
    """w - wbar with w = 1 - kappa^2 rho."""
    kb, V6 = bar.kappa.values, st.V[5].values
    dk2 = V6 * (2.0 * kb + V6)
    drho = rho_deviation(st, bar).values
    return ModalField(st.frame.grid, "cc", -(kb * kb * drho + dk2 * st.rho.values))


def total_pressure_deviation(st, bar):
    """total_pressure(st) - total_pressure(bar), formed from the deviations.

    Both states share a frame. Ratios go through log1p/expm1 so the result
    carries rounding relative to the deviation, not to the O(1) totals.
    """
    n = 1.0 / (st.g - 1.0)
    V6 = st.V[5].values
    rb, Pb, qb = bar.rho.values, bar.P.values, bar.q.values
    lh, ls, dq = _log_ratios(st, bar)
    dP = Pb * np.expm1((n + 1.0) * lh - n * ls)
    lrho = n * (lh - ls)
    kb = bar.kappa.values
    Mb = 0.5 * kb * kb * rb * rb * qb
    if np.any(kb == 0.0):
        # no background field: the magnetic part is itself a deviation
        k = kb + V6
        dM = 0.5 * k * k * st.rho.values ** 2 * st.q.values - Mb
    else:
        dM = Mb * np.expm1(2.0 * np.log1p(V6 / kb) + 2.0 * lrho + np.log1p(dq / qb))
    return ModalField(st.frame.grid, "cc", dP + dM)


@dataclass
class RadialCoefs:
    grid: object
    co: object

    def __post_init__(self):
        y = self.grid.y1
        t = self.co.table(y)
        for k, v in t.items():
            setattr(self, k, v)
        self.y = y
        self.c2bar = self.co.bg.profile(y, "+")["c2"]

    def col(self, name):
        return getattr(self, name)[:, None, None]


class LinearRows:
    """Principal parts of the four velocity rows on the fixed box."""

    def __init__(self, grid, co):
        self.grid, self.co = grid, co
        self.rc = RadialCoefs(grid, co)
        self.k = co.a2 / co.a1

    def L0(self, V1, V2, V3):
        c, y = self.rc.col, self.grid.r_col()
        return c("d1") * V1.d1() + V2.d2() / y + V3.d3() + V1 / y + c("d2") * V1

    def w1(self, V1):
        c = self.rc.col
        return c("d") * V1 + self.k * c("d3") * V1.values[0][None]

    def L1(self, V2, V3):
        c, y = self.rc.col, self.grid.r_col()
        return (c("d0") * V3).d2() / y - (c("d0") * V2).d3()

    def L2(self, V1, V3):
        c = self.rc.col
        return self.w1(V1).d3() - (c("d0") * V3).d1()

    def L3(self, V1, V2):
        c, y = self.rc.col, self.grid.r_col()
        B = c("d0") * V2
        return B.d1() + B / y - self.w1(V1).d2() / y


def namespace(**kw):
    return SimpleNamespace(**kw)

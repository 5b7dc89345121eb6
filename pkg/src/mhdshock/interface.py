"""Shock-front algebra on the fixed front set E.

The front state is built from the iterate at y1 = rs and the upstream flow
sampled at xi = rs + V7. Bernoulli and kappa are copied from upstream, so
[B] = [kappa] = 0 hold exactly. Every remainder is exact: the full
nonlinear expression minus its declared linear part.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import FrontDegeneracyError
from .jump import _fluxes
from .state import FlowState, bernoulli, density_from_bernoulli
from .upstream import sample_upstream

F_MIN = 1e-3      # |f| must stay above this fraction of its background value


@dataclass
class FrontTraces:
    up: FlowState
    down: FlowState
    V7: np.ndarray
    W1: np.ndarray
    W4: np.ndarray


@dataclass
class InterfaceTerms:
    f: np.ndarray = None
    f2: np.ndarray = None
    f3: np.ndarray = None
    g2: np.ndarray = None
    g3: np.ndarray = None
    g4: np.ndarray = None
    R01: np.ndarray = None
    R02: np.ndarray = None
    R1: np.ndarray = None
    R2: np.ndarray = None
    R3: np.ndarray = None
    R4: np.ndarray = None
    R6: np.ndarray = None
    q1: np.ndarray = None
    q2p: np.ndarray = None
    q2m: np.ndarray = None
    q3p: np.ndarray = None
    q3m: np.ndarray = None
    q4: np.ndarray = None
    q5: np.ndarray = None
    m2: np.ndarray = None
    E_exit: np.ndarray = None
    extra: dict = field(default_factory=dict)


def front_traces(V, V7, upstream, bg, grid, thermo=None):
    """Upstream and downstream states on the front for the iterate V, V7.

    V holds V1..V4 (3D arrays or ModalFields); only station 0 is used.
    """
    thermo = thermo or bg.thermo
    val = lambda a: np.asarray(getattr(a, "values", a), dtype=float)
    v7 = val(V7)
    v1, v2, v3, v4 = (val(x)[0] for x in V[:4])
    xi = bg.rs + v7
    Y2, Y3 = np.meshgrid(grid.y2, grid.y3, indexing="ij")
    up = sample_upstream(upstream, xi, Y2, Y3, derivative=False)
    B = bernoulli(up, thermo)
    U1 = bg.U(xi, "+") + v1
    S = bg.S_plus + v4
    q = U1 * U1 + v2 * v2 + v3 * v3
    rho = density_from_bernoulli(B, S, q, thermo)
    down = FlowState(U1, v2, v3, S * rho ** thermo.gamma, S, up.kappa)
    return FrontTraces(up, down, v7, v1, v4)


def _brackets(up, down, thermo):
    mu, Tu, _ = _fluxes(up, thermo)
    md, Td, _ = _fluxes(down, thermo)
    A = {k: Td[k] - Tu[k] for k in Td}
    jm = [md[i] - mu[i] for i in range(3)]
    return A, jm, (mu, md)


def _f_background(bg, thermo):
    p = bg.profile(bg.rs, "+")
    pm = bg.profile(bg.rs, "-")
    k2 = bg.kappa_bar ** 2
    t = lambda q: q["P"] + 0.5 * k2 * q["rho"] ** 2 * q["U"] ** 2
    return float((t(p) - t(pm)) ** 2)


def eval_front_functions(up, down, V7, bg, thermo=None, co=None, grid=None, C1_front=None):
    """Front determinant f, slope numerators f2, f3 and remainders g2, g3, g4.

    The front slopes solve the two tangential momentum rows, giving
    d_theta xi / xi = f2 / f and d_x3 xi = f3 / f. g4 needs the first
    modified-vorticity component at the front (C1_front) and the grid.
    """
    from .background import Coefficients
    thermo = thermo or bg.thermo
    co = co or Coefficients(bg)
    A, _, _ = _brackets(up, down, thermo)
    A22, A33, A23, A12, A13 = A[1, 1], A[2, 2], A[1, 2], A[0, 1], A[0, 2]
    f = A22 * A33 - A23 * A23
    f2 = A33 * A12 - A13 * A23
    f3 = A22 * A13 - A12 * A23
    fb = _f_background(bg, thermo)
    if np.any(np.abs(f) < F_MIN * fb):
        raise FrontDegeneracyError(f"front determinant {np.min(np.abs(f)):.3g} too small",
                                   step="front")
    xi = bg.rs + np.asarray(V7, dtype=float)
    g2 = xi * f2 / (f * bg.rs) - co.a0 * down.U2
    g3 = f3 / f - co.a0 * down.U3
    g4 = None
    if C1_front is not None:
        d0 = co.d0(bg.rs)
        d2U3, _ = grid.d2(down.U3, "cs")
        d3U2, _ = grid.d3(down.U2, "sc")
        g4 = np.asarray(C1_front) - d0 * (d2U3 / bg.rs - d3U2)
    return f, f2, f3, g2, g3, g4


def eval_R_terms(up, down, V7, bg, thermo=None, co=None, fronts=None):
    """Remainders of the mass and normal-momentum jump rows.

    Returns (R01, R02, R1, R2, R3) where R3 = R2 - (a2/a1) R1 is the data
    transported by the entropy deviation.
    """
    from .background import Coefficients
    thermo = thermo or bg.thermo
    co = co or Coefficients(bg)
    f, f2, f3 = (fronts or eval_front_functions(up, down, V7, bg, thermo, co))[:3]
    A, jm, (mu, md) = _brackets(up, down, thermo)
    s = (None, f2 / f, f3 / f)
    Q1 = jm[0] - s[1] * jm[1] - s[2] * jm[2]
    k2 = down.kappa ** 2
    rho_d, rho_u = md[0] / down.U1, mu[0] / up.U1
    tang = lambda st, rho: st.kappa ** 2 * rho ** 2 * (st.U2 ** 2 + st.U3 ** 2)
    Q2 = ((md[0] * down.U1 + down.P) - (mu[0] * up.U1 + up.P)
          - sum(s[i] * (A[0, i] + 0.5 * k2 * (md[0] + mu[0]) * jm[i]) for i in (1, 2))
          + 0.5 * (tang(down, rho_d) - tang(up, rho_u)))
    V7 = np.asarray(V7, dtype=float)
    xi = bg.rs + V7
    W1 = down.U1 - bg.U(xi, "+")
    W4 = down.S - bg.S_plus
    R01 = co.a11 * W1 + co.a12 * W4 - Q1
    R02 = co.a21 * W1 + co.a22 * W4 + co.P_jump * V7 / bg.rs - Q2
    R1 = co.b11 * R01 + co.b12 * R02
    R2 = co.b21 * R01 + co.b22 * R02
    R3 = R2 - co.a2 / co.a1 * R1
    return R01, R02, R1, R2, R3


def eval_R6(g2, g3, g4, grid, co):
    """Front value of the first modified-vorticity component."""
    d3g2, _ = grid.d3(g2, "sc")
    d2g3, _ = grid.d2(g3, "cs")
    return co.d0(grid.rs) / co.a0 * (d3g2 - d2g3 / grid.rs) + g4


def exit_remainder(st, bar):
    """E = Ptot(state) - Ptot(background) - (linear part), at y1 = r2.

    st and bar are DownState objects (iterate and background on the same
    frame); returns (E, linear part) as 2D arrays.
    """
    from .downstream import total_pressure_deviation
    co = _exit_coefs(bar)
    V1, _, _, V4, V5, V6 = (v.values[-1] for v in st.V)
    lin = (-co["rhoU"] * (co["d"] * V1 + co["d3"] * V4)
           + co["c5"] * V5 + co["c6"] * V6)
    full = total_pressure_deviation(st, bar).values[-1]
    return full - lin, lin


def _exit_coefs(bar):
    bg = bar.frame.bg
    r2 = bar.frame.grid.r2
    p = bg.profile(r2, "+")
    from .background import Coefficients
    co = Coefficients(bg)
    k = bg.kappa_bar
    return {"rhoU": p["rho"] * p["U"], "d": co.d(r2), "d3": co.d3(r2),
            "c5": p["rho"] * (1.0 + k * k * p["rho"] * p["M2"]),
            "c6": k * p["rho"] ** 2 * p["U"] ** 2}


def eval_q_terms(terms, grid, co, hat_state=None, bar_state=None, Te=None, R4_exit=None,
                 Vdot=None):
    """Boundary data q1..q5, m2 and the exit remainder, written into terms.

    Te is the exit pressure perturbation (already multiplied by epsilon);
    R4_exit is R4 at y1 = r2; Vdot = (V2dot, V3dot) at rs if available.
    """
    rs = grid.rs
    g2, g3, R1 = terms.g2, terms.g3, terms.R1
    d2g2, _ = grid.d2(g2, "sc")
    d3g3, _ = grid.d3(g3, "cs")
    c = grid.analyze(R1, "cc")
    al, be = grid.eigen()
    lap = -(al[:, None] ** 2 / rs ** 2 + be[None, :] ** 2)
    terms.q1 = co.a1 * (d2g2 / rs + d3g3) + grid.synthesize(lap * c, "cc")
    d2R1, _ = grid.d2(R1, "cc")
    d3R1, _ = grid.d3(R1, "cc")
    q2 = d2R1 / rs + g2
    q3 = d3R1 + g3
    terms.q2p, terms.q2m = q2[-1], q2[0]
    terms.q3p, terms.q3m = q3[:, -1], q3[:, 0]
    if Vdot is not None:
        d2v, _ = grid.d2(Vdot[0], "sc")
        d3v, _ = grid.d3(Vdot[1], "cs")
        terms.q5 = terms.q1 + co.a0 * co.a1 * (d2v / rs + d3v)
    if hat_state is not None:
        p = co.bg.profile(grid.r2, "+")
        rhoU = p["rho"] * p["U"]
        E, _ = exit_remainder(hat_state, bar_state)
        k = co.bg.kappa_bar
        V5 = hat_state.V[4].values[-1]
        V6 = hat_state.V[5].values[-1]
        te = np.zeros(grid.eshape) if Te is None else np.asarray(Te, dtype=float)
        r4 = np.zeros(grid.eshape) if R4_exit is None else np.asarray(R4_exit)
        top = (-te + p["rho"] * (1.0 + k * k * p["rho"] * p["M2"]) * V5
               + k * p["rho"] ** 2 * p["U"] ** 2 * V6 + E)
        terms.q4 = top / rhoU - co.d3(grid.r2) * r4
        terms.m2 = terms.q4
        terms.E_exit = E
    return terms


def front_update(V1_rs, R1, co):
    """Front displacement from the trace of V1 and the hat remainder R1."""
    return (np.asarray(V1_rs) - np.asarray(R1)) / co.a1


def lemma22_residual(V7, V2_rs, V3_rs, g2, g3, grid, a0):
    """Sup norms of F2, F3 and of the curl/div relations built from them."""
    rs = grid.rs
    d2v7, _ = grid.d2(V7, "cc")
    d3v7, _ = grid.d3(V7, "cc")
    F2 = d2v7 / rs - a0 * V2_rs - g2
    F3 = d3v7 - a0 * V3_rs - g3
    d2F3, _ = grid.d2(F3, "cs")
    d3F2, _ = grid.d3(F2, "sc")
    d2F2, _ = grid.d2(F2, "sc")
    d3F3, _ = grid.d3(F3, "cs")
    sup = lambda a: float(np.max(np.abs(a)))
    return sup(F2), sup(F3), sup(d2F3 / rs - d3F2), sup(d2F2 / rs + d3F3)

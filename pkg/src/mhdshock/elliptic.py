"""Elliptic solves on the fixed box, one transverse mode at a time.

All radial problems use second-order finite differences on the uniform
stations and banded direct solves. Modes beyond the representable pairs
(the Nyquist cosine modes that have no sine partner) are set to zero.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .downstream import (DownState, LinearRows, curl_lhs, den_row, j23)
from .errors import InconsistencyError, ResonanceError
from .spectral import ModalField, radial_derivative


@dataclass
class EllipticSources:
    G0: ModalField = None         # density row source (cc), includes the V5 part
    G1: ModalField = None         # ss
    G2: ModalField = None         # cs
    G3: ModalField = None         # sc
    Gt1: ModalField = None
    Gt2: ModalField = None
    Gt3: ModalField = None
    G4: ModalField = None
    G5: ModalField = None
    H: tuple = None               # nonlinear curl rows (C_k - J_k)
    info: dict = field(default_factory=dict)


def assemble_sources(state, J1, lin, hat_V=None):
    """Exact remainders of the four velocity rows.

    state: DownState built from (V1..V3 hat, provisional V4, new V5, V6) on
    the hat frame; J1: new first vorticity component; lin: LinearRows.
    hat_V: velocity fields for the linear parts (defaults to state.V[:3]).
    """
    V1, V2, V3 = hat_V or state.V[:3]
    Nden = den_row(state) / lin.rc.col("c2bar")
    C1, C2, C3 = curl_lhs(state)
    J2, J3 = j23(state, J1)
    H = (C1 - J1, C2 - J2, C3 - J3)
    src = EllipticSources()
    src.G0 = lin.L0(V1, V2, V3) - Nden
    src.G1 = lin.L1(V2, V3) - H[0]
    src.G2 = lin.L2(V1, V3) - H[1]
    src.G3 = lin.L3(V1, V2) - H[2]
    src.H = H
    return src


def _tridiag_conservative(y, p_mid, q, h):
    """Banded matrix of (p u')' - q u on stations y, Dirichlet at both ends."""
    n = len(y)
    ab = np.zeros((3, n))
    main = np.empty(n)
    main[1:-1] = -(p_mid[1:] + p_mid[:-1]) / h ** 2 - q[1:-1]
    ab[0, 2:] = p_mid[1:] / h ** 2            # super-diagonal (row i, col i+1), i = 1..n-2
    ab[2, :-2] = p_mid[:-1] / h ** 2          # sub-diagonal (row i, col i-1)
    main[0] = main[-1] = 1.0
    ab[0, 1] = 0.0
    ab[2, -2] = 0.0
    ab[1] = main
    return ab


def _mid(y):
    return 0.5 * (y[1:] + y[:-1])


def solve_Pi(G1, G2, G3, grid):
    """Poisson problem for Pi (ss) with Dirichlet data at both radial ends.

    Operator (1/y1)(y1 Pi')' + Pi_22 / y1^2 + Pi_33; right-hand side the
    cylindrical divergence of (G1, G2, G3).
    """
    y, h = grid.y1, grid.h
    r = grid.r_col()
    div = G1.d1() + G1 / r + G2.d2() / r + G3.d3()
    if div.parity != "ss":
        raise InconsistencyError(f"divergence source has parity {div.parity}", step="Pi")
    c = grid.analyze(div.values, "ss")
    al, be = grid.eigen()
    ym = _mid(y)
    out = np.zeros_like(c)
    m2, m3 = grid.b2.sin_mask, grid.b3.sin_mask
    for k in np.nonzero(m2)[0]:
        for l in np.nonzero(m3)[0]:
            q = al[k] ** 2 / y ** 2 + be[l] ** 2
            ab = _tridiag_conservative(y, ym / 1.0, q * y, h)
            rhs = c[:, k, l] * y
            rhs[0] = rhs[-1] = 0.0
            out[:, k, l] = solve_banded((1, 1), ab, rhs)
    return ModalField(grid, "ss", grid.synthesize(out, "ss"))


def correct_sources(src, Pi, grid):
    r = grid.r_col()
    src.Gt1 = src.G1 - Pi.d1()
    src.Gt2 = src.G2 - Pi.d2() / r
    src.Gt3 = src.G3 - Pi.d3()
    return src


def div_defect(Gt1, Gt2, Gt3, grid):
    r = grid.r_col()
    return (Gt1.d1() + Gt1 / r + Gt2.d2() / r + Gt3.d3()).sup()


def solve_m1(q5, a3, grid):
    """Zero-mean solution of (d22/rs^2 + d33) m1 = a3 q5; returns (m1, defect)."""
    c = grid.analyze(q5, "cc")
    al, be = grid.eigen()
    lam = al[:, None] ** 2 / grid.rs ** 2 + be[None, :] ** 2
    defect = float(abs(c[0, 0]))
    lam[0, 0] = 1.0
    m = -a3 * c / lam
    m[0, 0] = 0.0
    return grid.synthesize(m, "cc"), defect


@dataclass
class DivCurlResult:
    Vdot: tuple
    residual: float
    scale: float


def solve_divcurl(Gt1, Gt2, Gt3, grid, co, rtol=None):
    """Weighted div-curl system for (d V1dot, d0 V2dot, d0 V3dot).

    Per mode, s = y1 * (mode of d V1dot) solves a two-point problem with
    s = 0 at both ends; the curl relation not used in the reduction is
    evaluated afterwards and reported.
    """
    y, h = grid.y1, grid.h
    ym = _mid(y)
    al, be = grid.eigen()
    n2, n3 = grid.N2, grid.N3
    g1 = grid.analyze(Gt1.values, "ss")
    g2 = grid.analyze(Gt2.values, "cs")
    g3 = grid.analyze(Gt3.values, "sc")
    S = np.zeros((grid.N1, n2 + 1, n3 + 1))
    Bc = np.zeros_like(S)
    Cc = np.zeros_like(S)
    grad = lambda u: radial_derivative(u, h)
    for k in range(n2):
        for l in range(n3):
            if k == 0 and l == 0:
                continue
            a, b = al[k], be[l]
            if l == 0:
                # (y1 s')' - a^2 s / y1 = -a y1 g3
                ab = _tridiag_conservative(y, ym, a * a / y, h)
                rhs = -a * y * g3[:, k, 0]
                rhs[0] = rhs[-1] = 0.0
                s = solve_banded((1, 1), ab, rhs)
                Bc[:, k, 0] = -grad(s) / a
            else:
                lam = a * a + b * b * y ** 2
                lam_m = a * a + b * b * ym ** 2
                ab = _tridiag_conservative(y, ym / lam_m, 1.0 / y, h)
                G1k = g1[:, k, l] if k >= 1 else 0.0 * y
                F = a * y * G1k / (b * lam)
                rhs = g2[:, k, l] / b - grad(F)
                rhs[0] = rhs[-1] = 0.0
                s = solve_banded((1, 1), ab, rhs)
                sp = grad(s)
                if k >= 1:
                    Bc[:, k, l] = -(a * sp - b * y ** 2 * G1k) / lam
                Cc[:, k, l] = -y * (a * G1k + b * sp) / lam
            S[:, k, l] = s
    r = grid.r_col()
    A = ModalField(grid, "cc", grid.synthesize(S, "cc") / r)
    B = ModalField(grid, "sc", grid.synthesize(Bc, "sc"))
    C = ModalField(grid, "cs", grid.synthesize(Cc, "cs"))
    rc = co.table(y)
    col = lambda v: v[:, None, None]
    V1 = A / col(rc["d"])
    V2 = B / col(rc["d0"])
    V3 = C / col(rc["d0"])
    res = divcurl_residual(A, B, C, Gt1, Gt2, Gt3, grid)
    scale = max(Gt1.sup(), Gt2.sup(), Gt3.sup())
    worst = max(res)
    if rtol is not None and worst > rtol * max(scale, 1e-300):
        raise InconsistencyError(f"div-curl residual {worst:.3g} vs sources {scale:.3g}",
                                 step="divcurl")
    return DivCurlResult((V1, V2, V3), worst, scale)


def divcurl_residual(A, B, C, Gt1, Gt2, Gt3, grid):
    """Sup norms of the four div-curl rows for weighted fields A, B, C."""
    r = grid.r_col()
    div = A.d1() + A / r + B.d2() / r + C.d3()
    c1 = C.d2() / r - B.d3() - Gt1
    c2 = A.d3() - C.d1() - Gt2
    c3 = B.d1() + B / r - A.d2() / r - Gt3
    sl = (slice(1, -1),)
    return tuple(float(np.max(np.abs(f.values[sl]))) for f in (div, c1, c2, c3))


def g4_source(G0, Vdot1, grid, co):
    """Density-row source seen by the potential part."""
    rc = co.table(grid.y1)
    col = lambda v: v[:, None, None]
    y = grid.r_col()
    d, d0, d1, d2, dp = (col(rc[k]) for k in ("d", "d0", "d1", "d2", "dprime"))
    return G0 + (d / d0 - d1) * Vdot1.d1() + (d / (d0 * y) - 1.0 / y + dp / d0 - d2) * Vdot1


def g5_source(G4, m1, grid, co):
    col = lambda v: v[:, None, None]
    d4 = col(co.d4(grid.y1))
    return G4 + co.a2 / (co.a1 * co.a3) * d4 * m1[None]


def solve_phi_nonlocal(G5, m1, m2, grid, co, d4_hook=None):
    """Potential phi (cc) for the density row with Robin/Neumann data.

    Per mode the radial problem is
        (d1/d) phi'' + (-d1 d'/d^2 + (1/y1 + d2)/d) phi' - lam phi / d0
            - (a0 a2 / d0(rs)) d4 phi(rs) = G5,
    phi'(rs) - a4 phi(rs) = m1 and phi'(r2) = m2. The nonlocal column is
    closed by a rank-one correction. d4_hook replaces d4 (testing).
    """
    y, h, n = grid.y1, grid.h, grid.N1
    rc = co.table(y)
    d, d0, d1, d2, dp = (rc[k] for k in ("d", "d0", "d1", "d2", "dprime"))
    d4 = rc["d4"] if d4_hook is None else np.broadcast_to(d4_hook, y.shape)
    for name, v in (("d", d), ("d0", d0), ("d1", d1)):
        if np.any(v <= 0):
            raise InconsistencyError(f"coefficient {name} not positive", step="phi")
    A2 = d1 / d
    A1 = -d1 * dp / d ** 2 + (1.0 / y + d2) / d
    cnl = co.a0 * co.a2 / co.d0(grid.rs) * d4
    a4 = co.a4
    al, be = grid.eigen()
    g = grid.analyze(G5.values, "cc")
    M1 = grid.analyze(m1, "cc")
    M2 = grid.analyze(m2, "cc")
    out = np.zeros_like(g)
    lo = A2 / h ** 2 - A1 / (2 * h)
    up = A2 / h ** 2 + A1 / (2 * h)
    for k in range(grid.N2 + 1):
        for l in range(grid.N3 + 1):
            lam = al[k] ** 2 / y ** 2 + be[l] ** 2
            main = -2.0 * A2 / h ** 2 - lam / d0
            ab = np.zeros((3, n))
            ab[1] = main
            ab[0, 1:] = up[:-1]
            ab[2, :-1] = lo[1:]
            rhs = g[:, k, l].copy()
            # ghost phi_{-1} = phi_1 - 2h (m1 + a4 phi_0)
            ab[0, 1] += lo[0]
            ab[1, 0] -= lo[0] * 2 * h * a4
            rhs[0] += lo[0] * 2 * h * M1[k, l]
            # ghost phi_n = phi_{n-2} + 2h m2
            ab[2, n - 2] += up[-1]
            rhs[-1] -= up[-1] * 2 * h * M2[k, l]
            u = solve_banded((1, 1), ab, rhs)
            v = solve_banded((1, 1), ab, cnl)
            den = 1.0 - v[0]
            if abs(den) < 1e-12:
                raise ResonanceError(f"nonlocal closure singular at mode ({k},{l})", step="phi")
            out[:, k, l] = u + u[0] / den * v
    return ModalField(grid, "cc", grid.synthesize(out, "cc"))


def reconstruct_velocity(phi, Vdot, m1, m2, grid, co):
    """V = Vdot + N with N built from the potential phi."""
    y, h = grid.y1, grid.h
    rc = co.table(y)
    col = lambda v: v[:, None, None]
    p = phi.values
    # the end values follow from the discrete solution rather than the
    # boundary data, which keeps the O(h^2) error smooth up to the ends
    dp = radial_derivative(p, h)
    r = grid.r_col()
    d, d0, d3 = col(rc["d"]), col(rc["d0"]), col(rc["d3"])
    N1 = dp / d - co.a2 / (co.a1 * co.a3) * d3 / d * dp[0][None]
    N2 = phi.d2() / (d0 * r)
    N3 = phi.d3() / d0
    V1 = Vdot[0] + ModalField(grid, "cc", N1)
    return V1, Vdot[1] + N2, Vdot[2] + N3


def make_linear(grid, co):
    return LinearRows(grid, co)


__all__ = ["EllipticSources", "assemble_sources", "solve_Pi", "correct_sources", "div_defect",
           "solve_m1", "solve_divcurl", "divcurl_residual", "g4_source", "g5_source",
           "solve_phi_nonlocal", "reconstruct_velocity", "DownState"]

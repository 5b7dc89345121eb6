import numpy as np
import pytest
from scipy.integrate import solve_bvp

from conftest import basis
from mhdshock.elliptic import (divcurl_residual, reconstruct_velocity, solve_divcurl, solve_m1,
                               solve_phi_nonlocal, solve_Pi)
from mhdshock.spectral import ModalField, SpectralGrid

K, L = 2, 1


def order(errs):
    return [np.log2(a / b) for a, b in zip(errs, errs[1:])]


@pytest.fixture(scope="module")
def grids(bg):
    return {n: SpectralGrid(n, 8, 8, 0.4, bg.rs, bg.r2) for n in (17, 33, 65)}


def col(v):
    return v[:, None, None]


def pi_error(g, k=K, l=L):
    y, Lr = g.y1, g.r2 - g.rs
    x = (y - g.rs) / Lr
    a, b = g.eigen()[0][k], g.eigen()[1][l]
    f = x * (1 - x) * np.exp(y)
    fp = (1 - 2 * x) / Lr * np.exp(y) + f
    G1 = ModalField(g, "ss", col(fp) * basis(g, k, l, 1, 1))
    G2 = ModalField(g, "cs", col(f * a / y) * basis(g, k, l, 0, 1))
    G3 = ModalField(g, "sc", col(f * b) * basis(g, k, l, 1, 0))
    Pi = solve_Pi(G1, G2, G3, g)
    return np.max(np.abs(Pi.values - col(f) * basis(g, k, l, 1, 1))), Pi


def test_Pi_manufactured_second_order(grids):
    e = [pi_error(g)[0] for g in grids.values()]
    assert min(order(e)) >= 1.9


def test_Pi_modal_decoupling(grids):
    g = grids[17]
    _, Pi = pi_error(g)
    c = g.analyze(Pi.values, "ss")
    mask = np.ones(g.eshape, bool)
    mask[K, L] = False
    assert np.max(np.abs(c[:, mask])) <= 1e-13 * np.max(np.abs(c))


def test_Pi_zero_source(grids):
    g = grids[17]
    z = lambda p: ModalField(g, p, np.zeros(g.shape))
    assert solve_Pi(z("ss"), z("cs"), z("sc"), g).sup() == 0.0


def divcurl_case(g, co, k=K, l=L):
    y, Lr = g.y1, g.r2 - g.rs
    x = (y - g.rs) / Lr
    a, b = g.eigen()[0][k], g.eigen()[1][l]
    s = np.sin(np.pi * x)
    sp = np.pi / Lr * np.cos(np.pi * x)
    spp = -(np.pi / Lr) ** 2 * s
    bb, bp = y ** 2, 2 * y
    c = -(sp + a * bb) / (b * y)
    cp = -((spp + a * bp) / (b * y) - (sp + a * bb) / (b * y ** 2))
    # weighted fields A = d V1, B = d0 V2, C = d0 V3 with div A = 0 built in
    Gt = (ModalField(g, "ss", col(b * bb - a * c / y) * basis(g, k, l, 1, 1)),
          ModalField(g, "cs", col(-b * s / y - cp) * basis(g, k, l, 0, 1)),
          ModalField(g, "sc", col(bp + bb / y + a * s / y ** 2) * basis(g, k, l, 1, 0)))
    exact = (col(s / y / co.d(y)) * basis(g, k, l, 0, 0), col(bb / co.d0(y)) * basis(g, k, l, 1, 0),
             col(c / co.d0(y)) * basis(g, k, l, 0, 1))
    return Gt, exact


def test_divcurl_manufactured_second_order(grids, co):
    errs = []
    for g in grids.values():
        Gt, ex = divcurl_case(g, co)
        r = solve_divcurl(*Gt, g, co)
        errs.append(max(np.max(np.abs(v.values - e)) for v, e in zip(r.Vdot, ex)))
    assert min(order(errs)) >= 1.9


def test_divcurl_boundary_contract(grids, co):
    g = grids[33]
    Gt, _ = divcurl_case(g, co)
    V1, V2, V3 = solve_divcurl(*Gt, g, co).Vdot
    assert np.max(np.abs(V1.values[[0, -1]])) <= 1e-14
    assert V2.parity == "sc" and V3.parity == "cs"
    assert g.parity_defect(V2.values, "sc") <= 1e-14
    z = lambda p: ModalField(g, p, np.zeros(g.shape))
    r = solve_divcurl(z("ss"), z("cs"), z("sc"), g, co)
    assert max(v.sup() for v in r.Vdot) == 0.0


def test_divcurl_residuals_decay(grids, co):
    res = []
    for g in grids.values():
        Gt, _ = divcurl_case(g, co)
        V1, V2, V3 = solve_divcurl(*Gt, g, co).Vdot
        y = g.r_col()
        A, B, C = V1 * col(co.d(g.y1)), V2 * col(co.d0(g.y1)), V3 * col(co.d0(g.y1))
        res.append(max(divcurl_residual(A, B, C, *Gt, g)))
    assert min(order(res)) >= 1.9


def test_m1_examples(bg, co, grids):
    g = grids[17]
    m, defect = solve_m1(np.zeros(g.eshape), co.a3, g)
    assert np.all(m == 0) and defect == 0.0
    q5 = basis(g, 1, 2, 0, 0)
    m, _ = solve_m1(q5, co.a3, g)
    al, be = g.eigen()
    lam = al[1] ** 2 / g.rs ** 2 + be[2] ** 2
    assert np.max(np.abs(m - (-co.a3 / lam) * q5)) <= 1e-13
    m, defect = solve_m1(q5 + 0.25, co.a3, g)
    assert abs(g.analyze(m, "cc")[0, 0]) <= 1e-15
    assert defect == pytest.approx(0.25, rel=1e-12)


def phi_case(g, co, d4_zero=False, k=1, l=2):
    y = g.y1
    al, be = g.eigen()
    lam = al[k] ** 2 / y ** 2 + be[l] ** 2
    f, fp, fpp = np.cos(3 * y) + y ** 2, -3 * np.sin(3 * y) + 2 * y, -9 * np.cos(3 * y) + 2
    rc = co.table(y)
    d, d0, d1, d2, dp = (rc[q] for q in ("d", "d0", "d1", "d2", "dprime"))
    A2 = d1 / d
    A1 = -d1 * dp / d ** 2 + (1 / y + d2) / d
    cnl = 0.0 if d4_zero else co.a0 * co.a2 / co.d0(g.rs) * rc["d4"]
    G = A2 * fpp + A1 * fp - lam * f / d0 - cnl * f[0]
    B = basis(g, k, l, 0, 0)
    phi = solve_phi_nonlocal(ModalField(g, "cc", col(G) * B), (fp[0] - co.a4 * f[0]) * B,
                             fp[-1] * B, g, co, d4_hook=0.0 if d4_zero else None)
    return np.max(np.abs(phi.values - col(f) * B))


@pytest.mark.parametrize("d4_zero", [False, True])
def test_phi_manufactured_second_order(grids, co, d4_zero):
    e = [phi_case(g, co, d4_zero) for g in grids.values()]
    assert min(order(e)) >= 1.9


def _bvp_oracle(co, g, k, l, G, m1, m2, with_nl):
    """scipy collocation of the same radial problem; phi(rs) is a free parameter."""
    al, be = g.eigen()
    lamk = lambda y: al[k] ** 2 / y ** 2 + be[l] ** 2

    def rhs(y, u, p):
        rc = co.table(y)
        d, d0, d1, d2, dp = (rc[q] for q in ("d", "d0", "d1", "d2", "dprime"))
        cnl = co.a0 * co.a2 / co.d0(g.rs) * rc["d4"] if with_nl else 0.0
        A2 = d1 / d
        A1 = -d1 * dp / d ** 2 + (1 / y + d2) / d
        upp = (G(y) - A1 * u[1] + lamk(y) * u[0] / d0 + cnl * p[0]) / A2
        return np.vstack([u[1], upp])

    def bc(ua, ub, p):
        return np.array([ua[1] - co.a4 * ua[0] - m1, ub[1] - m2, ua[0] - p[0]])

    y = np.linspace(g.rs, g.r2, 41)
    sol = solve_bvp(rhs, bc, y, np.zeros((2, y.size)), p=[0.0], tol=1e-10, max_nodes=20000)
    assert sol.success
    return sol.sol


@pytest.mark.parametrize("nonlocal_", [False, True])
def test_phi_against_collocation_solver(grids, co, nonlocal_):
    g = grids[65]
    k, l = 1, 1
    G = lambda y: np.sin(4 * y)
    B = basis(g, k, l, 0, 0)
    phi = solve_phi_nonlocal(ModalField(g, "cc", col(G(g.y1)) * B), 0.3 * B, -0.2 * B, g, co,
                             d4_hook=None if nonlocal_ else 0.0)
    coef = g.analyze(phi.values, "cc")[:, k, l] / g.analyze(B, "cc")[k, l]
    ref = _bvp_oracle(co, g, k, l, G, 0.3, -0.2, nonlocal_)(g.y1)[0]
    assert np.max(np.abs(coef - ref)) <= 5e-4 * np.max(np.abs(ref))


def test_phi_homogeneous(grids, co):
    g = grids[17]
    z = np.zeros(g.eshape)
    assert solve_phi_nonlocal(ModalField(g, "cc", np.zeros(g.shape)), z, z, g, co).sup() == 0.0


def test_reconstruct_velocity(grids, co):
    g = grids[17]
    zero = [ModalField(g, p, np.zeros(g.shape)) for p in ("cc", "sc", "cs")]
    z = np.zeros(g.eshape)
    V = reconstruct_velocity(ModalField(g, "cc", np.zeros(g.shape)), zero, z, z, g, co)
    assert max(v.sup() for v in V) == 0.0
    radial = ModalField(g, "cc", np.broadcast_to(col(np.sin(g.y1)), g.shape).copy())
    V1, V2, V3 = reconstruct_velocity(radial, zero, z, z, g, co)
    assert V2.sup() <= 1e-14 and V3.sup() <= 1e-14
    assert np.ptp(V1.values, axis=(1, 2)).max() <= 1e-14

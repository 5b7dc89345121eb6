"""Characteristics of the downstream streamline operator on the fixed box.

Trajectories are traced backward from every grid point to the front with
classical RK4. The steps coincide with the radial stations; the midpoint
stages use cubic interpolation of the transverse modal coefficients, and
the fields are synthesised exactly at the moving points.
"""
from dataclasses import dataclass

import numpy as np

from .downstream import mu_H0, transport_coefficients
from .errors import GeometryError
from .spectral import ModalField, _bits
from .upstream import _lagrange, sample_deviation

WALL_TOL = 1e-9


@dataclass
class TransportTerms:
    """Slopes K2, K3 and (optionally) the scaled damping mu and source H0."""
    K2: ModalField
    K3: ModalField
    mu: ModalField = None
    H0: ModalField = None


@dataclass
class FootMap:
    beta2: np.ndarray
    beta3: np.ndarray
    L: np.ndarray = None          # integral of mu along the trajectory
    Q: np.ndarray = None          # integral of H0 exp(-L) along the trajectory
    drift: float = 0.0            # largest wall overshoot that was clamped

    def wall_defect(self, grid):
        """Largest departure from wall invariance of the foot map."""
        th = grid.theta0
        d2 = np.abs(self.beta2[:, [0, -1], :] - np.array([-th, th])[None, :, None])
        d3 = np.abs(self.beta3[:, :, [0, -1]] - np.array([-1.0, 1.0])[None, None, :])
        return float(max(d2.max(), d3.max()))


def transport_terms(st):
    """TransportTerms of the streamline operator for a DownState st."""
    st.check_stagnation()
    c1, a, b = transport_coefficients(st)
    mu, H0 = mu_H0(st)
    return TransportTerms(a / c1, b / c1, mu / c1, H0 / c1)


def _half_coeffs(C):
    """Cubic interpolation of station coefficients to the midpoints."""
    n = C.shape[0]
    if n < 4:
        raise ValueError("need at least four radial stations")
    mids = np.arange(n - 1) + 0.5
    i0 = np.clip(np.floor(mids).astype(int) - 1, 0, n - 4)
    idx = i0[:, None] + np.arange(4)[None, :]
    w, _ = _lagrange(idx.astype(float), mids)
    return np.einsum("mk,mkab->mab", w, C[idx])


class _Field:
    def __init__(self, f):
        g = f.grid
        self.o2, self.o3 = _bits(f.parity)
        C = g.analyze(f.values, f.parity) * g.mode_mask(f.parity)
        self.C, self.H = C, _half_coeffs(C)


def _clamp(y, lo, hi, strict):
    over = np.maximum(y - hi, lo - y)
    d = float(np.max(over)) if over.size else 0.0
    if d > WALL_TOL and strict:
        raise GeometryError(f"characteristic left the box by {d:.3g}", step="trace")
    if strict or d <= WALL_TOL:
        return np.clip(y, lo, hi), max(d, 0.0)
    return y, 0.0


def bernoulli_deviation(prof, dev, gamma):
    """B - Bbar from upstream deviations without cancelling O(1) terms.

    The background itself carries B = Bbar exactly, so only the deviation
    part is formed (enthalpy ratio through log1p/expm1).
    """
    g = gamma
    U = prof["U"]
    p1, p2, p3 = dev["U1"], dev["U2"], dev["U3"]
    hbar = g / (g - 1.0) * prof["P"] / prof["rho"]
    lr = (g - 1.0) / g * np.log1p(dev["P"] / prof["P"]) + np.log1p(dev["S"] / prof["S"]) / g
    return U * p1 + 0.5 * (p1 * p1 + p2 * p2 + p3 * p3) + hbar * np.expm1(lr)


def trace_characteristics(terms, grid, strict=True):
    """Foot points on y1 = rs of the characteristics through every grid point.

    With terms.mu and terms.H0 set, the integrating factor L and the source
    integral Q are carried along as two extra unknowns.
    """
    n1 = grid.N1
    Y2, Y3 = np.meshgrid(grid.y2, grid.y3, indexing="ij")
    M = Y2.size
    y2 = np.tile(Y2.ravel(), (n1, 1))
    y3 = np.tile(Y3.ravel(), (n1, 1))
    aug = terms.mu is not None
    fields = [_Field(terms.K2), _Field(terms.K3)]
    if aug:
        fields += [_Field(terms.mu), _Field(terms.H0)]
    L = np.zeros((n1, M))
    Q = np.zeros((n1, M))
    drift = 0.0

    zero = None

    def F(C, p):
        z, e = grid.zeta_of(p[0]), grid.eta_of(p[1])
        T2 = {o: grid.b2.table(o, z) for o in (0, 1)}
        T3 = {o: grid.b3.table(o, e) for o in (0, 1)}
        out = [np.einsum("pa,ab,pb->p", T2[fd.o2], C(fd), T3[fd.o3]) for fd in fields]
        if aug:
            return [out[0], out[1], -out[2], -out[3] * np.exp(-p[2])]
        return out + [zero, zero]

    th = grid.theta0
    for j in range(n1 - 1, 0, -1):
        h = grid.y1[j] - grid.y1[j - 1]
        act = slice(j, n1)
        X = [a[act].ravel() for a in (y2, y3, L, Q)]
        zero = np.zeros_like(X[0])
        nodes = (lambda fd: fd.C[j], lambda fd: fd.H[j - 1], lambda fd: fd.H[j - 1],
                 lambda fd: fd.C[j - 1])
        ks = []
        for C, c in zip(nodes, (0.0, 0.5, 0.5, 1.0)):
            p = [x - c * h * k for x, k in zip(X, ks[-1])] if ks else list(X)
            p[0], d2 = _clamp(p[0], -th, th, strict)
            p[1], d3 = _clamp(p[1], -1.0, 1.0, strict)
            drift = max(drift, d2, d3)
            ks.append(F(C, p))
        new = [x - h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4) for x, k1, k2, k3, k4 in zip(X, *ks)]
        new[0], d2 = _clamp(new[0], -th, th, strict)
        new[1], d3 = _clamp(new[1], -1.0, 1.0, strict)
        drift = max(drift, d2, d3)
        shp = (n1 - j, M)
        for arr, v in zip((y2, y3, L, Q), new):
            arr[act] = v.reshape(shp)
    shape = grid.shape
    fm = FootMap(y2.reshape(shape), y3.reshape(shape), drift=drift)
    if aug:
        fm.L, fm.Q = L.reshape(shape), Q.reshape(shape)
    return fm


def eval_at_feet(grid, field2d, parity, foot):
    """A front field (2D values) synthesised at the foot points."""
    c = grid.analyze(field2d, parity) * grid.mode_mask(parity)
    return grid.eval_points(c, parity, foot.beta2, foot.beta3)


def transport_scalars(foot, upstream, V7_hat, V1_rs, R1, R2, co, grid,
                      variant="consistent"):
    """V4, V5, V6 on the box from constancy along the characteristics.

    Returns (V4, V5, V6, R4) as ModalFields; the projection defects onto
    the even-even class are stored on the fields.
    """
    bg = co.bg
    v7b = eval_at_feet(grid, V7_hat, "cc", foot)
    xi = bg.rs + v7b
    prof, dev = sample_deviation(upstream, xi, foot.beta2, foot.beta3)
    V5 = bernoulli_deviation(prof, dev, bg.thermo.gamma)
    V6 = dev["kappa"]
    k = co.a2 / co.a1
    R2b = eval_at_feet(grid, R2, "cc", foot)
    if variant == "consistent":
        R1y = np.broadcast_to(R1, grid.shape)
    elif variant == "printed":
        R1y = eval_at_feet(grid, R1, "cc", foot)
    else:
        raise ValueError(f"unknown R4 variant {variant!r}")
    R4 = co.a2 * (v7b - V7_hat[None]) + R2b - k * R1y
    V4 = k * np.broadcast_to(V1_rs, grid.shape) + R4
    out = [ModalField.from_values(grid, a, "cc") for a in (V4, V5, V6, R4)]
    return tuple(out)


def solve_J1(foot, R6, grid):
    """First modified-vorticity component from front data and the trajectory integrals."""
    R6b = eval_at_feet(grid, R6, "ss", foot)
    J = R6b * np.exp(-foot.L) + foot.Q
    return ModalField.from_values(grid, J, "ss")


def eval_J23(st, J1):
    """Second and third components from the momentum relations."""
    from .downstream import j23
    return j23(st, J1)

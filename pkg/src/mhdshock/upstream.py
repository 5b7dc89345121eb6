"""Supersonic region: nonlinear radial marching of the perturbed flow.

The unknown is the deviation phi from the background. At each stage the
6x6 system A(Phi) dPhi/dr = b(Phi) is solved pointwise and the background
slope (computed by the same code path) is subtracted, so a zero deviation
stays exactly zero.
"""
from dataclasses import dataclass, field

import numpy as np

from .equations import cyl_rows, radial_system
from .errors import DomainError, RegimeLossError, TrustRegionError
from .spectral import SpectralGrid
from .state import FlowState, Regime, classify_regime, derived_quantities

FIELD_PARITY = {"U1": "cc", "U2": "sc", "U3": "cs", "P": "cc", "S": "cc", "kappa": "cc"}
INLET_KEYS = {"U10": "U1", "U20": "U2", "U30": "U3", "P0": "P", "S0": "S", "kappa0": "kappa"}
ORDER = ("U1", "U2", "U3", "P", "S", "kappa")


@dataclass(frozen=True)
class Mode:
    theta: str      # "cos" or "sin"
    x3: str
    k2: int
    k3: int
    amp: float


@dataclass
class InletData:
    """Inlet deviation eps * sum(amp * basis) for each of the six fields."""
    epsilon: float = 0.0
    modes: dict = field(default_factory=dict)   # inlet key -> list of Mode

    def field_modes(self, key):
        return self.modes.get(key, [])


def mode_parity(m):
    return ("s" if m.theta == "sin" else "c") + ("s" if m.x3 == "sin" else "c")


def check_inlet_compatibility(inlet):
    for key, modes in inlet.modes.items():
        if key not in INLET_KEYS:
            return False
        want = FIELD_PARITY[INLET_KEYS[key]]
        for m in modes:
            if m.theta not in ("cos", "sin") or m.x3 not in ("cos", "sin"):
                return False
            if mode_parity(m) != want:
                return False
            if (m.theta == "sin" and m.k2 < 1) or (m.x3 == "sin" and m.k3 < 1):
                return False
    return True


def modes_on_grid(grid, modes, zeta=None, eta=None):
    """Sum of mode tables on the transverse collocation grid."""
    z = grid.b2.zeta if zeta is None else zeta
    e = grid.b3.zeta if eta is None else eta
    out = np.zeros((len(z), len(e)))
    for m in modes:
        f2 = np.sin(m.k2 * np.pi * z) if m.theta == "sin" else np.cos(m.k2 * np.pi * z)
        f3 = np.sin(m.k3 * np.pi * e) if m.x3 == "sin" else np.cos(m.k3 * np.pi * e)
        out += m.amp * np.outer(f2, f3)
    return out


def upstream_grid(bg, grid):
    """Radial grid on [r1, r2] with the downstream spacing and transverse sizes."""
    q = int(np.ceil((bg.r2 - bg.r1) / (bg.r2 - bg.rs) - 1e-12))
    return SpectralGrid((grid.N1 - 1) * q + 1, grid.N2, grid.N3, grid.theta0, bg.r1, bg.r2)


@dataclass
class UpstreamField:
    grid: SpectralGrid
    bg: object
    pert: dict                     # name -> (Nr, n2, n3) deviation values
    substeps: list = field(default_factory=list)
    epsilon: float = 0.0

    def __post_init__(self):
        self._coef = {k: self.grid.analyze(v, FIELD_PARITY[k]) for k, v in self.pert.items()}

    def full(self, name):
        p = self.bg.profile(self.grid.y1, "-")
        base = {"U1": p["U"], "U2": 0 * p["U"], "U3": 0 * p["U"], "P": p["P"],
                "S": p["S"], "kappa": self.bg.kappa_bar + 0 * p["U"]}[name]
        return base[:, None, None] + self.pert[name]

    def deviation_sup(self):
        return max(float(np.max(np.abs(v))) for v in self.pert.values())


_BG_CACHE = {}


def _bg_key(bg):
    # the supersonic branch depends only on these
    return (bg.m, bg.Bbar, bg.S_minus, bg.kappa_bar, bg.thermo.gamma)


def _background_fields(bg, r, shape):
    key = ("f", _bg_key(bg), float(r))
    p = _BG_CACHE.get(key)
    if p is None:
        if len(_BG_CACHE) > 4096:
            _BG_CACHE.clear()
        p = bg.profile(r, "-")
        _BG_CACHE[key] = p
    one = np.ones(shape)
    return [p["U"] * one, 0.0 * one, 0.0 * one, p["P"] * one, p["S"] * one, bg.kappa_bar * one]


def _background_slope(bg, r, shape, gamma):
    key = (_bg_key(bg), float(r), shape)
    hit = _BG_CACHE.get(key)
    if hit is None:
        if len(_BG_CACHE) > 4096:
            _BG_CACHE.clear()
        base = _background_fields(bg, r, shape)
        zero = [np.zeros(shape)] * 6
        A0, b0 = radial_system(r, base, zero, zero, gamma)
        hit = np.linalg.solve(A0, b0[..., None])[..., 0]
        _BG_CACHE[key] = hit
    return hit


def _slope(grid, bg, r, dev, gamma, cond_cap=None):
    """d(dev)/dr at radius r for the deviation arrays dev (list of six)."""
    shape = dev[0].shape
    base = _background_fields(bg, r, shape)
    full = [b + d for b, d in zip(base, dev)]
    # d/dtheta in cylindrical coordinates: y2 is theta itself
    dt = [grid.d2(d, FIELD_PARITY[n])[0] for n, d in zip(ORDER, dev)]
    dz = [grid.d3(d, FIELD_PARITY[n])[0] for n, d in zip(ORDER, dev)]
    A, b = radial_system(r, full, dt, dz, gamma)
    if cond_cap is not None:
        c = np.linalg.cond(A.reshape(-1, 6, 6))
        if not np.all(np.isfinite(c)) or np.max(c) > cond_cap:
            raise RegimeLossError(f"radial system ill-conditioned at r={r:.6g} (cond {np.max(c):.3g})",
                                  step="march")
    s = np.linalg.solve(A, b[..., None])[..., 0] - _background_slope(bg, r, shape, gamma)
    return [s[..., i] for i in range(6)]


def march_supersonic(bg, inlet, grid, local_tol=1e-8, eps_cap=5e-2, cond_cap=1e10,
                     max_sub=256, filter_frac=2.0 / 3.0):
    """March the inlet deviation from r1 to r2 on the stations of `grid`.

    Heun steps with substeps per station interval, chosen so that the
    Heun-Euler difference (a local error estimate) stays below local_tol.
    """
    if not check_inlet_compatibility(inlet):
        raise DomainError("inlet modes violate the parity classes", step="march")
    if inlet.epsilon < 0 or inlet.epsilon > eps_cap:
        raise TrustRegionError(f"epsilon={inlet.epsilon} above cap {eps_cap}", step="march")
    th = bg.thermo
    d0 = derived_quantities(bg.state(bg.r1, "-"), th)
    if classify_regime(float(d0.mach2), float(d0.alfven2)) is not Regime.PURELY_HYPERBOLIC:
        raise RegimeLossError("inlet background is not purely hyperbolic", step="march")
    g = th.gamma
    n2, n3 = grid.eshape
    dev = []
    for name in ORDER:
        key = [k for k, v in INLET_KEYS.items() if v == name][0]
        v = inlet.epsilon * modes_on_grid(grid, inlet.field_modes(key))
        dev.append(grid.filter(v, FIELD_PARITY[name], filter_frac))
    out = [np.zeros(grid.shape) for _ in range(6)]
    for i in range(6):
        out[i][0] = dev[i]
    r = grid.y1
    nsub = 1
    subs = []
    active = inlet.epsilon > 0 and any(np.any(d != 0) for d in dev)
    for j in range(grid.N1 - 1):
        if active:
            while True:
                trial, err = _heun_interval(grid, bg, r[j], r[j + 1], dev, g, nsub, cond_cap,
                                            filter_frac)
                if err <= local_tol or nsub >= max_sub:
                    break
                nsub *= 2
            dev = trial
            subs.append(nsub)
            if err < local_tol / 16 and nsub > 1:
                nsub //= 2
        for i in range(6):
            out[i][j + 1] = dev[i]
    pert = {name: out[i] for i, name in enumerate(ORDER)}
    return UpstreamField(grid, bg, pert, subs, inlet.epsilon)


def _heun_interval(grid, bg, ra, rb, dev, g, nsub, cond_cap, frac):
    h = (rb - ra) / nsub
    err = 0.0
    cur = dev
    for s in range(nsub):
        r0 = ra + s * h
        k1 = _slope(grid, bg, r0, cur, g, cond_cap if s == 0 else None)
        pred = [c + h * k for c, k in zip(cur, k1)]
        k2 = _slope(grid, bg, r0 + h, pred, g)
        new = [c + 0.5 * h * (a + b) for c, a, b in zip(cur, k1, k2)]
        err = max(err, max(float(np.max(np.abs(0.5 * h * (b - a)))) for a, b in zip(k1, k2)))
        cur = [grid.filter(v, FIELD_PARITY[n], frac) for n, v in zip(ORDER, new)]
    return cur, err


def _lagrange(nodes, x):
    """4-point Lagrange weights and derivative weights at x (arrays)."""
    w = np.ones((len(x), 4))
    dw = np.zeros((len(x), 4))
    for a in range(4):
        for b in range(4):
            if b == a:
                continue
            w[:, a] *= (x - nodes[:, b]) / (nodes[:, a] - nodes[:, b])
        for c in range(4):
            if c == a:
                continue
            term = 1.0 / (nodes[:, a] - nodes[:, c])
            for b in range(4):
                if b in (a, c):
                    continue
                term = term * (x - nodes[:, b]) / (nodes[:, a] - nodes[:, b])
            dw[:, a] += term
    return w, dw


def _sample(field, r, y2, y3):
    g = field.grid
    r = np.asarray(r, dtype=float)
    shape = r.shape
    rf, y2f, y3f = r.ravel(), np.broadcast_to(y2, shape).ravel(), np.broadcast_to(y3, shape).ravel()
    tol = 1e-12 * (g.r2 - g.rs)
    if np.any(rf < g.rs - tol) or np.any(rf > g.r2 + tol):
        raise DomainError("sample radius outside the upstream domain")
    rf = np.clip(rf, g.rs, g.r2)
    i = np.clip(np.floor((rf - g.rs) / g.h).astype(int) - 1, 0, g.N1 - 4)
    idx = i[:, None] + np.arange(4)[None, :]
    w, dw = _lagrange(g.y1[idx], rf)
    T2 = {o: g.b2.table(o, g.zeta_of(y2f)) for o in (0, 1)}
    T3 = {o: g.b3.table(o, g.eta_of(y3f)) for o in (0, 1)}
    prof = field.bg.profile(rf, "-")
    dev, ddev = {}, {}
    for name in ORDER:
        par = FIELD_PARITY[name]
        C = field._coef[name][idx]                       # (p, 4, n2, n3)
        o2, o3 = int(par[0] == "s"), int(par[1] == "s")
        pt = np.einsum("pa,pkab,pb->pk", T2[o2], C, T3[o3])
        dev[name] = np.sum(w * pt, axis=1).reshape(shape)
        ddev[name] = np.sum(dw * pt, axis=1).reshape(shape)
    prof = {k: np.reshape(v, shape) for k, v in prof.items()}
    return prof, dev, ddev


def sample_deviation(field, r, y2, y3):
    """Background profile and deviations (dicts keyed like ORDER) at scattered points."""
    prof, dev, _ = _sample(field, r, y2, y3)
    return prof, dev


def sample_upstream(field, r, y2, y3, derivative=True):
    """Full upstream state (and its radial derivative) at scattered points."""
    prof, dev, ddev = _sample(field, r, y2, y3)
    zero = 0 * prof["U"]
    base = {"U1": prof["U"], "U2": zero, "U3": zero, "P": prof["P"], "S": prof["S"],
            "kappa": field.bg.kappa_bar + zero}
    dbase = {"U1": prof["dU"], "P": prof["dP"]}
    st = FlowState(*(base[n] + dev[n] for n in ORDER))
    if not derivative:
        return st
    return st, FlowState(*(dbase.get(n, zero) + ddev[n] for n in ORDER))


def upstream_residual(field, interior=True, stencil="second"):
    """Sup norm of the six cylindrical rows on the stored stations.

    Radial derivatives: analytic for the background, finite differences for
    the deviation (second order by default, matching the nominal order of
    the marching scheme; stencil="fourth" uses the composed 4th-order one).
    """
    g, bg = field.grid, field.bg
    p = bg.profile(g.y1, "-")
    col = lambda a: a[:, None, None]
    dev = [field.pert[n] for n in ORDER]
    base = [col(p["U"]), 0.0, 0.0, col(p["P"]), col(p["S"]), bg.kappa_bar]
    full = [b + d for b, d in zip(base, dev)]
    dbase = [col(p["dU"]), 0.0, 0.0, col(p["dP"]), 0.0, 0.0]
    if stencil == "second":
        ddev = lambda d: np.gradient(d, g.h, axis=0, edge_order=2)
    else:
        ddev = g.d1
    dr = [db + ddev(d) for db, d in zip(dbase, dev)]
    dt = [g.d2(d, FIELD_PARITY[n])[0] for n, d in zip(ORDER, dev)]
    dz = [g.d3(d, FIELD_PARITY[n])[0] for n, d in zip(ORDER, dev)]
    rows = cyl_rows(g.r_col(), full, dr, dt, dz, bg.thermo.gamma)
    sl = slice(1, -1) if interior else slice(None)
    return max(float(np.max(np.abs(np.asarray(x)[sl]))) for x in rows)

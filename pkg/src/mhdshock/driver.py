"""Problem S: the fixed-point operator T, its Picard iteration and the residual audit.

One application of T takes a hat iterate (V1..V6 on the box, V7 on E) and

1. evaluates the front algebra on the hat traces,
2. traces the characteristics and transports V4, V5, V6,
3. transports the first modified-vorticity component J1,
4. assembles the exact remainders, removes their divergence with Pi and
   solves the div-curl system,
5. solves the nonlocal potential problem and reconstructs V1, V2, V3,
6. composes the final V4 and the new front displacement V7.
"""
from dataclasses import asdict, dataclass, field
import logging
import time

import numpy as np

from .background import admissible_exit_range, coefficients_at, solve_background
from .config import RunConfig
from .downstream import (V_PARITY, DownState, Frame, LinearRows, advect, background_state,
                         curl_lhs, den_row, j23, mu_H0, total_pressure)
from .elliptic import (assemble_sources, correct_sources, g4_source, g5_source,
                       reconstruct_velocity, solve_divcurl, solve_m1, solve_phi_nonlocal,
                       solve_Pi)
from .equations import cyl_rows
from .errors import DivergenceError, InconsistencyError, TrustRegionError
from .interface import (InterfaceTerms, eval_front_functions, eval_q_terms, eval_R6,
                        eval_R_terms, front_traces, front_update, lemma22_residual)
from .jump import FrontGeometry, rh_residual
from .spectral import ModalField, SpectralGrid
from .state import FlowState, ThermoParams
from .transport import solve_J1, trace_characteristics, transport_scalars, transport_terms
from .upstream import march_supersonic, modes_on_grid, sample_upstream, upstream_grid

log = logging.getLogger(__name__)

TRUST_FLOOR = 1e-12       # absorbs rounding when epsilon = 0
NAMES = ("V1", "V2", "V3", "V4", "V5", "V6")


def _sup(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


@dataclass
class Iterate:
    """Deviations V1..V6 on the box and the front displacement V7 on E.

    J1, Pi, phi and Vdot are the intermediate fields of the step that
    produced the iterate (None for the starting guess).
    """
    V: tuple
    V7: np.ndarray
    J1: ModalField = None
    Pi: ModalField = None
    phi: ModalField = None
    Vdot: tuple = None
    info: dict = field(default_factory=dict)

    @classmethod
    def zero(cls, grid):
        return cls(tuple(ModalField.zeros(grid, p) for p in V_PARITY), np.zeros(grid.eshape))

    def minus(self, other):
        V = tuple(a - b for a, b in zip(self.V, other.V))
        return Iterate(V, self.V7 - other.V7)

    def scaled(self, c):
        return Iterate(tuple(v * c for v in self.V), self.V7 * c)

    def plus(self, other):
        V = tuple(a + b for a, b in zip(self.V, other.V))
        return Iterate(V, self.V7 + other.V7)

    def fields(self):
        """Name -> (values, parity) for every stored field."""
        out = {n: (v.values, v.parity) for n, v in zip(NAMES, self.V)}
        out["V7"] = (self.V7, "cc")
        for name, f in (("J1", self.J1), ("Pi", self.Pi), ("phi", self.phi)):
            if f is not None:
                out[name] = (f.values, f.parity)
        if self.Vdot is not None:
            for i, f in enumerate(self.Vdot, 1):
                out[f"Vdot{i}"] = (f.values, f.parity)
        return out

    def parity_defect(self, grid):
        """Largest parity-class violation over all fields (wall values and projection)."""
        worst = 0.0
        for values, parity in self.fields().values():
            worst = max(worst, grid.parity_defect(values, parity),
                        _sup(values - grid.project(values, parity)))
        return worst


def _r1(a, h):
    return np.gradient(a, h, axis=0, edge_order=2)


def _r11(a, h):
    """Second radial difference: three-point inside, four-point one-sided at the ends."""
    out = np.empty_like(a)
    out[1:-1] = (a[2:] - 2.0 * a[1:-1] + a[:-2]) / h ** 2
    out[0] = (2.0 * a[0] - 5.0 * a[1] + 4.0 * a[2] - a[3]) / h ** 2
    out[-1] = (2.0 * a[-1] - 5.0 * a[-2] + 4.0 * a[-3] - a[-4]) / h ** 2
    return out


def norm_Xi(it, grid):
    """Discrete Xi norm: sups of V1..V6 and their derivatives up to order two,
    plus the transverse derivatives of V7 up to order three.

    Radial derivatives use plain second-order stencils here; they amplify
    rounding far less than the solver's fourth-order ones near the ends.
    """
    h = grid.h
    total = 0.0
    for f in it.V:
        v, p = f.values, f.parity
        d2, p2 = grid.d2(v, p)
        d3, p3 = grid.d3(v, p)
        d1 = _r1(v, h)
        terms = (v, d1, d2, d3, _r11(v, h), _r1(d2, h), _r1(d3, h),
                 grid.d2(d2, p2)[0], grid.d3(d2, p2)[0], grid.d3(d3, p3)[0])
        total += sum(_sup(t) for t in terms)
    v = np.asarray(it.V7, dtype=float)
    total += _v7_norm(v, grid)
    return total


def _v7_norm(v, grid):
    total = 0.0
    for a in range(4):
        for b in range(4 - a):
            w, p = v, "cc"
            for _ in range(a):
                w, p = grid.d2(w, p)
            for _ in range(b):
                w, p = grid.d3(w, p)
            total += _sup(w)
    return total


@dataclass
class Problem:
    """Everything that stays fixed during the iteration."""
    cfg: RunConfig
    bg: object
    co: object
    grid: SpectralGrid
    upstream: object
    lin: LinearRows
    Te: np.ndarray                # epsilon * T_e on E

    @property
    def epsilon(self):
        return self.cfg.solver.epsilon

    @property
    def trust_radius(self):
        return self.cfg.solver.trust_safety * np.sqrt(self.epsilon) + TRUST_FLOOR


def inflow_state(cfg):
    b, g = cfg.background, cfg.gas.gamma
    return FlowState(b.U1, 0.0, 0.0, b.P, b.P / b.rho ** g, b.kappa_bar)


def build_background(cfg):
    """Background solution for the config (Pe_frac places Pe inside the admissible range)."""
    b, geo = cfg.background, cfg.geometry
    thermo = ThermoParams(cfg.gas.gamma)
    inflow = inflow_state(cfg)
    Pe = b.Pe
    if Pe is None:
        P1, P2 = admissible_exit_range(inflow, geo.r1, geo.r2, thermo, b.kappa_bar, b.Pe_total)
        Pe = P1 + b.Pe_frac * (P2 - P1)
    return solve_background(inflow, Pe, geo.r1, geo.r2, b.kappa_bar, thermo, total=b.Pe_total)


def build_problem(cfg, bg=None, upstream=None):
    cfg.validate()
    s = cfg.solver
    bg = bg or build_background(cfg)
    co = coefficients_at(bg)
    grid = SpectralGrid(s.N1, s.N2, s.N3, cfg.geometry.theta0, bg.rs, bg.r2)
    if upstream is None:
        upstream = march_supersonic(bg, cfg.inlet(), upstream_grid(bg, grid), s.march_tol,
                                    eps_cap=max(s.eps0, 5e-2))
    Te = s.epsilon * modes_on_grid(grid, cfg.Te_modes)
    return Problem(cfg, bg, co, grid, upstream, LinearRows(grid, co), Te)


def apply_T(hat, prob, check_trust=True):
    """One application of the operator T to the hat iterate."""
    grid, bg, co = prob.grid, prob.bg, prob.co
    s = prob.cfg.solver
    if check_trust:
        n = norm_Xi(hat, grid)
        if n > prob.trust_radius:
            raise TrustRegionError(f"|hat|_Xi = {n:.3g} exceeds {prob.trust_radius:.3g}",
                                   step="trust")
    info = {}
    # 1. front algebra on the hat traces
    frame = Frame(grid, bg, hat.V7)
    st = DownState(frame, hat.V)
    bar = background_state(frame)
    C1, _, _ = curl_lhs(st, bar)
    tr = front_traces(hat.V[:4], hat.V7, prob.upstream, bg, grid)
    f, f2, f3, g2, g3, g4 = eval_front_functions(tr.up, tr.down, hat.V7, bg, co=co, grid=grid,
                                                 C1_front=C1.values[0])
    R01, R02, R1, R2, R3 = eval_R_terms(tr.up, tr.down, hat.V7, bg, co=co,
                                        fronts=(f, f2, f3))
    R6 = eval_R6(g2, g3, g4, grid, co)
    terms = InterfaceTerms(f=f, f2=f2, f3=f3, g2=g2, g3=g3, g4=g4, R01=R01, R02=R02, R1=R1,
                           R2=R2, R3=R3, R6=R6)
    # 2. characteristics and the transported scalars
    foot = trace_characteristics(transport_terms(st), grid)
    info["wall_defect"] = foot.wall_defect(grid)
    V4p, V5, V6, R4 = transport_scalars(foot, prob.upstream, hat.V7, hat.V[0].values[0], R1, R2,
                                        co, grid, variant=s.r4_variant)
    terms.R4 = R4.values
    # 3. first modified-vorticity component
    J1 = solve_J1(foot, R6, grid)
    # 4. remainders, Pi correction, div-curl
    src_state = DownState(frame, list(hat.V[:3]) + [V4p, V5, V6])
    src = assemble_sources(src_state, J1, prob.lin, hat_V=tuple(hat.V[:3]))
    Pi = solve_Pi(src.G1, src.G2, src.G3, grid)
    src = correct_sources(src, Pi, grid)
    dc = solve_divcurl(src.Gt1, src.Gt2, src.Gt3, grid, co, rtol=s.divcurl_rtol)
    Vdot = dc.Vdot
    info["divcurl_residual"] = dc.residual
    # boundary data of the potential problem
    eval_q_terms(terms, grid, co, hat_state=src_state, bar_state=bar, Te=prob.Te,
                 R4_exit=R4.values[-1], Vdot=(Vdot[1].values[0], Vdot[2].values[0]))
    m1, info["m1_defect"] = solve_m1(terms.q5, co.a3, grid)
    # 5. potential part and velocity
    G4 = g4_source(src.G0, Vdot[0], grid, co)
    G5 = g5_source(G4, m1, grid, co)
    phi = solve_phi_nonlocal(G5, m1, terms.m2, grid, co)
    V1, V2, V3 = reconstruct_velocity(phi, Vdot, m1, terms.m2, grid, co)
    # the exit Robin combination, with the d3 term read at rs and at r2
    v1, k = V1.values, co.a2 / co.a1
    dr2, d3r2 = co.d(grid.r2), co.d3(grid.r2)
    info["exit_robin"] = dict(rs_reading=_sup(dr2 * v1[-1] + k * d3r2 * v1[0] - terms.q4),
                              r2_reading=_sup(dr2 * v1[-1] + k * d3r2 * v1[-1] - terms.q4))
    # 6. final entropy deviation and front displacement
    k = co.a2 / co.a1
    V1rs = V1.values[0]
    V4 = k * V1rs[None] + R4.values
    V7 = front_update(V1rs, R1, co)
    info["terms"] = terms
    info["sources"] = src
    info["m1"] = m1
    proj = lambda a, p: ModalField.from_values(grid, getattr(a, "values", a), p)
    V = tuple(proj(a, p) for a, p in zip((V1, V2, V3, V4, V5, V6), V_PARITY))
    info["projection_defect"] = max(v.defect for v in V)
    return Iterate(V, grid.project(V7, "cc"), J1=J1, Pi=Pi, phi=phi, Vdot=tuple(Vdot),
                   info=info)


@dataclass
class RunReport:
    history: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    residuals: dict = field(default_factory=dict)
    entropy_margin: float = float("nan")
    entropy_jump_bar: float = float("nan")
    trust_violations: int = 0
    wall_seconds: float = 0.0
    summary: dict = field(default_factory=dict)

    @property
    def ratios(self):
        return [h["ratio"] for h in self.history if h["ratio"] is not None]

    def to_dict(self):
        return asdict(self)

    def deterministic(self):
        """Everything except wall-clock data (bit-identical for identical configs)."""
        d = asdict(self)
        d.pop("wall_seconds")
        for h in d["history"]:
            h.pop("seconds")
        return d

    def timing(self):
        per = [h["seconds"] for h in self.history]
        return dict(wall_seconds=self.wall_seconds, per_iteration=per,
                    mean_iteration=float(np.mean(per)) if per else 0.0)


def entropy_margin(it, prob):
    """min over E of S_+ - S_- at the computed front."""
    grid, bg = prob.grid, prob.bg
    Y2, Y3 = np.meshgrid(grid.y2, grid.y3, indexing="ij")
    up = sample_upstream(prob.upstream, bg.rs + it.V7, Y2, Y3, derivative=False)
    return float(np.min(bg.S_plus + it.V[3].values[0] - up.S))


def solve_problem_S(prob, report_residuals=True):
    """Picard iteration of T from zero; returns (Iterate, RunReport)."""
    s = prob.cfg.solver
    t0 = time.perf_counter()
    if prob.epsilon > s.eps0:
        raise TrustRegionError(f"epsilon={prob.epsilon} above eps0={s.eps0}", step="solve")
    rep = RunReport()
    it = Iterate.zero(prob.grid)
    prev, bad = None, 0
    for k in range(1, s.max_iters + 1):
        t1 = time.perf_counter()
        new = apply_T(it, prob)
        du = norm_Xi(new.minus(it), prob.grid)
        nrm = norm_Xi(new, prob.grid)
        ratio = du / prev if prev else None
        ok = nrm <= prob.trust_radius
        if not ok:
            rep.trust_violations += 1
            log.warning("iterate %d: norm %.3g outside trust radius %.3g", k, nrm,
                        prob.trust_radius)
        rep.history.append(dict(iteration=k, update=du, ratio=ratio, norm=nrm, trust_ok=ok,
                                V7_sup=_sup(new.V7), seconds=time.perf_counter() - t1))
        log.info("iter %d  update %.3e  ratio %s", k, du, f"{ratio:.3f}" if ratio else "-")
        it, prev = new, du
        if du <= s.tol:
            rep.converged = True
            break
        # ratios near the rounding floor (a few tol) are not evidence of divergence
        bad = bad + 1 if ratio is not None and ratio >= 1.0 and du > 10 * s.tol else 0
        if bad >= 3:
            raise DivergenceError(f"update ratio >= 1 for three steps (last {ratio:.3g})",
                                  step="solve")
    rep.iterations = len(rep.history)
    rep.entropy_margin = entropy_margin(it, prob)
    rep.entropy_jump_bar = prob.bg.S_plus - prob.bg.S_minus
    if not rep.entropy_margin > 0:
        raise InconsistencyError(f"entropy condition fails (margin {rep.entropy_margin:.3g})",
                                 step="entropy")
    if report_residuals:
        rep.residuals = residual_report(it, prob)
    rep.wall_seconds = time.perf_counter() - t0
    rep.summary = dict(rs=prob.bg.rs, epsilon=prob.epsilon, norm_Xi=norm_Xi(it, prob.grid),
                       V7_mean=float(np.mean(it.V7)), V7_sup=_sup(it.V7),
                       parity_defect=it.parity_defect(prob.grid),
                       exit_robin=dict(it.info.get("exit_robin", {})),
                       grid=[prob.grid.N1, prob.grid.N2, prob.grid.N3])
    return it, rep


def _mhd_rows(st, bar):
    """Residuals of the six cylindrical equations on the curved domain."""
    fr = st.frame
    p = fr.bg.profile(fr.D0.values, "+")
    dev = (st.V[0], st.V[1], st.V[2], st.P - bar.P, st.V[3], st.V[5])
    bgd = (p["dU"], 0.0, 0.0, p["dP"], 0.0, 0.0)
    dr, dt, dz = [], [], []
    for d, b in zip(dev, bgd):
        g1, g2, g3 = fr.grad(d)
        dr.append(g1.values + b)
        dt.append((fr.D0 * g2).values)
        dz.append(g3.values)
    f = tuple(x.values for x in (st.U1, st.U2, st.U3, st.P, st.S, st.kappa))
    return cyl_rows(fr.D0.values, f, dr, dt, dz, st.g)


def residual_report(it, prob):
    """All global residuals of a converged iterate (sup norms)."""
    grid, bg, co = prob.grid, prob.bg, prob.co
    frame = Frame(grid, bg, it.V7)
    st = DownState(frame, it.V)
    bar = background_state(frame)
    out = {}
    # (a) the steady MHD system on the curved domain
    rows = _mhd_rows(st, bar)
    out["mhd"] = max(_sup(r) for r in rows)
    out["mhd_rows"] = [_sup(r) for r in rows]
    # (b) the jump conditions on the computed front
    xi = bg.rs + it.V7
    Y2, Y3 = np.meshgrid(grid.y2, grid.y3, indexing="ij")
    up = sample_upstream(prob.upstream, xi, Y2, Y3, derivative=False)
    down = FlowState(*(x.values[0] for x in (st.U1, st.U2, st.U3, st.P, st.S, st.kappa)))
    d2v, _ = grid.d2(it.V7, "cc")
    d3v, _ = grid.d3(it.V7, "cc")
    rh = rh_residual(up, down, FrontGeometry(xi, d2v, d3v), bg.thermo)
    out["rh"] = rh.max_abs()
    out["rh_rows"] = [_sup(x) for x in rh.as_array()]
    # (c) front slope relations
    tr = front_traces(it.V[:4], it.V7, prob.upstream, bg, grid)
    f, f2, f3, g2, g3, _ = eval_front_functions(tr.up, tr.down, it.V7, bg, co=co)
    V2rs, V3rs = it.V[1].values[0], it.V[2].values[0]
    F = lemma22_residual(it.V7, V2rs, V3rs, g2, g3, grid, co.a0)
    out["F2"], out["F3"] = F[0], F[1]
    out["F"] = max(F[0], F[1])
    # printed variant of the slope remainders (a0 / a1 in place of a0)
    c = co.a0 - co.a0 / co.a1
    out["F_printed_variant"] = max(_sup(F2 + c * V2rs) for F2 in _slope_F(it, g2, g3, grid, co))
    # (d) deformation-curl formulation
    dc = {}
    dc["density"] = _sup((den_row(st) / prob.lin.rc.col("c2bar")).values)
    C = curl_lhs(st, bar)
    J1 = it.J1 if it.J1 is not None else ModalField.zeros(grid, "ss")
    J2, J3 = j23(st, J1)
    for i, (Ck, Jk) in enumerate(zip(C, (J1, J2, J3)), 1):
        dc[f"curl{i}"] = (Ck - Jk).sup()
    for name, v in (("entropy", it.V[3]), ("bernoulli", it.V[4]), ("kappa", it.V[5])):
        dc[name] = advect(st, v).sup()
    mu, H0 = mu_H0(st)
    dc["J1_transport"] = (advect(st, J1) + mu * J1 - H0).sup()
    out["deformation_curl_rows"] = dc
    out["deformation_curl"] = max(dc.values())
    # (e) the auxiliary potential
    out["Pi"] = it.Pi.sup() if it.Pi is not None else 0.0
    # exit condition on total pressure
    Ptot = total_pressure(st).values[-1]
    out["exit"] = _sup(Ptot - bg.total_pressure(grid.r2) - prob.Te)
    out["parity"] = it.parity_defect(grid)
    return out


def _slope_F(it, g2, g3, grid, co):
    d2v, _ = grid.d2(it.V7, "cc")
    return [d2v / grid.rs - co.a0 * it.V[1].values[0] - g2]


def oracle_shift_1d(cfg, Te_value):
    """Shock shift of the 1D background family when the exit total pressure
    moves by epsilon * Te_value (uniform exit perturbation)."""
    bg = build_background(cfg)
    b, geo = cfg.background, cfg.geometry
    Pt = bg.total_pressure(bg.r2) + cfg.solver.epsilon * Te_value
    bg2 = solve_background(inflow_state(cfg), Pt, geo.r1, geo.r2, b.kappa_bar, bg.thermo,
                           total=True, rtol=1e-12)
    return bg2.rs - bg.rs


def run(cfg, bg=None, upstream=None, report_residuals=True):
    """Build the problem and solve it; returns (Problem, Iterate, RunReport)."""
    prob = build_problem(cfg, bg, upstream)
    it, rep = solve_problem_S(prob, report_residuals)
    return prob, it, rep

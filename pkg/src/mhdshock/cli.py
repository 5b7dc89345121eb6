"""Command-line interface: ``mhdshock <command> --config run.toml --out DIR``.

Commands
--------
background  background profiles, coefficient table and positivity report
classify    regime / discontinuity type of states given in a JSON or TOML file
march       upstream solve and raw field dump
solve       Problem S with report and field dump
sweep       exit-pressure or epsilon sweep to CSV
report      re-evaluate the residuals of stored fields
"""
import argparse
import json
import logging
from pathlib import Path
import sys
import time

import numpy as np

from . import io
from .background import coefficients_at, verify_super_alfvenic
from .config import RunConfig, dump_config, load_config
from .downstream import V_PARITY
from .driver import (NAMES, Iterate, build_background, build_problem, inflow_state,
                     residual_report, run)
from .errors import ConfigError, MHDShockError
from .jump import classify_discontinuity
from .spectral import ModalField
from .state import FlowState, ThermoParams, classify_regime, derived_quantities
from .upstream import FIELD_PARITY, ORDER, march_supersonic, upstream_grid, upstream_residual

try:
    import tomllib
except ModuleNotFoundError:        # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("mhdshock")


def _config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "refine", 0):
        cfg = cfg.refined(args.refine)
    kw = {}
    if getattr(args, "max_iters", None) is not None:
        kw["max_iters"] = args.max_iters
    if getattr(args, "tol", None) is not None:
        kw["tol"] = args.tol
    return cfg.with_solver(**kw).validate() if kw else cfg


def _out(args):
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_background(args):
    cfg = _config(args)
    out = _out(args)
    bg = build_background(cfg)
    co = coefficients_at(bg, check=False)
    n = args.samples
    ru = np.linspace(bg.r1, bg.rs, n)
    rd = np.linspace(bg.rs, bg.r2, n)
    cols = {}
    for side, r, tag in (("-", ru, "minus"), ("+", rd, "plus")):
        p = bg.profile(r, side)
        c = {"r": r}
        for k in ("U", "rho", "P", "S", "c2", "M2"):
            c[f"{k}_{tag}"] = p[k]
        c[f"Ptot_{tag}"] = bg.total_pressure(r, side)
        cols[tag] = c
    io.write_csv(out / "upstream.csv", cols["minus"])
    table = co.table(rd)
    io.write_csv(out / "downstream.csv", {**cols["plus"], **table})
    pos = co.positivity()
    ok, margin = verify_super_alfvenic(bg)
    rep = dict(rs=bg.rs, Pe=bg.Pe, S_minus=bg.S_minus, S_plus=bg.S_plus,
               mass_flux_defect=bg.mass_flux_defect(), rh_defect=bg.rh_defect(),
               super_alfvenic=ok, alfven_margin=margin, positivity=pos,
               all_positive=bool(all(v > 0 for v in pos.values())), scalars=co.scalars())
    io.write_json(out / "positivity.json", rep)
    print(f"rs = {bg.rs:.12g}  positivity {'ok' if rep['all_positive'] else 'VIOLATED'}")
    return 0 if rep["all_positive"] else 1


def _read_states(path):
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"state file is neither JSON nor TOML: {e}", None, path) from None
    return data


def _flow(d, path, key):
    try:
        return FlowState(*(float(d[k]) for k in ("U1", "U2", "U3", "P", "S")),
                         float(d.get("kappa", 0.0)))
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"[{key}] needs numeric U1, U2, U3, P, S (kappa optional): {e}",
                          None, path) from None


def cmd_classify(args):
    data = _read_states(args.state)
    thermo = ThermoParams(float(data.get("gamma", 1.4)))
    out = {}
    states = {}
    for key in ("upstream", "downstream", "state"):
        if key in data:
            st = _flow(data[key], args.state, key)
            d = derived_quantities(st, thermo)
            states[key] = st
            out[key] = dict(mach2=float(d.mach2), alfven2=float(d.alfven2),
                            regime=classify_regime(float(d.mach2), float(d.alfven2)).value)
    if "upstream" in states and "downstream" in states:
        n = np.asarray(data.get("normal", [1.0, 0.0, 0.0]), dtype=float)
        n = n / np.linalg.norm(n)
        up = states["upstream"]
        rho = up.rho(thermo)
        un = up.U1 * n[0] + up.U2 * n[1] + up.U3 * n[2]
        kind = classify_discontinuity(up, states["downstream"], rho * un, up.kappa * rho * un,
                                      thermo)
        out["discontinuity"] = kind.value
    if not out:
        raise ConfigError("state file has no [state], [upstream] or [downstream] table",
                          None, args.state)
    text = json.dumps(io.to_jsonable(out), indent=2, sort_keys=True)
    if args.out:
        io.write_json(_out(args) / "classify.json", out)
    print(text)
    return 0


def cmd_march(args):
    cfg = _config(args)
    out = _out(args)
    prob = build_problem(cfg)
    up = prob.upstream
    fields = {name: (up.pert[name], FIELD_PARITY[name]) for name in ORDER}
    io.dump_fields(out / "upstream", fields, up.grid)
    rep = dict(epsilon=cfg.solver.epsilon, deviation_sup=up.deviation_sup(),
               residual=upstream_residual(up), substeps=list(up.substeps),
               r1=prob.bg.r1, rs=prob.bg.rs, r2=prob.bg.r2)
    io.write_json(out / "march.json", rep)
    print(f"upstream deviation sup {rep['deviation_sup']:.3e}  residual {rep['residual']:.3e}")
    return 0


def cmd_solve(args):
    cfg = _config(args)
    out = _out(args)
    prob, it, rep = run(cfg)
    (out / "config.toml").write_text(dump_config(cfg))
    io.dump_fields(out / "fields", it.fields(), prob.grid)
    io.write_json(out / "report.json", rep.deterministic())
    io.write_json(out / "timing.json", rep.timing())
    last = rep.history[-1]["update"]
    print(f"iterations {rep.iterations}  converged {rep.converged}  last update {last:.3e}  "
          f"|V7| {rep.summary['V7_sup']:.3e}")
    return 0 if rep.converged else 1


def cmd_sweep(args):
    cfg = _config(args)
    out = _out(args)
    rows = {k: [] for k in ("param", "value", "rs", "V7_sup", "V7_mean", "iterations",
                            "max_ratio", "converged")}
    if args.param == "Pe":
        from .background import admissible_exit_range
        b, geo = cfg.background, cfg.geometry
        P1, P2 = admissible_exit_range(inflow_state(cfg), geo.r1, geo.r2,
                                       ThermoParams(cfg.gas.gamma), b.kappa_bar, b.Pe_total)
        fr = np.linspace(0.0, 1.0, args.n + 2)[1:-1]
        values = list(P1 + fr * (P2 - P1)) if args.values is None else args.values
        mk = lambda v: _with_background(cfg, Pe=float(v))
    else:
        values = args.values if args.values is not None else list(
            np.linspace(0.0, cfg.solver.eps0, args.n))
        mk = lambda v: cfg.with_solver(epsilon=float(v))
    for v in values:
        c = mk(v)
        prob, it, rep = run(c, report_residuals=False)
        ratios = [r for r in rep.ratios]
        rows["param"].append(args.param)
        rows["value"].append(float(v))
        rows["rs"].append(prob.bg.rs)
        rows["V7_sup"].append(rep.summary["V7_sup"])
        rows["V7_mean"].append(rep.summary["V7_mean"])
        rows["iterations"].append(rep.iterations)
        rows["max_ratio"].append(max(ratios) if ratios else 0.0)
        rows["converged"].append(int(rep.converged))
    io.write_csv(out / f"sweep_{args.param}.csv", rows)
    print(f"{len(values)} runs written to {out / f'sweep_{args.param}.csv'}")
    return 0


def _with_background(cfg, **kw):
    from dataclasses import replace
    return replace(cfg, background=replace(cfg.background, **kw))


def cmd_report(args):
    src = Path(args.fields)
    cfg_path = Path(args.config) if args.config else src.parent / "config.toml"
    cfg = load_config(cfg_path)
    fields, gmeta = io.load_fields(src)
    s = cfg.solver
    if (gmeta["N1"], gmeta["N2"], gmeta["N3"]) != (s.N1, s.N2, s.N3):
        raise ConfigError("stored fields do not match the grid of the config", None, cfg_path)
    prob = build_problem(cfg)
    g = prob.grid
    V = tuple(ModalField(g, p, fields[n][0]) for n, p in zip(NAMES, V_PARITY))
    it = Iterate(V, fields["V7"][0])
    if "J1" in fields:
        it.J1 = ModalField(g, "ss", fields["J1"][0])
    if "Pi" in fields:
        it.Pi = ModalField(g, "ss", fields["Pi"][0])
    res = residual_report(it, prob)
    out = _out(args)
    io.write_json(out / "residuals.json", res)
    print(" ".join(f"{k}={res[k]:.3e}" for k in ("mhd", "rh", "F", "deformation_curl", "Pi")))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="mhdshock", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, solver=True):
        sp.add_argument("--config", help="TOML run configuration")
        sp.add_argument("--out", default="out", help="output directory")
        if solver:
            sp.add_argument("--refine", type=int, default=0,
                            help="multiply all resolutions by 2**k")
            sp.add_argument("--max-iters", type=int, dest="max_iters")
            sp.add_argument("--tol", type=float)
        return sp

    common(sub.add_parser("background", help="background profiles and coefficients"),
           solver=False).add_argument("--samples", type=int, default=101)
    c = sub.add_parser("classify", help="regime / discontinuity queries")
    c.add_argument("state", help="JSON or TOML file with [state] or [upstream]/[downstream]")
    c.add_argument("--out", default=None)
    common(sub.add_parser("march", help="upstream solve and field dump"))
    common(sub.add_parser("solve", help="solve Problem S"))
    sw = common(sub.add_parser("sweep", help="exit-pressure or epsilon sweep"))
    sw.add_argument("--param", choices=("Pe", "epsilon"), default="Pe")
    sw.add_argument("--n", type=int, default=5)
    sw.add_argument("--values", type=float, nargs="+")
    r = common(sub.add_parser("report", help="residuals of stored fields"), solver=False)
    r.add_argument("--fields", default="out/fields", help="directory written by solve")
    return p


COMMANDS = dict(background=cmd_background, classify=cmd_classify, march=cmd_march,
                solve=cmd_solve, sweep=cmd_sweep, report=cmd_report)


def run_cli(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except MHDShockError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

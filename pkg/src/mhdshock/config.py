"""Run configuration: dataclasses and a TOML loader.

Sections: [geometry], [gas], [background], [inlet.modes], [exit.Te_modes]
and [solver]. Mode entries are inline tables
``{theta = "cos", x3 = "cos", k2 = 1, k3 = 0, amp = 1.0}`` or five-element
arrays ``["cos", "cos", 1, 0, 1.0]``.
"""
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
import re

try:
    import tomllib
except ModuleNotFoundError:        # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .upstream import INLET_KEYS, FIELD_PARITY, InletData, Mode, mode_parity


@dataclass
class GeometryConfig:
    r1: float = 1.0
    r2: float = 1.6
    theta0: float = 0.4


@dataclass
class GasConfig:
    gamma: float = 1.4


@dataclass
class BackgroundConfig:
    """Inflow state at r1 and the exit condition.

    Pe is the exit pressure (total pressure with Pe_total); when it is not
    given, Pe_frac places it inside the admissible range (0 and 1 are the
    ends).
    """
    U1: float = 2.0
    P: float = 1.0 / 1.4
    rho: float = 1.0
    kappa_bar: float = 0.3
    Pe: float = None
    Pe_frac: float = 0.5
    Pe_total: bool = False


@dataclass
class SolverConfig:
    epsilon: float = 0.0
    N1: int = 33
    N2: int = 8
    N3: int = 8
    tol: float = 1e-10
    max_iters: int = 30
    eps0: float = 1e-2
    trust_safety: float = 100.0
    r4_variant: str = "consistent"
    divcurl_rtol: float = None
    march_tol: float = 1e-8


@dataclass
class RunConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    gas: GasConfig = field(default_factory=GasConfig)
    background: BackgroundConfig = field(default_factory=BackgroundConfig)
    inlet_modes: dict = field(default_factory=dict)     # inlet key -> [Mode]
    Te_modes: list = field(default_factory=list)        # even-even modes of T_e
    solver: SolverConfig = field(default_factory=SolverConfig)

    def inlet(self):
        return InletData(self.solver.epsilon, self.inlet_modes)

    def refined(self, k):
        """Copy with every resolution multiplied by 2**k."""
        f = 2 ** k
        s = self.solver
        return replace(self, solver=replace(s, N1=(s.N1 - 1) * f + 1, N2=s.N2 * f, N3=s.N3 * f))

    def with_solver(self, **kw):
        return replace(self, solver=replace(self.solver, **kw))

    def validate(self):
        g, s = self.geometry, self.solver
        if not 0 < g.r1 < g.r2:
            raise _bad("need 0 < r1 < r2", "geometry", "r2")
        if not 0 < g.theta0 < 3.14159:
            raise _bad("theta0 must lie in (0, pi)", "geometry", "theta0")
        if self.gas.gamma <= 1:
            raise _bad("gamma must exceed 1", "gas", "gamma")
        if s.epsilon < 0:
            raise _bad("epsilon must be non-negative", "solver", "epsilon")
        if s.N1 < 5 or s.N2 < 2 or s.N3 < 2:
            raise _bad("grid too small (N1 >= 5, N2, N3 >= 2)", "solver", "N1")
        if s.r4_variant not in ("consistent", "printed"):
            raise _bad(f"unknown r4_variant {s.r4_variant!r}", "solver", "r4_variant")
        for key, modes in self.inlet_modes.items():
            if key not in INLET_KEYS:
                raise _bad(f"unknown inlet field {key!r}", "inlet.modes", key)
            want = FIELD_PARITY[INLET_KEYS[key]]
            for m in modes:
                _check_mode(m, want, key, "inlet.modes")
        for m in self.Te_modes:
            _check_mode(m, "cc", "modes", "exit.Te_modes")
        return self

    def to_dict(self):
        d = asdict(self)
        d["inlet_modes"] = {k: [asdict(m) for m in v] for k, v in self.inlet_modes.items()}
        d["Te_modes"] = [asdict(m) for m in self.Te_modes]
        return d


def _bad(msg, section, key):
    e = ConfigError(f"[{section}] {msg}")
    e.section, e.key = section, key
    return e


def _check_mode(m, want, key, section):
    if m.theta not in ("cos", "sin") or m.x3 not in ("cos", "sin"):
        raise _bad(f"{key}: mode families must be 'cos' or 'sin'", section, key)
    if mode_parity(m) != want:
        raise _bad(f"{key}: mode ({m.theta}, {m.x3}) violates parity class {want}", section, key)
    if m.k2 < 0 or m.k3 < 0 or (m.theta == "sin" and m.k2 < 1) or (m.x3 == "sin" and m.k3 < 1):
        raise _bad(f"{key}: invalid wavenumbers ({m.k2}, {m.k3})", section, key)


def _mode(entry, default=("cos", "cos")):
    if isinstance(entry, dict):
        extra = set(entry) - {"theta", "x3", "k2", "k3", "amp"}
        if extra:
            raise ValueError(f"unknown mode keys {sorted(extra)}")
        return Mode(entry.get("theta", default[0]), entry.get("x3", default[1]),
                    int(entry.get("k2", 0)), int(entry.get("k3", 0)), float(entry.get("amp", 1.0)))
    if isinstance(entry, (list, tuple)) and len(entry) == 5:
        return Mode(str(entry[0]), str(entry[1]), int(entry[2]), int(entry[3]), float(entry[4]))
    raise ValueError("a mode is an inline table or a five-element array")


def _line_of(text, section, key=None):
    """1-based line of `key` inside [section] (or of the section header)."""
    lines = text.splitlines()
    cur = None
    head = None
    for i, ln in enumerate(lines, 1):
        s = ln.strip()
        m = re.match(r"^\[+\s*([^\]]+?)\s*\]+", s)
        if m:
            cur = m.group(1)
            if cur == section:
                head = i
            continue
        if cur == section and key is not None and re.match(rf"^{re.escape(key)}\s*=", s):
            return i
    return head


_SECTIONS = {"geometry": GeometryConfig, "gas": GasConfig, "background": BackgroundConfig,
             "solver": SolverConfig}


def _fill(cls, table, text, section, path):
    names = {f.name: f for f in fields(cls)}
    kw = {}
    for k, v in table.items():
        if k not in names:
            raise ConfigError(f"unknown key {k!r} in [{section}]", _line_of(text, section, k), path)
        want = names[k].type
        default = getattr(cls(), k)
        try:
            if isinstance(default, bool) or want in ("bool", bool):
                if not isinstance(v, bool):
                    raise TypeError("expected true/false")
            elif isinstance(default, int) and not isinstance(default, bool):
                if isinstance(v, bool) or not isinstance(v, int):
                    raise TypeError("expected an integer")
            elif isinstance(default, str):
                if not isinstance(v, str):
                    raise TypeError("expected a string")
            elif isinstance(default, float) or default is None:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise TypeError("expected a number")
                v = float(v)
        except TypeError as e:
            raise ConfigError(f"[{section}] {k}: {e}", _line_of(text, section, k), path) from None
        kw[k] = v
    return cls(**kw)


def parse_config(text, path=None):
    """RunConfig from TOML text; errors carry the offending line."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        m = re.search(r"line (\d+)", str(e))
        raise ConfigError(f"TOML syntax: {e}", int(m.group(1)) if m else None, path) from None
    cfg = RunConfig()
    for name in data:
        if name not in _SECTIONS and name not in ("inlet", "exit"):
            raise ConfigError(f"unknown section [{name}]", _line_of(text, name), path)
    for name, cls in _SECTIONS.items():
        if name in data:
            setattr(cfg, name, _fill(cls, data[name], text, name, path))
    inlet = data.get("inlet", {}).get("modes", {})
    modes = {}
    for key, entries in inlet.items():
        try:
            modes[key] = [_mode(e) for e in entries]
        except (ValueError, TypeError) as e:
            raise ConfigError(f"inlet mode {key}: {e}", _line_of(text, "inlet.modes", key),
                              path) from None
    cfg.inlet_modes = modes
    te = data.get("exit", {}).get("Te_modes", {})
    try:
        cfg.Te_modes = [_mode(e) for e in te.get("modes", [])]
    except (ValueError, TypeError) as e:
        raise ConfigError(f"Te mode: {e}", _line_of(text, "exit.Te_modes", "modes"), path) from None
    try:
        cfg.validate()
    except ConfigError as e:
        sec, key = getattr(e, "section", None), getattr(e, "key", None)
        line = _line_of(text, sec, key) if sec else None
        raise ConfigError(str(e), line, path) from None
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}", None, path) from None
    return parse_config(text, path)


def dump_config(cfg):
    """TOML text for a RunConfig (inverse of parse_config)."""
    out = []

    def val(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, str):
            return f'"{v}"'
        return repr(v)

    for name in _SECTIONS:
        out.append(f"[{name}]")
        for k, v in asdict(getattr(cfg, name)).items():
            if v is not None:
                out.append(f"{k} = {val(v)}")
        out.append("")
    mode = lambda m: f'["{m.theta}", "{m.x3}", {m.k2}, {m.k3}, {m.amp!r}]'
    out.append("[inlet.modes]")
    for k, ms in cfg.inlet_modes.items():
        out.append(f"{k} = [{', '.join(mode(m) for m in ms)}]")
    out.append("")
    out.append("[exit.Te_modes]")
    out.append(f"modes = [{', '.join(mode(m) for m in cfg.Te_modes)}]")
    return "\n".join(out) + "\n"

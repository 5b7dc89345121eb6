"""Output formats: CSV tables, raw field dumps with JSON sidecars, JSON reports.

Field dumps are little-endian float64 arrays in C order, one ``.bin`` per
field, each with a ``.json`` sidecar holding shape, parity and the grid.
"""
import csv
import dataclasses
import enum
import json
from pathlib import Path

import numpy as np

DTYPE = "<f8"


def write_csv(path, columns):
    """Write a dict of equal-length columns (name -> sequence) as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    rows = zip(*(np.asarray(columns[n]).ravel() for n in names))
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in rows:
            w.writerow([_cell(x) for x in row])
    return path


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def read_csv(path):
    """Columns of a CSV written by write_csv (numeric where possible)."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(head):
        col = [r[j] for r in body]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = col
    return out


def grid_meta(grid):
    return dict(N1=grid.N1, N2=grid.N2, N3=grid.N3, theta0=grid.theta0, rs=grid.rs, r2=grid.r2)


def dump_field(directory, name, values, parity, grid, extra=None):
    """Write name.bin (raw little-endian float64) and name.json."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    a = np.ascontiguousarray(values, dtype=DTYPE)
    (d / f"{name}.bin").write_bytes(a.tobytes(order="C"))
    meta = dict(name=name, dtype=DTYPE, shape=list(a.shape), parity=parity,
                grid=grid_meta(grid), modes=[grid.N2 + 1, grid.N3 + 1])
    if extra:
        meta.update(extra)
    (d / f"{name}.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return d / f"{name}.bin"


def load_field(directory, name):
    """(values, metadata) of a dumped field."""
    d = Path(directory)
    meta = json.loads((d / f"{name}.json").read_text())
    a = np.frombuffer((d / f"{name}.bin").read_bytes(), dtype=meta["dtype"])
    return a.reshape(meta["shape"]).astype(float), meta


def dump_fields(directory, fields, grid):
    """fields: name -> (values, parity). Also writes an index file."""
    for name, (values, parity) in fields.items():
        dump_field(directory, name, values, parity, grid)
    idx = dict(fields=sorted(fields), grid=grid_meta(grid))
    Path(directory, "fields.json").write_text(json.dumps(idx, indent=2, sort_keys=True))


def load_fields(directory):
    idx = json.loads(Path(directory, "fields.json").read_text())
    out = {}
    for name in idx["fields"]:
        values, meta = load_field(directory, name)
        out[name] = (values, meta["parity"])
    return out, idx["grid"]


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays, enums and dataclasses."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True))
    return path

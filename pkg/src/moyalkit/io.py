"""CSV/JSON emission with atomic writes.

Fields: header ``x,p,value`` (real) or ``x,p,re,im``, rows over x then p.
Kernels: ``x1,x2,re,im``.  Wavefunctions: ``x,re,im``.  Floats use 17
significant digits so values round-trip exactly.
"""
from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__

FLOAT_FMT = "%.17g"


def atomic_write_text(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, columns) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack(columns), fmt=FLOAT_FMT, delimiter=",",
               header=",".join(header), comments="")
    return buf.getvalue()


def field_csv(F) -> str:
    g = F.grid
    X, P = g.mesh()
    vals = np.asarray(F.values)
    if np.iscomplexobj(vals):
        return _csv(["x", "p", "re", "im"], [X.ravel(), P.ravel(), vals.real.ravel(), vals.imag.ravel()])
    return _csv(["x", "p", "value"], [X.ravel(), P.ravel(), vals.ravel()])


def kernel_csv(K) -> str:
    g = K.grid
    X1, X2 = np.meshgrid(g.x, g.x, indexing="ij")
    v = np.asarray(K.values)
    return _csv(["x1", "x2", "re", "im"], [X1.ravel(), X2.ravel(), v.real.ravel(), v.imag.ravel()])


def wavefunction_csv(psi) -> str:
    v = psi.values
    return _csv(["x", "re", "im"], [psi.grid.x, v.real, v.imag])


def columns_csv(header, columns) -> str:
    return _csv(list(header), [np.asarray(c, dtype=float) for c in columns])


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def sidecar(grid, *, state=None, time=None, config=None, extra=None) -> dict:
    out = {
        "tool": {"name": "moyalkit", "version": __version__},
        "grid": grid.as_dict(),
    }
    if state is not None:
        out["state"] = state
    if time is not None:
        out["time"] = float(time)
    if config is not None:
        out["config"] = config
    if extra:
        out.update(extra)
    return out


def write_with_sidecar(path, csv_text: str, meta: dict):
    """Write ``path`` and ``path`` with its suffix replaced by ``.json``."""
    path = Path(path)
    atomic_write_text(path, csv_text)
    side = path.with_suffix(".json")
    atomic_write_text(side, to_json(meta))
    return path, side


def read_field_csv(path, grid):
    """Load a field CSV written by :func:`field_csv` back into an n x n array."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = grid.n
    if data.shape[1] == 3:
        return data[:, 2].reshape(n, n)
    return (data[:, 2] + 1j * data[:, 3]).reshape(n, n)


def read_table(path) -> np.ndarray:
    """One-column (or last-column) numeric table, header optional."""
    with open(path) as fh:
        first = fh.readline()
    skip = 0 if _is_numeric_row(first) else 1
    data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    return data[:, -1]


def _is_numeric_row(line: str) -> bool:
    try:
        [float(t) for t in line.strip().split(",") if t]
        return bool(line.strip())
    except ValueError:
        return False

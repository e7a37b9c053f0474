"""Deterministic CSV/JSON serialization and atomic file writes."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    """Shortest round-trip repr; identical bytes for identical floats."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([x if isinstance(x, str) else fmt(x) for x in r])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def json_text(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def atomic_write(path, data) -> Path:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# --- artifact tables ------------------------------------------------------

@dataclass(frozen=True)
class Table:
    header: tuple
    rows: object  # iterable of row tuples; consumed once

    def render(self, fmt_name: str = "csv") -> str:
        if fmt_name == "csv":
            return csv_text(self.header, self.rows)
        if fmt_name == "json":
            return json_text([dict(zip(self.header, r)) for r in self.rows])
        raise ValueError(f"unknown format {fmt_name!r}")


def space_grid_table(grid) -> Table:
    return Table(("index", "node", "weight"),
                 zip(range(grid.n_x), grid.nodes, grid.pairing_weights))


def spectral_grid_table(measure) -> Table:
    g = measure.grid
    return Table(("index", "node", "weight", "density"),
                 zip(range(g.n_k), g.nodes, g.weights, measure.density))


def eigen_table(eig, k_limit: float | None = None) -> Table:
    k = eig.grid_k.nodes
    cols = np.arange(len(k)) if k_limit is None else np.nonzero(k <= k_limit)[0]
    x = eig.grid_x.nodes
    rows = ((x[i], k[j], eig.psi[i, j], eig.psi_x[i, j]) for j in cols for i in range(len(x)))
    return Table(("x", "k", "psi", "psi_x"), rows)


def transform_table(F) -> Table:
    vals = np.asarray(F.values)
    if np.iscomplexobj(vals):
        return Table(("k", "F_real", "F_imag"), zip(F.grid.nodes, vals.real, vals.imag))
    return Table(("k", "F_real"), zip(F.grid.nodes, vals))


def extension_table(tau, log_abs) -> Table:
    return Table(("tau", "log_abs_F"), zip(tau, log_abs))


def kernel_table(K) -> Table:
    x = K.grid.nodes
    v = K.values
    rows = ((x[i], x[j], v[i, j]) for i in range(len(x)) for j in range(i + 1))
    return Table(("x", "t", "value"), rows)


def coefficients_table(coeffs) -> Table:
    return Table(("z_real", "z_imag", "j", "a_real", "a_imag"), coeffs.rows())


def operator_table(op) -> Table:
    return Table(tuple(f"c{j}" for j in range(op.grid.n_x)), (tuple(r) for r in op.matrix))

"""File formats: density-matrix JSON, quadrature CSV + metadata sidecar.

JSON artifacts are written through a canonical emitter (sorted keys,
floats as 17-significant-digit scientific notation) so identical inputs
produce byte-identical files.
"""

import json
from pathlib import Path

import numpy as np

from .exceptions import DatasetFormatError
from .homodyne import QuadratureDataset
from .validation import check_density_matrix

CSV_HEADER = "phase_rad,value"


def _format_scalar(value):
    if isinstance(value, bool | np.bool_):
        return "true" if value else "false"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        value = float(value)
        if not np.isfinite(value):
            raise ValueError("non-finite float cannot be serialized to JSON")
        return format(value, ".16e")
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    raise TypeError(f"cannot serialize {type(value).__name__} to JSON")


def dumps_canonical(obj, indent=0):
    """Deterministic JSON: sorted object keys, fixed float formatting."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f"{inner}{json.dumps(str(k))}: {dumps_canonical(obj[k], indent + 1)}"
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, list | tuple):
        if not obj:
            return "[]"
        parts = [f"{inner}{dumps_canonical(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    return _format_scalar(obj)


def write_json(path, obj):
    Path(path).write_text(dumps_canonical(obj) + "\n")


def density_matrix_to_dict(rho):
    """Schema: ``{"dim": N, "re": NxN, "im": NxN}``, row-major entries."""
    rho = np.asarray(rho, dtype=np.complex128)
    return {"dim": int(rho.shape[0]), "re": rho.real.tolist(), "im": rho.imag.tolist()}


def density_matrix_from_dict(payload, validate=True):
    try:
        dim = int(payload["dim"])
        rho = np.asarray(payload["re"], dtype=float) + 1j * np.asarray(payload["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetFormatError(f"invalid density-matrix payload: {exc}") from exc
    if rho.shape != (dim, dim):
        raise DatasetFormatError(
            f"density-matrix entries have shape {rho.shape}, expected ({dim}, {dim})")
    return check_density_matrix(rho) if validate else rho


def save_density_matrix(path, rho, extra=None):
    """Write a state as JSON; ``extra`` merges additional top-level blocks."""
    payload = density_matrix_to_dict(rho)
    if extra:
        for key in extra:
            if key in payload:
                raise ValueError(f"extra block {key!r} collides with the state schema")
        payload.update(extra)
    write_json(path, payload)


def load_density_matrix(path, validate=True):
    payload = json.loads(Path(path).read_text())
    return density_matrix_from_dict(payload, validate=validate)


def save_wigner_csv(path, grid):
    """Flatten a Wigner grid to ``x,p,w`` triples, row-major in x then p."""
    xs = np.repeat(grid.x_axis, grid.p_axis.size)
    ps = np.tile(grid.p_axis, grid.x_axis.size)
    with open(path, "w") as fh:
        fh.write("x,p,w\n")
        np.savetxt(fh, np.column_stack([xs, ps, grid.values.ravel()]),
                   fmt="%.17g", delimiter=",")


def _sidecar_path(path):
    return Path(path).with_suffix(".meta.json")


def save_dataset(path, dataset):
    """CSV with the exact ``phase_rad,value`` header plus a JSON sidecar."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        np.savetxt(fh, np.column_stack([dataset.phases, dataset.values]),
                   fmt="%.17g", delimiter=",")
    write_json(_sidecar_path(path), dataset.meta)


def _locate_bad_line(path):
    with open(path) as fh:
        fh.readline()
        for lineno, line in enumerate(fh, start=2):
            text = line.strip()
            if not text:
                return lineno
            parts = text.split(",")
            if len(parts) != 2:
                return lineno
            try:
                float(parts[0])
                float(parts[1])
            except ValueError:
                return lineno
    return None


def load_dataset(path):
    """Read a quadrature CSV; rejects files without the exact header."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip()
    if header != CSV_HEADER:
        raise DatasetFormatError(
            f"{path}: line 1: expected header {CSV_HEADER!r}, got {header!r}")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        lineno = _locate_bad_line(path)
        where = f"line {lineno}" if lineno is not None else "body"
        raise DatasetFormatError(f"{path}: {where}: malformed record") from exc
    if data.size == 0:
        raise DatasetFormatError(f"{path}: line 2: no records")
    if data.shape[1] != 2:
        raise DatasetFormatError(f"{path}: expected 2 columns, got {data.shape[1]}")
    sidecar = _sidecar_path(path)
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else None
    if meta is None:
        return QuadratureDataset(data[:, 0], data[:, 1])
    return QuadratureDataset(data[:, 0], data[:, 1], meta)

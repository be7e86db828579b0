"""Readers for the solver's documented output formats.

The plotting package is standalone: it consumes only the artifact files
(scalars.csv, ex_line.bin, config.echo.txt, overlay.json) and never
imports the solver.
"""

import json
import os
import struct

import numpy as np

GRID_MAGIC = b"LVMGRID1"

SCALAR_COLUMNS = (
    "time",
    "H_total",
    "H_particles",
    "H_E",
    "H_B",
    "rel_energy_err",
    "div_b_inf",
)


def read_scalars(path):
    """scalars.csv -> dict of named float arrays. Validates the header."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.split(",") for line in fh if line.strip()]
    missing = [c for c in ("time", "H_E", "H_total") if c not in header]
    if missing:
        raise ValueError(f"{path}: missing required columns {missing}")
    data = np.array([[float(v) for v in row] for row in rows])
    if data.size == 0:
        raise ValueError(f"{path}: no data rows")
    return {name: data[:, i] for i, name in enumerate(header)}


def read_ex_line(path):
    """ex_line.bin -> (times, xs, values) with values shaped (n_t, n_x)."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != GRID_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {GRID_MAGIC!r}")
        n_t, n_x = struct.unpack("<QQ", fh.read(16))
        dt_save, dx = struct.unpack("<dd", fh.read(16))
        payload = fh.read(n_t * n_x * 8)
    if len(payload) != n_t * n_x * 8:
        raise ValueError(f"{path}: truncated payload")
    values = np.frombuffer(payload, dtype="<f8").reshape(n_t, n_x)
    return np.arange(n_t) * dt_save, np.arange(n_x) * dx, values.astype(float)


def read_run_frequencies(input_dir):
    """Plasma and cyclotron frequency from the echoed run config."""
    path = os.path.join(input_dir, "config.echo.txt")
    section = None
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                section = line.strip("[]")
                continue
            key, _, val = line.partition("=")
            values[(section, key.strip())] = val.strip()
    alpha2 = float(values[("phys", "alpha2")])
    eps = float(values[("phys", "eps")])
    v_th = float(values[("phys", "v_th")])
    n0 = float(values[("background", "n0")])
    b0 = np.array([float(x) for x in values[("background", "b0")].split()])
    omega_p = np.sqrt(alpha2 * n0) / abs(eps)
    omega_c = np.linalg.norm(b0) / abs(eps)
    return {"omega_p": omega_p, "omega_c": omega_c, "v_th": v_th}


def read_overlay_sidecar(input_dir):
    path = os.path.join(input_dir, "overlay.json")
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        return json.load(fh)

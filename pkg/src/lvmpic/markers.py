"""Marker sampling, dynamical weights and the Maxwellian background.

The importance density is uniform in the logical coordinates and the
background Maxwellian in velocity. Weights carry the perturbation along
each characteristic: w_p(t) * s0_p estimates the perturbation value at
the marker, with s0_p frozen at sampling time.
"""

import struct
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from . import geometry
from .errors import InvalidMarkerError

SNAPSHOT_MAGIC = b"LVMPIC01"


@dataclass(frozen=True)
class PhysParams:
    """Dimensionless physics scales.

    alpha2 is the squared plasma-to-cyclotron frequency ratio, eps the
    signed time-scale parameter (carries the charge sign), v_th the
    thermal speed in speed-of-light units.
    """

    alpha2: float = 1.0
    eps: float = -1.0
    v_th: float = 1.0

    def __post_init__(self):
        if self.v_th <= 0.0:
            raise ValueError("v_th must be positive")
        if self.alpha2 <= 0.0:
            raise ValueError("alpha2 must be positive")
        if self.eps == 0.0:
            raise ValueError("eps must be non-zero")


@dataclass(frozen=True)
class BackgroundSpec:
    """Constant-density equilibrium background.

    For constant n0 the consistency field E0 = v_th^2 eps grad(ln n0)
    vanishes identically; B0 is a constant Cartesian vector.
    """

    n0: float = 1.0
    b0: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.n0 <= 0.0:
            raise ValueError("n0 must be positive")
        object.__setattr__(self, "b0", tuple(float(b) for b in self.b0))


@dataclass
class MarkerBatch:
    """Per-marker state arrays. s0 is frozen after sampling."""

    eta: np.ndarray  # (N, 3) logical positions in [0, 1)
    v: np.ndarray    # (N, 3) Cartesian velocities
    w: np.ndarray    # (N,)   dynamical weights
    s0: np.ndarray   # (N,)   frozen sampling-density values
    f0: np.ndarray   # (N,)   cached background values

    @property
    def count(self):
        return self.eta.shape[0]


def maxwellian(v, v_th):
    """Isotropic Maxwellian with per-component variance v_th^2."""
    v = np.asarray(v, dtype=float)
    vsq = (v * v).sum(axis=-1)
    return (2.0 * np.pi * v_th**2) ** -1.5 * np.exp(-0.5 * vsq / v_th**2)


def eval_f0(phys, background, x, v):
    """Background distribution n0 * Maxwellian(v)."""
    return background.n0 * maxwellian(v, phys.v_th)


def sample_markers(n_markers, mapping, phys, seed, scheme="pseudo_random"):
    """Draw a reproducible batch from the importance density.

    Positions are uniform on the logical cube and velocities normal with
    variance v_th^2 per component. ``pseudo_random`` draws i.i.d. samples
    from a counter-based Philox stream (Box-Muller velocities);
    ``sobol`` uses a scrambled low-discrepancy sequence with
    inverse-transform velocities, which lowers the mode noise of the
    loading by more than an order of magnitude at desk-scale marker
    counts. Both are bit-exact for a given seed. The frozen density is
    s0 = Maxwellian(v) / sqrt(g)(eta), which equals Maxwellian(v) / Vol
    on constant-Jacobian mappings.
    """
    if n_markers <= 0:
        raise ValueError("n_markers must be positive")
    if scheme == "pseudo_random":
        rng = np.random.Generator(np.random.Philox(seed))
        u = rng.random((n_markers, 7))
        eta = u[:, 0:3].copy()
        r1 = np.sqrt(-2.0 * np.log(1.0 - u[:, 3]))
        r2 = np.sqrt(-2.0 * np.log(1.0 - u[:, 5]))
        v = np.empty((n_markers, 3))
        v[:, 0] = r1 * np.cos(2.0 * np.pi * u[:, 4])
        v[:, 1] = r1 * np.sin(2.0 * np.pi * u[:, 4])
        v[:, 2] = r2 * np.cos(2.0 * np.pi * u[:, 6])
        v *= phys.v_th
    elif scheme == "sobol":
        engine = qmc.Sobol(d=6, scramble=True, seed=seed)
        with warnings.catch_warnings():
            # balance warning for non-power-of-two counts is expected
            warnings.simplefilter("ignore", UserWarning)
            u = engine.random(n_markers)
        eta = u[:, 0:3].copy()
        v = phys.v_th * ndtri(np.clip(u[:, 3:6], 1e-16, 1.0 - 1e-16))
    else:
        raise ValueError(f"unknown sampling scheme {scheme!r}")
    s0 = maxwellian(v, phys.v_th) / geometry.sqrt_g(mapping, eta)
    f0 = maxwellian(v, phys.v_th)
    return MarkerBatch(eta=eta, v=v, w=np.zeros(n_markers), s0=s0, f0=f0)


def init_weights(batch, f1_init, mapping):
    """Set w_p = f1(x_p, v_p) / s0_p for an analytic initial perturbation."""
    x = geometry.map_positions(mapping, batch.eta)
    batch.w = np.asarray(f1_init(x, batch.v), dtype=float) / batch.s0
    return batch


def refresh_f0(batch, phys, background):
    """Recompute the cached background values after a velocity change."""
    batch.f0 = eval_f0(phys, background, None, batch.v)
    return batch


def require_valid(batch):
    if np.any(batch.s0 <= 0.0) or np.any(batch.f0 <= 0.0):
        raise InvalidMarkerError("marker with non-positive s0 or f0")


def save_markers(batch, path):
    """Write the documented flat binary snapshot (LVMPIC01 format)."""
    rec = np.empty((batch.count, 8))
    rec[:, 0:3] = batch.eta
    rec[:, 3:6] = batch.v
    rec[:, 6] = batch.w
    rec[:, 7] = batch.s0
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<Q", batch.count))
        fh.write(rec.astype("<f8").tobytes())


def load_markers(path, phys, background):
    """Read a snapshot and rebuild the cached background values."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"bad marker snapshot magic {magic!r}")
        (count,) = struct.unpack("<Q", fh.read(8))
        rec = np.frombuffer(fh.read(count * 8 * 8), dtype="<f8").reshape(count, 8)
    batch = MarkerBatch(
        eta=rec[:, 0:3].astype(float),
        v=rec[:, 3:6].astype(float),
        w=rec[:, 6].astype(float),
        s0=rec[:, 7].astype(float),
        f0=np.empty(count),
    )
    refresh_f0(batch, phys, background)
    return batch

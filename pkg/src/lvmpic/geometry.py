"""Mappings from the logical unit cube to the physical domain.

Two diffeomorphisms are supported: an affine cuboid stretch and the
Colella distortion that mixes the first two coordinates with a
sin(2*pi*eta1)*sin(2*pi*eta2) term while leaving the third affine.
All derived metric quantities (Jacobian, inverse, metric matrix,
Jacobian determinant) are evaluated analytically.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularMappingError

_TWO_PI = 2.0 * np.pi

# Determinants at or below this are treated as singular.
DET_TOL = 1e-12


@dataclass(frozen=True)
class MappingSpec:
    """Mapping kind plus geometric parameters.

    kind is "cuboid" or "colella"; lengths are the physical extents of
    the image box; alpha_c is the Colella distortion amplitude (ignored
    for cuboid). Positivity of the Jacobian determinant is checked on a
    32^3 sample grid at construction.
    """

    kind: str
    lengths: tuple = (1.0, 1.0, 1.0)
    alpha_c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("cuboid", "colella"):
            raise ValueError(f"unknown mapping kind {self.kind!r}")
        lengths = tuple(float(l) for l in self.lengths)
        if len(lengths) != 3 or any(l <= 0.0 for l in lengths):
            raise ValueError("lengths must be three positive reals")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "alpha_c", float(self.alpha_c))
        if self.kind == "cuboid" and self.alpha_c != 0.0:
            raise ValueError("alpha_c must be 0 for the cuboid mapping")
        self._validate_positivity()

    def _validate_positivity(self):
        grid = (np.arange(32) + 0.5) / 32.0
        e1, e2, e3 = np.meshgrid(grid, grid, grid, indexing="ij")
        etas = np.stack([e1.ravel(), e2.ravel(), e3.ravel()], axis=1)
        dets = sqrt_g(self, etas)
        if np.min(dets) <= DET_TOL:
            raise SingularMappingError(
                f"Jacobian determinant not positive on sample grid "
                f"(min {np.min(dets):.3e}); for colella require "
                f"|alpha_c| < 1/(2*pi)"
            )

    @property
    def is_affine(self):
        return self.kind == "cuboid" or self.alpha_c == 0.0

    @property
    def volume(self):
        """Physical volume = integral of sqrt(g) over the unit cube.

        The Colella distortion integrates to zero, so both mappings give
        the product of the lengths.
        """
        lx, ly, lz = self.lengths
        return lx * ly * lz


@dataclass(frozen=True)
class MappingBundle:
    """All metric quantities of the mapping at one logical point."""

    x: np.ndarray
    DL: np.ndarray
    DL_inv: np.ndarray
    G: np.ndarray
    G_inv: np.ndarray
    sqrt_g: float


def map_positions(spec, etas):
    """Physical points x = L(eta) for an (N, 3) array of logical points."""
    etas = np.asarray(etas, dtype=float)
    lx, ly, lz = spec.lengths
    x = np.empty_like(etas)
    if spec.is_affine:
        x[..., 0] = lx * etas[..., 0]
        x[..., 1] = ly * etas[..., 1]
        x[..., 2] = lz * etas[..., 2]
        return x
    a = spec.alpha_c
    bump = a * np.sin(_TWO_PI * etas[..., 0]) * np.sin(_TWO_PI * etas[..., 1])
    x[..., 0] = lx * (etas[..., 0] + bump)
    x[..., 1] = ly * (etas[..., 1] + bump)
    x[..., 2] = lz * etas[..., 2]
    return x


def jacobians(spec, etas):
    """Jacobian matrices DL(eta), shape (N, 3, 3)."""
    etas = np.asarray(etas, dtype=float)
    n = etas.shape[:-1]
    lx, ly, lz = spec.lengths
    dl = np.zeros(n + (3, 3))
    if spec.is_affine:
        dl[..., 0, 0] = lx
        dl[..., 1, 1] = ly
        dl[..., 2, 2] = lz
        return dl
    a = spec.alpha_c
    s1 = np.sin(_TWO_PI * etas[..., 0])
    c1 = np.cos(_TWO_PI * etas[..., 0])
    s2 = np.sin(_TWO_PI * etas[..., 1])
    c2 = np.cos(_TWO_PI * etas[..., 1])
    d1 = _TWO_PI * a * c1 * s2
    d2 = _TWO_PI * a * s1 * c2
    dl[..., 0, 0] = lx * (1.0 + d1)
    dl[..., 0, 1] = lx * d2
    dl[..., 1, 0] = ly * d1
    dl[..., 1, 1] = ly * (1.0 + d2)
    dl[..., 2, 2] = lz
    return dl


def sqrt_g(spec, etas):
    """Jacobian determinants det DL(eta), shape (N,)."""
    etas = np.asarray(etas, dtype=float)
    lx, ly, lz = spec.lengths
    if spec.is_affine:
        return np.full(etas.shape[:-1], lx * ly * lz)
    a = spec.alpha_c
    s1 = np.sin(_TWO_PI * etas[..., 0])
    c1 = np.cos(_TWO_PI * etas[..., 0])
    s2 = np.sin(_TWO_PI * etas[..., 1])
    c2 = np.cos(_TWO_PI * etas[..., 1])
    return lx * ly * lz * (1.0 + _TWO_PI * a * (c1 * s2 + s1 * c2))


def inverse_jacobians(spec, etas):
    """Inverse Jacobians DL^{-1}(eta), shape (N, 3, 3).

    Uses the 2x2-block structure: only the upper-left block is
    non-diagonal, the third direction is the affine stretch L_z.
    """
    etas = np.asarray(etas, dtype=float)
    lz = spec.lengths[2]
    dl = jacobians(spec, etas)
    out = np.zeros_like(dl)
    a = dl[..., 0, 0]
    b = dl[..., 0, 1]
    c = dl[..., 1, 0]
    d = dl[..., 1, 1]
    det2 = a * d - b * c
    if np.min(np.abs(det2)) <= DET_TOL * spec.lengths[0] * spec.lengths[1]:
        raise SingularMappingError("2x2 Jacobian block singular")
    out[..., 0, 0] = d / det2
    out[..., 0, 1] = -b / det2
    out[..., 1, 0] = -c / det2
    out[..., 1, 1] = a / det2
    out[..., 2, 2] = 1.0 / lz
    return out


def evaluate_bundle(spec, eta):
    """Mapping value and all derived metric quantities at one point."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (3,):
        raise ValueError("eta must be a 3-vector")
    etas = eta[None, :]
    det = float(sqrt_g(spec, etas)[0])
    if det <= DET_TOL:
        raise SingularMappingError(f"det DL = {det:.3e} at eta = {eta}")
    dl = jacobians(spec, etas)[0]
    dl_inv = inverse_jacobians(spec, etas)[0]
    g = dl.T @ dl
    g_inv = dl_inv @ dl_inv.T
    return MappingBundle(
        x=map_positions(spec, etas)[0],
        DL=dl,
        DL_inv=dl_inv,
        G=g,
        G_inv=g_inv,
        sqrt_g=det,
    )

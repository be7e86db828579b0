"""Periodic tensor-product B-spline de Rham complex and field solvers.

The complex V0 -> V1 -> V2 -> V3 uses the standard mixed-degree
construction: the degree drops by one in every differentiated direction.
All basis functions are plain (unit-normalized) B-splines; the discrete
differential operators carry the inverse cell widths, so that applying
an incidence matrix to coefficients reproduces the pointwise derivative
of the spline field exactly.

Only fully periodic boundaries are supported; every space then has
n1*n2*n3 degrees of freedom per (block) component.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import bsplines, geometry
from .errors import (
    CompatibilityError,
    NonConvergenceError,
    SingularMappingError,
    UnsupportedBoundaryError,
)

V0, V1, V2, V3 = "V0", "V1", "V2", "V3"


def _diff_matrix(n):
    """Periodic backward-difference matrix (c_i - c_{i-1}) / h, h = 1/n."""
    rows = np.concatenate([np.arange(n), np.arange(n)])
    cols = np.concatenate([np.arange(n), (np.arange(n) - 1) % n])
    vals = np.concatenate([np.full(n, float(n)), np.full(n, -float(n))])
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def _kron3(a, b, c):
    return sp.kron(sp.kron(a, b, format="csr"), c, format="csr")


@dataclass
class DeRhamComplex:
    """Spline spaces, their dimensions and the discrete derivatives."""

    n_cells: tuple
    degrees: tuple
    grad: sp.csr_matrix = field(repr=False, default=None)
    curl: sp.csr_matrix = field(repr=False, default=None)
    div: sp.csr_matrix = field(repr=False, default=None)

    @property
    def nb(self):
        n1, n2, n3 = self.n_cells
        return n1 * n2 * n3

    @property
    def N0(self):
        return self.nb

    @property
    def N1(self):
        return 3 * self.nb

    @property
    def N2(self):
        return 3 * self.nb

    @property
    def N3(self):
        return self.nb

    def block_degrees(self, space):
        """Per-direction degrees of each (block) component of a space."""
        p1, p2, p3 = self.degrees
        if space == V0:
            return [(p1, p2, p3)]
        if space == V1:
            return [(p1 - 1, p2, p3), (p1, p2 - 1, p3), (p1, p2, p3 - 1)]
        if space == V2:
            return [(p1, p2 - 1, p3 - 1), (p1 - 1, p2, p3 - 1), (p1 - 1, p2 - 1, p3)]
        if space == V3:
            return [(p1 - 1, p2 - 1, p3 - 1)]
        raise ValueError(f"unknown space {space!r}")

    def _eval_tensor(self, degs, etas):
        """(idx, val) of the non-zero tensor-product basis at each point."""
        etas = np.atleast_2d(np.asarray(etas, dtype=float))
        n1, n2, n3 = self.n_cells
        i1, v1 = bsplines.basis_values(n1, degs[0], etas[:, 0])
        i2, v2 = bsplines.basis_values(n2, degs[1], etas[:, 1])
        i3, v3 = bsplines.basis_values(n3, degs[2], etas[:, 2])
        m = etas.shape[0]
        idx = (
            (i1[:, :, None, None] * n2 + i2[:, None, :, None]) * n3
            + i3[:, None, None, :]
        ).reshape(m, -1)
        val = (
            v1[:, :, None, None] * v2[:, None, :, None] * v3[:, None, None, :]
        ).reshape(m, -1)
        return idx, val

    def eval_v0(self, etas):
        return self._eval_tensor(self.block_degrees(V0)[0], etas)

    def eval_v3(self, etas):
        return self._eval_tensor(self.block_degrees(V3)[0], etas)

    def eval_blocks(self, space, etas):
        """Per-component (idx, val) pairs; idx includes the block offset."""
        out = []
        for c, degs in enumerate(self.block_degrees(space)):
            idx, val = self._eval_tensor(degs, etas)
            out.append((idx + c * self.nb, val))
        return out

    def eval_vector_field(self, space, coeffs, etas):
        """Logical components of a V1/V2 field at points, shape (M, 3)."""
        coeffs = np.asarray(coeffs, dtype=float)
        blocks = self.eval_blocks(space, etas)
        return np.stack(
            [(val * coeffs[idx]).sum(axis=1) for idx, val in blocks], axis=1
        )

    def eval_scalar_field(self, space, coeffs, etas):
        coeffs = np.asarray(coeffs, dtype=float)
        ev = self.eval_v0 if space == V0 else self.eval_v3
        idx, val = ev(etas)
        return (val * coeffs[idx]).sum(axis=1)


def build_complex(n_cells, degrees, periodic=(True, True, True)):
    """Construct the periodic complex with its incidence operators."""
    if not all(periodic):
        raise UnsupportedBoundaryError("only fully periodic grids are supported")
    n_cells = tuple(int(n) for n in n_cells)
    degrees = tuple(int(p) for p in degrees)
    if any(n < 1 for n in n_cells) or any(p < 1 for p in degrees):
        raise ValueError("n_cells and degrees must be positive")
    if any(n < p for n, p in zip(n_cells, degrees)):
        raise ValueError("need n_cells >= degrees in every direction")

    n1, n2, n3 = n_cells
    i1, i2, i3 = (sp.identity(n, format="csr") for n in n_cells)
    d1 = _kron3(_diff_matrix(n1), i2, i3)
    d2 = _kron3(i1, _diff_matrix(n2), i3)
    d3 = _kron3(i1, i2, _diff_matrix(n3))

    grad = sp.vstack([d1, d2, d3], format="csr")
    z = None
    curl = sp.bmat(
        [[z, -d3, d2], [d3, z, -d1], [-d2, d1, z]], format="csr"
    )
    div = sp.hstack([d1, d2, d3], format="csr")
    return DeRhamComplex(n_cells=n_cells, degrees=degrees, grad=grad, curl=curl, div=div)


# ---------------------------------------------------------------------------
# mass matrices


@dataclass
class MassMatrices:
    """Metric-weighted mass matrices of the complex."""

    M1: sp.csr_matrix
    M2: sp.csr_matrix
    M0: sp.csr_matrix = None
    M3: sp.csr_matrix = None


def _quad_grid(complex_, spec):
    """Tensor quadrature grid, combined weights and metric data."""
    pts, wts = [], []
    for n, p in zip(complex_.n_cells, complex_.degrees):
        q, w = bsplines.gauss_rule(n, p + 1)
        pts.append(q)
        wts.append(w)
    q1, q2, q3 = np.meshgrid(*pts, indexing="ij")
    etas = np.stack([q1.ravel(), q2.ravel(), q3.ravel()], axis=1)
    w = (
        wts[0][:, None, None] * wts[1][None, :, None] * wts[2][None, None, :]
    ).ravel()
    det = geometry.sqrt_g(spec, etas)
    if np.min(det) <= geometry.DET_TOL:
        raise SingularMappingError("sqrt(g) vanishes on the quadrature grid")
    return pts, w, etas, det


def _metric_weight(space, spec, etas, det):
    """Pointwise weight W_{cd}(eta) for each block pair of a space."""
    if space == V0:
        return {(0, 0): det}
    if space == V3:
        return {(0, 0): 1.0 / det}
    dl_inv = geometry.inverse_jacobians(spec, etas)
    if space == V1:
        g_inv = np.einsum("qik,qjk->qij", dl_inv, dl_inv)
        return {
            (c, d): g_inv[:, c, d] * det for c in range(3) for d in range(3)
        }
    dl = geometry.jacobians(spec, etas)
    g = np.einsum("qki,qkj->qij", dl, dl)
    return {(c, d): g[:, c, d] / det for c in range(3) for d in range(3)}


def assemble_mass(complex_, spec, space):
    """Assemble the metric-weighted mass matrix of one space.

    Gauss-Legendre with degree+1 points per cell per direction; the
    result is symmetrized in exact arithmetic by averaging with its
    transpose.
    """
    n1, n2, n3 = complex_.n_cells
    nq = [p + 1 for p in complex_.degrees]
    pts, w, etas, det = _quad_grid(complex_, spec)
    weights = _metric_weight(space, spec, etas, det)
    block_degs = complex_.block_degrees(space)
    nb = complex_.nb
    dim = nb * len(block_degs)

    # reference-cell basis tables per direction and degree
    tables = {}
    for d in range(3):
        n = complex_.n_cells[d]
        cell0 = pts[d][: nq[d]]
        for degs in block_degs:
            p = degs[d]
            if (d, p) not in tables:
                tables[(d, p)] = bsplines.basis_values(n, p, cell0)[1]

    rows_all, cols_all, vals_all = [], [], []
    for (c, d), wgrid in weights.items():
        if not np.any(wgrid):
            continue
        degr = block_degs[c]
        degc = block_degs[d]
        wq = (w * wgrid).reshape(n1, nq[0], n2, nq[1], n3, nq[2])
        t = [tables[(k, degr[k])] for k in range(3)]
        s = [tables[(k, degc[k])] for k in range(3)]
        local = np.einsum(
            "AaBbCc,ai,bj,ck,al,bm,cn->ABCijklmn",
            wq, t[0], t[1], t[2], s[0], s[1], s[2],
            optimize=False,
        )

        def flat_index(degs):
            r1 = (np.arange(n1)[:, None] - degs[0] + np.arange(degs[0] + 1)) % n1
            r2 = (np.arange(n2)[:, None] - degs[1] + np.arange(degs[1] + 1)) % n2
            r3 = (np.arange(n3)[:, None] - degs[2] + np.arange(degs[2] + 1)) % n3
            return (
                (r1[:, None, None, :, None, None] * n2
                 + r2[None, :, None, None, :, None]) * n3
                + r3[None, None, :, None, None, :]
            )

        rflat = flat_index(degr)  # (n1,n2,n3,i,j,k)
        cflat = flat_index(degc)
        sh_r = rflat.shape[3:]
        sh_c = cflat.shape[3:]
        grid = (n1, n2, n3)
        rows = np.broadcast_to(
            rflat.reshape(grid + sh_r + (1, 1, 1)), grid + sh_r + sh_c
        ).ravel()
        cols = np.broadcast_to(
            cflat.reshape(grid + (1, 1, 1) + sh_c), grid + sh_r + sh_c
        ).ravel()
        rows_all.append(rows + c * nb)
        cols_all.append(cols + d * nb)
        vals_all.append(local.ravel())

    mat = sp.coo_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(dim, dim),
    ).tocsr()
    mat = (mat + mat.T) * 0.5
    mat.sum_duplicates()
    return mat.tocsr()


def write_coo_text(matrix, path):
    """Dump a sparse matrix as 'row col value' lines (debug aid)."""
    coo = sp.coo_matrix(matrix)
    with open(path, "w") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v:.17g}\n")


# ---------------------------------------------------------------------------
# linear solvers


def _as_operator(a):
    if callable(a):
        return a
    return lambda u: a @ u


def cg_solve(apply_A, rhs, tol=1e-12, max_iter=10000, x0=None, diag=None):
    """Conjugate gradients for an SPD operator, optional Jacobi scaling.

    Stops when ||A x - rhs||_2 <= tol * ||rhs||_2. All reductions use
    fixed-order numpy sums, so the result is independent of threading.
    Raises NonConvergenceError (carrying the final relative residual) if
    max_iter is exhausted; an indefinite operator surfaces the same way,
    flagged as residual stagnation, since CG is only defined for SPD
    input (caller error).
    """
    apply_A = _as_operator(apply_A)
    rhs = np.asarray(rhs, dtype=float)
    rhs_norm = np.sqrt((rhs * rhs).sum())
    if rhs_norm == 0.0:
        return np.zeros_like(rhs)
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=float)
    r = rhs - apply_A(x) if x.any() else rhs.copy()
    z = r / diag if diag is not None else r
    p = z.copy()
    rz = (r * z).sum()
    for it in range(max_iter):
        res = np.sqrt((r * r).sum())
        if res <= tol * rhs_norm:
            return x
        ap = apply_A(p)
        pap = (p * ap).sum()
        if pap <= 0.0:
            raise NonConvergenceError(
                f"operator not positive definite (p^T A p = {pap:.3e}); "
                f"residual stagnated at {res / rhs_norm:.3e}",
                residual=res / rhs_norm,
                iterations=it,
            )
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        z = r / diag if diag is not None else r
        rz_new = (r * z).sum()
        p = z + (rz_new / rz) * p
        rz = rz_new
    res = np.sqrt((r * r).sum())
    raise NonConvergenceError(
        f"CG did not reach tol {tol:g} in {max_iter} iterations "
        f"(relative residual {res / rhs_norm:.3e})",
        residual=res / rhs_norm,
        iterations=max_iter,
    )


def solve_poisson(complex_, masses, rho_dual, tol=1e-12, max_iter=10000):
    """Electric field from a charge-density dual vector via grad^T M1 grad.

    Solves grad^T M1 grad phi = rho_dual on the mean-zero complement and
    returns e = -grad phi. The right-hand side must be compatible
    (zero mean) on the periodic torus.
    """
    rho_dual = np.asarray(rho_dual, dtype=float)
    scale = np.max(np.abs(rho_dual))
    if scale == 0.0:
        return np.zeros(complex_.N1)
    if abs(rho_dual.sum()) > 1e-10 * scale * complex_.N0:
        raise CompatibilityError(
            f"rho_dual has non-zero mean ({rho_dual.sum():.3e}); "
            "incompatible on the periodic torus"
        )
    stiff = (complex_.grad.T @ masses.M1 @ complex_.grad).tocsr()
    dg = stiff.diagonal()
    if not np.all(dg > 0.0):
        # every direction single-cell: gradient vanishes identically
        return np.zeros(complex_.N1)
    rhs = rho_dual - rho_dual.mean()
    phi = cg_solve(lambda u: stiff @ u, rhs, tol=tol, max_iter=max_iter, diag=dg)
    phi -= phi.mean()
    return -(complex_.grad @ phi)

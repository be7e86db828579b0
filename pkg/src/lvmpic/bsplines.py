"""Uniform periodic B-spline basis evaluation in one dimension.

All spaces in this code live on uniform periodic knot grids with n cells
on [0, 1], so the classical de Boor recursion collapses to a short loop
with integer knot spacings. Basis indices are returned modulo n; callers
must accumulate duplicate indices (they occur when n <= degree + 1,
e.g. single-cell directions).
"""

import numpy as np


def cell_and_local(n, x):
    """Cell index in [0, n) and local coordinate in [0, 1) for points x.

    x is wrapped periodically into [0, 1) first.
    """
    x = np.asarray(x, dtype=float)
    y = (x - np.floor(x)) * n
    j = np.minimum(y.astype(np.int64), n - 1)
    return j, y - j


def basis_values(n, p, x):
    """Values of the p+1 non-zero degree-p basis functions at points x.

    Returns (idx, val) with shape (len(x), p+1); idx[m, l] is the global
    (periodic) index of the basis function whose value is val[m, l].
    The values are a partition of unity for every degree.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    j, u = cell_and_local(n, x)
    m = x.shape[0]
    val = np.zeros((m, p + 1))
    val[:, 0] = 1.0
    # de Boor on integer knots: left = u + r - 1 - k, right = k + 1 - u
    for r in range(1, p + 1):
        saved = np.zeros(m)
        for k in range(r):
            temp = val[:, k] / r
            val[:, k] = saved + (k + 1 - u) * temp
            saved = (u + r - k - 1) * temp
        val[:, r] = saved
    offsets = np.arange(-p, 1, dtype=np.int64)
    idx = (j[:, None] + offsets[None, :]) % n
    return idx, val


def basis_derivatives(n, p, x):
    """First derivatives (w.r.t. x on [0,1]) of the same basis functions.

    Independent of the incidence-matrix path: uses the degree-lowering
    derivative identity directly. Returns (idx, dval) matching the index
    layout of basis_values.
    """
    if p == 0:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        j, _ = cell_and_local(n, x)
        return j[:, None].copy(), np.zeros((x.shape[0], 1))
    idx, _ = basis_values(n, p, x)
    _, low = basis_values(n, p - 1, x)
    m = low.shape[0]
    padded = np.zeros((m, p + 2))
    padded[:, 1 : p + 1] = low
    # d/dy N_{j-p+l}^p = N^{p-1}[l-1] - N^{p-1}[l] on integer knots
    dval = (padded[:, :-1] - padded[:, 1:]) * n
    return idx, dval


def gauss_rule(n, nq):
    """Gauss-Legendre points/weights on every cell of an n-cell unit grid.

    Returns (points, weights) flattened to shape (n*nq,), cell-major.
    Weights include the cell width, so sum(weights) == 1.
    """
    gx, gw = np.polynomial.legendre.leggauss(nq)
    h = 1.0 / n
    cells = np.arange(n)[:, None]
    pts = (cells + 0.5 + 0.5 * gx[None, :]) * h
    wts = np.broadcast_to(0.5 * h * gw[None, :], (n, nq))
    return pts.ravel(), wts.ravel().copy()

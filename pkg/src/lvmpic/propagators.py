"""Time-splitting substeps for the linearized Vlasov-Maxwell system.

The geometric model splits into five subsystems (vacuum Maxwell,
weight/field coupling, position advection, electric and magnetic
background pushes); each conserves its share of the discrete
Hamiltonian exactly or up to the accuracy of the inner Crank-Nicolson
solves. The direct delta-f comparison scheme integrates the same
semi-discrete equations with a plain splitting that has no such
conservation structure.

The coupling accumulation is applied matrix-free: the rank-one sum over
markers is never materialized in production paths (a dense variant is
provided as a test oracle for small spaces).
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import bsplines, feec, geometry, markers as mk
from .feec import V1, V2

DEFAULT_SCHEDULE = ("maxwell", "coupling", "advect_eta", "lorentz_e", "lorentz_b")
DDF_SCHEDULE = (
    "advect_eta",
    "lorentz_e",
    "ddf_ampere",
    "ddf_weights",
    "ddf_lorentz_b",
    "maxwell",
)


@dataclass
class FieldState:
    """FE coefficients of the dynamic and background fields."""

    e1: np.ndarray
    b1: np.ndarray
    e0: np.ndarray
    b0: np.ndarray

    @classmethod
    def zeros(cls, complex_):
        return cls(
            e1=np.zeros(complex_.N1),
            b1=np.zeros(complex_.N2),
            e0=np.zeros(complex_.N1),
            b0=np.zeros(complex_.N2),
        )


@dataclass(frozen=True)
class SubstepSchedule:
    """Ordered substep ids plus the composition rule."""

    substeps: tuple
    composition: str = "strang"

    def __post_init__(self):
        if self.composition not in ("lie_trotter", "strang"):
            raise ValueError(f"unknown composition {self.composition!r}")


def _dl_inv_dot_v(mapping, eta, v):
    """DL^{-1}(eta_p) v_p for all markers, shape (N, 3)."""
    if mapping.is_affine:
        return v / np.asarray(mapping.lengths)
    dli = geometry.inverse_jacobians(mapping, eta)
    return np.einsum("pij,pj->pi", dli, v)


def _marker_v1_data(batch, complex_, mapping):
    """Flattened V1 basis indices/values contracted with DL^{-1} v.

    Returns (idx, val) of shape (N, K); the resulting sparse rows are
    a_p with a_p^T u = (DL^{-1} v_p) . (Lambda^1)^T u evaluated at the
    marker.
    """
    dv = _dl_inv_dot_v(mapping, batch.eta, batch.v)
    blocks = complex_.eval_blocks(V1, batch.eta)
    idx = np.concatenate([b[0] for b in blocks], axis=1)
    val = np.concatenate(
        [b[1] * dv[:, c : c + 1] for c, b in enumerate(blocks)], axis=1
    )
    return idx, val


def _marker_v1_sparse(batch, complex_, mapping):
    """Marker rows a_p as a CSR pair (A, A^T) for fast repeated sweeps."""
    idx, val = _marker_v1_data(batch, complex_, mapping)
    n, k = idx.shape
    a = sp.csr_matrix(
        (val.ravel(), idx.ravel(), np.arange(0, (n + 1) * k, k)),
        shape=(n, complex_.N1),
    )
    a.sum_duplicates()
    return a, a.T.tocsr()


def _scatter(idx, weighted_val, size):
    return np.bincount(idx.ravel(), weights=weighted_val.ravel(), minlength=size)


def accumulate_current(batch, complex_, mapping, phys):
    """Dual-space current (alpha^2 / (N eps)) sum_p w_p a_p."""
    if batch.count == 0 or not batch.w.any():
        return np.zeros(complex_.N1)
    idx, val = _marker_v1_data(batch, complex_, mapping)
    kappa = phys.alpha2 / (batch.count * phys.eps)
    return kappa * _scatter(idx, val * batch.w[:, None], complex_.N1)


@dataclass
class CouplingOps:
    """Matrix-free coupling accumulation: symmetric PSD operator + vector."""

    apply: callable
    vec: np.ndarray
    mat: object = field(repr=False, default=None)  # (Np, N1) marker rows a_p
    gfac: np.ndarray = field(repr=False, default=None)


def accumulate_coupling(batch, complex_, mapping, phys):
    """Build EW_apply(u) = kappa sum_p (f0/s0) a_p a_p^T u and EW_vec.

    Each application costs two particle sweeps (gather a_p^T u, scatter
    back); the N1 x N1 operator is never materialized.
    """
    n1 = complex_.N1
    if batch.count == 0:
        zero = np.zeros(n1)
        return CouplingOps(apply=lambda u: np.zeros_like(u), vec=zero)
    mk.require_valid(batch)
    a, at = _marker_v1_sparse(batch, complex_, mapping)
    g = batch.f0 / batch.s0
    kappa_op = phys.alpha2 / (batch.count * phys.v_th**2 * phys.eps**2)
    kappa_vec = phys.alpha2 / (batch.count * phys.eps)
    gk = g * kappa_op

    def apply(u):
        return at @ (gk * (a @ u))

    vec = kappa_vec * (at @ batch.w)
    return CouplingOps(apply=apply, vec=vec, mat=a, gfac=g)


def coupling_matrices_dense(batch, complex_, mapping, phys):
    """Dense E (N1 x Np) and W (Np x N1) blocks; oracle path, N1 <= 256."""
    if complex_.N1 > 256:
        raise ValueError("dense coupling blocks are an oracle path for N1 <= 256")
    idx, val = _marker_v1_data(batch, complex_, mapping)
    a = np.zeros((batch.count, complex_.N1))
    np.add.at(a, (np.arange(batch.count)[:, None], idx), val)
    e_blk = (phys.alpha2 / (batch.count * phys.eps)) * a.T
    w_blk = (
        (batch.f0 / batch.s0)[:, None]
        / (phys.v_th**2 * phys.eps)
        * a
    )
    return e_blk, w_blk


class Stepper:
    """Owns the grid/mass context and dispatches substeps.

    Heavy per-run quantities (curl^T M2 curl, Jacobi diagonals) are
    cached on first use. Wall-clock time per substep id is accumulated
    in ``timings``.
    """

    def __init__(self, complex_, mapping, masses, phys, background,
                 cg_tol=1e-12, cg_max_iter=20000):
        self.complex = complex_
        self.mapping = mapping
        self.masses = masses
        self.phys = phys
        self.background = background
        self.cg_tol = cg_tol
        self.cg_max_iter = cg_max_iter
        self.timings = {}
        self._ctm2c = None
        self._diag_m1 = None
        self._diag_maxwell = None
        self._dt_maxwell = None

    # -- cached operators ------------------------------------------------

    def _maxwell_ops(self, dt):
        if self._ctm2c is None:
            self._ctm2c = (
                self.complex.curl.T @ self.masses.M2 @ self.complex.curl
            ).tocsr()
        if self._dt_maxwell != dt:
            self._diag_maxwell = (
                self.masses.M1.diagonal() + 0.25 * dt**2 * self._ctm2c.diagonal()
            )
            self._dt_maxwell = dt
        return self._ctm2c, self._diag_maxwell

    @property
    def diag_m1(self):
        if self._diag_m1 is None:
            self._diag_m1 = self.masses.M1.diagonal()
        return self._diag_m1

    # -- substeps ----------------------------------------------------------

    def step_maxwell(self, fields, batch, dt):
        m1, m2 = self.masses.M1, self.masses.M2
        curl = self.complex.curl
        if not fields.e1.any() and not fields.b1.any():
            return
        k, diag = self._maxwell_ops(dt)
        rhs = m1 @ fields.e1 - 0.25 * dt**2 * (k @ fields.e1) + dt * (
            curl.T @ (m2 @ fields.b1)
        )
        e_new = feec.cg_solve(
            lambda u: m1 @ u + 0.25 * dt**2 * (k @ u),
            rhs,
            tol=self.cg_tol,
            max_iter=self.cg_max_iter,
            x0=fields.e1,
            diag=diag,
        )
        fields.b1 = fields.b1 - 0.5 * dt * (curl @ (e_new + fields.e1))
        fields.e1 = e_new

    def step_coupling(self, fields, batch, dt):
        m1 = self.masses.M1
        if batch.count == 0 or (not fields.e1.any() and not batch.w.any()):
            return
        ops = accumulate_coupling(batch, self.complex, self.mapping, self.phys)
        rhs = m1 @ fields.e1 - 0.25 * dt**2 * ops.apply(fields.e1) - dt * ops.vec
        e_new = feec.cg_solve(
            lambda u: m1 @ u + 0.25 * dt**2 * ops.apply(u),
            rhs,
            tol=self.cg_tol,
            max_iter=self.cg_max_iter,
            x0=fields.e1,
            diag=self.diag_m1,
        )
        t = ops.mat @ (e_new + fields.e1)
        batch.w = batch.w + (0.5 * dt / (self.phys.v_th**2 * self.phys.eps)) * (
            ops.gfac * t
        )
        fields.e1 = e_new

    def step_advect_eta(self, fields, batch, dt):
        def rhs(eta):
            return _dl_inv_dot_v(self.mapping, eta, batch.v)

        k1 = rhs(batch.eta)
        if self.mapping.is_affine:
            batch.eta = (batch.eta + dt * k1) % 1.0
            return
        k2 = rhs(batch.eta + 0.5 * dt * k1)
        k3 = rhs(batch.eta + 0.5 * dt * k2)
        k4 = rhs(batch.eta + dt * k3)
        batch.eta = (batch.eta + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)) % 1.0

    def step_lorentz_electric(self, fields, batch, dt):
        if not fields.e0.any():
            return
        e_log = self.complex.eval_vector_field(V1, fields.e0, batch.eta)
        if self.mapping.is_affine:
            e_cart = e_log / np.asarray(self.mapping.lengths)
        else:
            dli = geometry.inverse_jacobians(self.mapping, batch.eta)
            e_cart = np.einsum("pki,pk->pi", dli, e_log)
        batch.v = batch.v + (dt / self.phys.eps) * e_cart
        mk.refresh_f0(batch, self.phys, self.background)

    def _rotate_velocities(self, batch, b_coeffs, dt):
        if not b_coeffs.any():
            return
        b_log = self.complex.eval_vector_field(V2, b_coeffs, batch.eta)
        dl = geometry.jacobians(self.mapping, batch.eta)
        det = geometry.sqrt_g(self.mapping, batch.eta)
        b_cart = np.einsum("pij,pj->pi", dl, b_log) / det[:, None]
        bnorm = np.sqrt((b_cart * b_cart).sum(axis=1))
        active = bnorm > 0.0
        if not np.any(active):
            return
        axis = np.zeros_like(b_cart)
        axis[active] = b_cart[active] / bnorm[active, None]
        theta = -(dt / self.phys.eps) * bnorm
        ct = np.cos(theta)[:, None]
        st = np.sin(theta)[:, None]
        v = batch.v
        cross = np.cross(axis, v)
        dot = (axis * v).sum(axis=1)[:, None]
        v_rot = v * ct + cross * st + axis * dot * (1.0 - ct)
        batch.v = np.where(active[:, None], v_rot, v)
        mk.refresh_f0(batch, self.phys, self.background)

    def step_lorentz_magnetic(self, fields, batch, dt):
        self._rotate_velocities(batch, fields.b0, dt)

    # -- direct delta-f substeps -------------------------------------------

    def step_ddf_ampere(self, fields, batch, dt):
        cur = accumulate_current(batch, self.complex, self.mapping, self.phys)
        if not cur.any():
            return
        incr = feec.cg_solve(
            lambda u: self.masses.M1 @ u,
            cur,
            tol=self.cg_tol,
            max_iter=self.cg_max_iter,
            diag=self.diag_m1,
        )
        fields.e1 = fields.e1 - dt * incr

    def step_ddf_weights(self, fields, batch, dt):
        if not fields.e1.any():
            return
        idx, val = _marker_v1_data(batch, self.complex, self.mapping)
        t = (val * fields.e1[idx]).sum(axis=1)
        batch.w = batch.w + (dt / (self.phys.v_th**2 * self.phys.eps)) * (
            batch.f0 / batch.s0
        ) * t

    def step_ddf_lorentz_b(self, fields, batch, dt):
        self._rotate_velocities(batch, fields.b0 + fields.b1, dt)

    # -- composition ---------------------------------------------------------

    _DISPATCH = {
        "maxwell": step_maxwell,
        "coupling": step_coupling,
        "advect_eta": step_advect_eta,
        "lorentz_e": step_lorentz_electric,
        "lorentz_b": step_lorentz_magnetic,
        "ddf_ampere": step_ddf_ampere,
        "ddf_weights": step_ddf_weights,
        "ddf_lorentz_b": step_ddf_lorentz_b,
    }

    def apply(self, substep, fields, batch, dt):
        fn = self._DISPATCH.get(substep)
        if fn is None:
            raise ValueError(f"unknown substep {substep!r}")
        t0 = time.perf_counter()
        fn(self, fields, batch, dt)
        self.timings[substep] = self.timings.get(substep, 0.0) + (
            time.perf_counter() - t0
        )

    def compose_step(self, schedule, fields, batch, dt):
        """One full time step under the schedule's composition rule.

        Lie-Trotter applies the substeps in order with the full step.
        Strang applies the palindromic composition with half steps at
        the ends (the central substep keeps the full step), so a
        single-substep schedule coincides with Lie-Trotter.
        """
        subs = list(schedule.substeps)
        if not subs:
            return
        if schedule.composition == "lie_trotter":
            for s in subs:
                self.apply(s, fields, batch, dt)
            return
        for s in subs[:-1]:
            self.apply(s, fields, batch, 0.5 * dt)
        self.apply(subs[-1], fields, batch, dt)
        for s in reversed(subs[:-1]):
            self.apply(s, fields, batch, 0.5 * dt)


def direct_deltaf_step(stepper, fields, batch, dt, composition="lie_trotter"):
    """One step of the non-geometric comparison scheme (substeps I-VI)."""
    schedule = SubstepSchedule(DDF_SCHEDULE, composition)
    stepper.compose_step(schedule, fields, batch, dt)


# ---------------------------------------------------------------------------
# background-field projections


def project_constant_b0(complex_, mapping, b0_cart):
    """V2 coefficients whose pushed-forward field equals the constant b0.

    On affine mappings the pulled-back 2-form coefficients are constant
    and the assignment is exact; otherwise an M2-weighted projection is
    solved (dual vector integrand DL^T b0).
    """
    b0_cart = np.asarray(b0_cart, dtype=float)
    nb = complex_.nb
    if not b0_cart.any():
        return np.zeros(complex_.N2)
    if mapping.is_affine:
        lx, ly, lz = mapping.lengths
        coeff = np.empty(complex_.N2)
        coeff[0 * nb : 1 * nb] = ly * lz * b0_cart[0]
        coeff[1 * nb : 2 * nb] = lx * lz * b0_cart[1]
        coeff[2 * nb : 3 * nb] = lx * ly * b0_cart[2]
        return coeff

    def integrand(etas):
        dl = geometry.jacobians(mapping, etas)
        return np.einsum("qji,j->qi", dl, b0_cart)

    masses2 = feec.assemble_mass(complex_, mapping, V2)
    dual = assemble_dual_vector(complex_, V2, integrand)
    return feec.cg_solve(
        lambda u: masses2 @ u, dual, tol=1e-13, max_iter=20000,
        diag=masses2.diagonal(),
    )


def project_constant_e0(complex_, mapping, e0_cart):
    """V1 coefficients for a constant Cartesian background electric field."""
    e0_cart = np.asarray(e0_cart, dtype=float)
    nb = complex_.nb
    if not e0_cart.any():
        return np.zeros(complex_.N1)
    if mapping.is_affine:
        lx, ly, lz = mapping.lengths
        coeff = np.empty(complex_.N1)
        coeff[0 * nb : 1 * nb] = lx * e0_cart[0]
        coeff[1 * nb : 2 * nb] = ly * e0_cart[1]
        coeff[2 * nb : 3 * nb] = lz * e0_cart[2]
        return coeff

    def integrand(etas):
        dli = geometry.inverse_jacobians(mapping, etas)
        det = geometry.sqrt_g(mapping, etas)
        return det[:, None] * np.einsum("qij,j->qi", dli, e0_cart)

    masses1 = feec.assemble_mass(complex_, mapping, V1)
    dual = assemble_dual_vector(complex_, V1, integrand)
    return feec.cg_solve(
        lambda u: masses1 @ u, dual, tol=1e-13, max_iter=20000,
        diag=masses1.diagonal(),
    )


def assemble_dual_vector(complex_, space, integrand):
    """Quadrature of integrand against every basis function of a space.

    ``integrand(etas)`` must return the full logical integrand (metric
    factors included): shape (Q,) for scalar spaces, (Q, 3) per block
    for vector ones.
    """
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
    f = np.asarray(integrand(etas), dtype=float)
    if space in (feec.V0, feec.V3):
        ev = complex_.eval_v0 if space == feec.V0 else complex_.eval_v3
        idx, val = ev(etas)
        return _scatter(idx, val * (w * f)[:, None], complex_.N0)
    size = complex_.N1 if space == V1 else complex_.N2
    out = np.zeros(size)
    for c, (idx, val) in enumerate(complex_.eval_blocks(space, etas)):
        out += _scatter(idx, val * (w * f[:, c])[:, None], size)
    return out

"""Assembly of the complex-scaled Helmholtz form and plane-wave scattering data.

The form is ``a(u, v) = int k^-2 A grad u . grad v + k^-2 (b . grad u) v - n u v``
with real Lagrange test functions, so no conjugation is needed element-wise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from ..geometry import OBSTACLE
from ..linalg import to_csr
from .quadrature import triangle_rule
from .space import FemSpace, shape_functions

CHUNK = 4096


def element_maps(mesh, idx=None):
    """Affine maps of triangles ``idx``: origin ``(T, 2)``, Jacobian ``(T, 2, 2)``, det, inverse-transpose."""
    tri = mesh.triangles if idx is None else mesh.triangles[idx]
    P = mesh.vertices[tri]
    J = np.stack([P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]], axis=2)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    invT = np.empty_like(J)
    invT[:, 0, 0] = J[:, 1, 1] / det
    invT[:, 0, 1] = -J[:, 1, 0] / det
    invT[:, 1, 0] = -J[:, 0, 1] / det
    invT[:, 1, 1] = J[:, 0, 0] / det
    return P[:, 0], J, det, invT


def default_quad_order(p: int) -> int:
    return 2 * p + 2


def check_quad_order(p: int, quad_order: int | None) -> int:
    if quad_order is None:
        return default_quad_order(p)
    if quad_order < 2 * p:
        raise ValueError(f"quadrature order {quad_order} too low for degree {p} (need >= {2 * p})")
    return int(quad_order)


def element_matrices(space: FemSpace, medium, k: float, idx, quad_order: int) -> np.ndarray:
    """Local matrices ``(T, n_loc, n_loc)``; row = test function, column = trial."""
    qp, qw = triangle_rule(quad_order)
    phi, dphi = shape_functions(space.p, qp)
    x0, J, det, invT = element_maps(space.mesh, idx)
    X = x0[:, None, :] + np.einsum("tab,qb->tqa", J, qp)
    T, Q = X.shape[:2]
    A, n, b = medium.coefficients(X.reshape(-1, 2))
    A = A.reshape(T, Q, 2, 2)
    n = np.asarray(n).reshape(T, Q)
    G = np.einsum("tab,qib->tqia", invT, dphi)
    w = qw[None, :] * np.abs(det)[:, None]
    AG = np.einsum("tqab,tqjb->tqja", A, G)
    K = np.einsum("tq,tqia,tqja->tij", w / k**2, G, AG)
    K -= np.einsum("tq,qi,qj->tij", w * n, phi, phi)
    if b is not None:
        b = b.reshape(T, Q, 2)
        bg = np.einsum("tqa,tqja->tqj", b, G)
        K += np.einsum("tq,qi,tqj->tij", w / k**2, phi, bg)
    return K


def assemble_matrix(space: FemSpace, medium, k: float, quad_order: int | None = None, triangles=None) -> sps.csr_matrix:
    """Full (unconstrained) Galerkin matrix in CSR form, optionally over a triangle subset."""
    q = check_quad_order(space.p, quad_order)
    nl = space.cell_dofs.shape[1]
    tri = np.arange(space.mesh.n_triangles) if triangles is None else np.asarray(triangles)
    rows, cols, vals = [], [], []
    for s in range(0, len(tri), CHUNK):
        idx = tri[s:s + CHUNK]
        Ke = element_matrices(space, medium, k, idx, q)
        d = space.cell_dofs[idx]
        rows.append(np.repeat(d, nl, axis=1).ravel())
        cols.append(np.tile(d, (1, nl)).ravel())
        vals.append(Ke.ravel())
    n = space.n_dofs
    return to_csr(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), (n, n))


def load_vector(space: FemSpace, f, quad_order: int | None = None) -> np.ndarray:
    """``(int f phi_i)_i`` for a callable source ``f(points)``."""
    q = check_quad_order(space.p, quad_order)
    qp, qw = triangle_rule(q)
    phi, _ = shape_functions(space.p, qp)
    x0, J, det, _ = element_maps(space.mesh)
    X = x0[:, None, :] + np.einsum("tab,qb->tqa", J, qp)
    fv = np.asarray(f(X.reshape(-1, 2))).reshape(X.shape[:2])
    loc = np.einsum("tq,q,qi->ti", fv * np.abs(det)[:, None], qw, phi)
    out = np.zeros(space.n_dofs, dtype=complex)
    np.add.at(out, space.cell_dofs, loc)
    return out


@dataclass(frozen=True)
class AssembledSystem:
    """Constrained system ``matrix @ x = rhs`` on the free DOFs.

    ``full`` is the unconstrained matrix, ``lifting`` holds the Dirichlet values
    (zero on free DOFs) and ``load`` the unconstrained load vector.
    """

    space: FemSpace
    k: float
    full: sps.csr_matrix
    matrix: sps.csr_matrix
    rhs: np.ndarray
    lifting: np.ndarray
    load: np.ndarray
    free: np.ndarray

    def expand(self, x_free) -> np.ndarray:
        u = self.lifting.astype(complex).copy()
        u[self.free] = x_free
        return u

    def residual(self, x_free) -> float:
        r = self.matrix @ x_free - self.rhs
        nb = np.linalg.norm(self.rhs)
        return float(np.linalg.norm(r) / (nb if nb > 0 else 1.0))


def constrain(space: FemSpace, full, k: float, load=None, dirichlet_values=None) -> AssembledSystem:
    """Eliminate Dirichlet DOFs symmetrically and move their values to the right-hand side."""
    n = space.n_dofs
    load = np.zeros(n, dtype=complex) if load is None else np.asarray(load, dtype=complex)
    g = np.zeros(n, dtype=complex)
    mask = space.dirichlet
    if dirichlet_values is not None:
        g[mask] = np.asarray(dirichlet_values, dtype=complex)[mask]
    free = np.flatnonzero(~mask)
    rhs = load[free] - (full @ g)[free]
    A = full[free][:, free].tocsr()
    A.sort_indices()
    return AssembledSystem(space, float(k), full, A, rhs, g, load, free)


def assemble(space: FemSpace, medium, k: float, quad_order: int | None = None, load=None, dirichlet_values=None) -> AssembledSystem:
    full = assemble_matrix(space, medium, k, quad_order)
    return constrain(space, full, k, load, dirichlet_values)


# ---------------------------------------------------------------- scattering data


def unit_direction(direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float).ravel()
    if d.size == 1:
        d = np.array([np.cos(d[0]), np.sin(d[0])])
    if d.size != 2 or abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ValueError("incident direction must be a unit 2-vector or an angle")
    return d


@dataclass(frozen=True)
class PlaneWave:
    """``u^I(x) = exp(i k a . x)``."""

    k: float
    direction: tuple = (1.0, 0.0)

    @property
    def a(self) -> np.ndarray:
        return unit_direction(self.direction)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(x)
        return np.exp(1j * self.k * (x @ self.a))

    def gradient(self, x) -> np.ndarray:
        return 1j * self.k * self.a[None, :] * self(x)[:, None]

    def field(self, x):
        return self(x), self.gradient(x)


def scattering_rhs(space: FemSpace, medium, k: float, direction=(1.0, 0.0), quad_order=None, full=None):
    """Load vector on the free DOFs and the nodal lifting of ``-u^I`` on Obstacle DOFs."""
    if full is None:
        full = assemble_matrix(space, medium, k, quad_order)
    uI = PlaneWave(k, tuple(unit_direction(direction)))
    g = np.zeros(space.n_dofs, dtype=complex)
    obst = space.dof_tags == OBSTACLE
    g[obst] = -uI(space.dof_coords[obst])
    free = space.free
    return -(full @ g)[free], g


def scattering_system(space: FemSpace, medium, k: float, direction=(1.0, 0.0), quad_order=None) -> AssembledSystem:
    """Sound-soft scattered-field system: ``u^S = -u^I`` on the obstacle, 0 on truncation."""
    full = assemble_matrix(space, medium, k, quad_order)
    _, g = scattering_rhs(space, medium, k, direction, full=full)
    return constrain(space, full, k, dirichlet_values=g)

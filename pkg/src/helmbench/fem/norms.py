"""k-weighted Sobolev norms and best approximations in the discrete space.

``||v||_{H^1_k}^2 = ||v||^2 + ||k^-1 grad v||^2`` (m = 1) and ``L^2`` (m = 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from ..linalg import SingularMatrixError, SparseLU, to_csr
from .assembly import check_quad_order, element_maps
from .quadrature import triangle_rule
from .space import FemSpace, shape_functions


@dataclass(frozen=True)
class WeightedNorm:
    m: int
    k: float

    def __post_init__(self):
        if self.m not in (0, 1):
            raise ValueError("only m in {0, 1} is supported (negative norms are not implemented)")
        if self.k <= 0:
            raise ValueError("k must be positive")


def _triangles(space: FemSpace, mask):
    nt = space.mesh.n_triangles
    if mask is None:
        return np.arange(nt)
    mask = np.asarray(mask)
    return np.flatnonzero(mask) if mask.dtype == bool else mask


def quadrature_data(space: FemSpace, idx, quad_order):
    qp, qw = triangle_rule(quad_order)
    phi, dphi = shape_functions(space.p, qp)
    x0, J, det, invT = element_maps(space.mesh, idx)
    X = x0[:, None, :] + np.einsum("tab,qb->tqa", J, qp)
    G = np.einsum("tab,qib->tqia", invT, dphi)
    w = qw[None, :] * np.abs(det)[:, None]
    return X, w, phi, G


def evaluate(space: FemSpace, u, idx, quad_order):
    """Values and gradients of the finite-element function ``u`` at quadrature points."""
    X, w, phi, G = quadrature_data(space, idx, quad_order)
    loc = np.asarray(u)[space.cell_dofs[idx]]
    val = np.einsum("qi,ti->tq", phi, loc)
    grad = np.einsum("tqia,ti->tqa", G, loc)
    return X, w, val, grad


def error_norm(space: FemSpace, u_h, reference, norm: WeightedNorm, mask=None, quad_order=None) -> float:
    """``||u - u_h||`` over the triangles selected by ``mask`` (boolean or index array).

    ``reference(points)`` returns ``(u, grad u)``; pass ``u_h = 0`` for the norm of ``u``.
    """
    q = check_quad_order(space.p, quad_order if quad_order is not None else 2 * space.p + 4)
    idx = _triangles(space, mask)
    total = 0.0
    for s in range(0, len(idx), 4096):
        sub = idx[s:s + 4096]
        X, w, val, grad = evaluate(space, u_h if np.ndim(u_h) else np.zeros(space.n_dofs), sub, q)
        u, gu = reference(X.reshape(-1, 2))
        e = np.asarray(u).reshape(val.shape) - val
        total += float(np.sum(w * np.abs(e) ** 2))
        if norm.m == 1:
            ge = np.asarray(gu).reshape(grad.shape) - grad
            total += float(np.sum(w * np.sum(np.abs(ge) ** 2, axis=2))) / norm.k**2
    return float(np.sqrt(total))


def gram(space: FemSpace, norm: WeightedNorm, mask=None) -> sps.csr_matrix:
    """Gram matrix of the basis in the chosen inner product (mass, or mass + k^-2 stiffness)."""
    idx = _triangles(space, mask)
    q = 2 * space.p
    _, w, phi, G = quadrature_data(space, idx, q)
    loc = np.einsum("tq,qi,qj->tij", w, phi, phi)
    if norm.m == 1:
        loc = loc + np.einsum("tq,tqia,tqja->tij", w, G, G) / norm.k**2
    d = space.cell_dofs[idx]
    nl = d.shape[1]
    n = space.n_dofs
    return to_csr(np.repeat(d, nl, axis=1).ravel(), np.tile(d, (1, nl)).ravel(), loc.ravel(), (n, n))


def project(space: FemSpace, reference, norm: WeightedNorm, mask=None, quad_order=None) -> np.ndarray:
    """Coefficients of the orthogonal projection of ``reference`` (unconstrained space)."""
    q = check_quad_order(space.p, quad_order if quad_order is not None else 2 * space.p + 4)
    idx = _triangles(space, mask)
    X, w, phi, G = quadrature_data(space, idx, q)
    u, gu = reference(X.reshape(-1, 2))
    u = np.asarray(u).reshape(w.shape)
    loc = np.einsum("tq,qi->ti", w * u, phi)
    if norm.m == 1:
        gu = np.asarray(gu).reshape(*w.shape, 2)
        loc = loc + np.einsum("tq,tqa,tqia->ti", w, gu, G) / norm.k**2
    b = np.zeros(space.n_dofs, dtype=complex)
    np.add.at(b, space.cell_dofs[idx], loc)
    M = gram(space, norm, idx)
    used = np.unique(space.cell_dofs[idx])
    c = np.zeros(space.n_dofs, dtype=complex)
    try:
        c[used] = SparseLU(M[used][:, used]).solve(b[used])
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"singular Gram matrix: {exc}") from exc
    return c


def best_approximation(space: FemSpace, reference, norm: WeightedNorm, mask=None, quad_order=None) -> float:
    """``min_{v_h} ||u - v_h||``; the error is re-integrated directly to avoid cancellation."""
    c = project(space, reference, norm, mask, quad_order)
    return error_norm(space, c, reference, norm, mask, quad_order)

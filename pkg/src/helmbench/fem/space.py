"""Continuous Lagrange spaces of degree 1 to 3 on triangle meshes."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..geometry import NO_TAG, OBSTACLE, TRUNCATION, Mesh2D

DEGREES = (1, 2, 3)


@lru_cache(maxsize=None)
def reference_nodes(p: int) -> np.ndarray:
    """Lagrange nodes on the reference triangle.

    Order: vertices, then ``p - 1`` points per local edge ``i`` running from
    local vertex ``i`` to ``i + 1``, then interior points.
    """
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    nodes = [*v]
    for i in range(3):
        a, b = v[i], v[(i + 1) % 3]
        nodes.extend(a + (b - a) * j / p for j in range(1, p))
    for j in range(1, p):
        for i in range(1, p - j):
            nodes.append(np.array([i / p, j / p]))
    out = np.array(nodes)
    out.setflags(write=False)
    return out


def _monomials(p: int):
    return [(a, d - a) for d in range(p + 1) for a in range(d + 1)]


@lru_cache(maxsize=None)
def _coefficients(p: int) -> np.ndarray:
    nodes = reference_nodes(p)
    V = np.array([[x**a * y**b for a, b in _monomials(p)] for x, y in nodes])
    return np.linalg.inv(V)


def shape_functions(p: int, pts: np.ndarray):
    """Values ``(Q, n_loc)`` and reference gradients ``(Q, n_loc, 2)`` at ``pts``."""
    pts = np.atleast_2d(pts)
    x, y = pts[:, 0], pts[:, 1]
    mons = _monomials(p)
    C = _coefficients(p)
    P = np.stack([x**a * y**b for a, b in mons], axis=1)
    Px = np.stack([a * x ** max(a - 1, 0) * y**b if a else 0.0 * x for a, b in mons], axis=1)
    Py = np.stack([b * x**a * y ** max(b - 1, 0) if b else 0.0 * x for a, b in mons], axis=1)
    vals = P @ C
    grads = np.stack([Px @ C, Py @ C], axis=2)
    return vals, grads


@dataclass(frozen=True)
class FemSpace:
    """Global numbering of a conforming ``P_p`` space.

    DOFs are numbered vertices first, then edges (``p - 1`` each, oriented from
    the lower to the higher global vertex), then element interiors.
    """

    mesh: Mesh2D
    p: int
    cell_dofs: np.ndarray
    dof_coords: np.ndarray
    dof_tags: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_dofs(self) -> int:
        return len(self.dof_coords)

    @property
    def n_local(self) -> int:
        return (self.p + 1) * (self.p + 2) // 2

    @property
    def dirichlet(self) -> np.ndarray:
        """Boolean mask of constrained DOFs (on Obstacle or Truncation edges)."""
        return np.isin(self.dof_tags, (OBSTACLE, TRUNCATION))

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(~self.dirichlet)

    def interpolate(self, fn) -> np.ndarray:
        """Nodal interpolant of ``fn(points) -> values``."""
        return np.asarray(fn(self.dof_coords))


def build_space(mesh: Mesh2D, p: int) -> FemSpace:
    if p not in DEGREES:
        raise ValueError(f"unsupported degree {p}; expected one of {DEGREES}")
    tri = mesh.triangles
    nv, nt = mesh.n_vertices, mesh.n_triangles
    uniq, t2e = mesh.edges()
    ne = len(uniq)
    n_int = (p - 1) * (p - 2) // 2
    n_loc = (p + 1) * (p + 2) // 2
    cell = np.empty((nt, n_loc), dtype=np.int64)
    cell[:, :3] = tri
    col = 3
    for i in range(3):
        a, b = tri[:, i], tri[:, (i + 1) % 3]
        base = nv + t2e[:, i] * (p - 1)
        forward = a < b
        for j in range(p - 1):
            cell[:, col + j] = np.where(forward, base + j, base + (p - 2 - j))
        col += p - 1
    off = nv + ne * (p - 1)
    for j in range(n_int):
        cell[:, col + j] = off + np.arange(nt) * n_int + j
    n = off + nt * n_int

    coords = np.empty((n, 2))
    coords[:nv] = mesh.vertices
    ev = mesh.vertices[uniq]
    for j in range(p - 1):
        s = (j + 1) / p
        coords[nv + j: off: p - 1] = ev[:, 0] + s * (ev[:, 1] - ev[:, 0])
    if n_int:
        ref = reference_nodes(p)[3 + 3 * (p - 1):]
        P = mesh.vertices[tri]
        for j in range(n_int):
            x, y = ref[j]
            coords[off + j:: n_int] = P[:, 0] + x * (P[:, 1] - P[:, 0]) + y * (P[:, 2] - P[:, 0])

    tags = np.full(n, NO_TAG, dtype="<U10")
    edge_id = {tuple(e): i for i, e in enumerate(map(tuple, uniq.tolist()))}
    # Truncation first so Obstacle wins at shared vertices
    for want in (TRUNCATION, OBSTACLE):
        for (a, b), tag in zip(mesh.boundary_edges.tolist(), mesh.boundary_tags.tolist()):
            if tag != want:
                continue
            tags[[a, b]] = tag
            e = edge_id[(min(a, b), max(a, b))]
            tags[nv + e * (p - 1): nv + (e + 1) * (p - 1)] = tag
    coords.setflags(write=False)
    cell.setflags(write=False)
    tags.setflags(write=False)
    return FemSpace(mesh, p, cell, coords, tags)


def expected_dof_count(mesh: Mesh2D, p: int) -> int:
    ne = len(mesh.edges()[0])
    return mesh.n_vertices + (p - 1) * ne + (p - 1) * (p - 2) // 2 * mesh.n_triangles

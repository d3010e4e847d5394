"""Triangular meshes for rectangles and annuli, graded refinement, region labels.

Boundary tags are ``"Obstacle"``, ``"Truncation"`` and ``"None"``. Region labels
are ``"K"`` (cavity), ``"V"`` (visible), ``"I"`` (invisible), ``"P"`` (PML) and
``"Unlabeled"``.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

log = logging.getLogger(__name__)

OBSTACLE = "Obstacle"
TRUNCATION = "Truncation"
NO_TAG = "None"
TAGS = (OBSTACLE, TRUNCATION, NO_TAG)
REGIONS = ("K", "V", "I", "P", "Unlabeled")
UPSILON = 10.0


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]``."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"degenerate box {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return (
            (pts[:, 0] >= self.x0 - tol)
            & (pts[:, 0] <= self.x1 + tol)
            & (pts[:, 1] >= self.y0 - tol)
            & (pts[:, 1] <= self.y1 + tol)
        )

    def intersects(self, other: "Box") -> bool:
        return self.x0 < other.x1 and other.x0 < self.x1 and self.y0 < other.y1 and other.y0 < self.y1


@dataclass(frozen=True)
class RegionTargets:
    h_K: float
    h_V: float
    h_I: float
    h_P: float

    def __post_init__(self):
        if min(self.h_K, self.h_V, self.h_I, self.h_P) <= 0:
            raise ValueError("mesh-width targets must be positive")

    def for_label(self, label: str) -> float:
        return {"K": self.h_K, "V": self.h_V, "I": self.h_I, "P": self.h_P}.get(label, self.h_I)

    @property
    def values(self) -> tuple:
        return (self.h_K, self.h_V, self.h_I, self.h_P)


@dataclass(frozen=True)
class Mesh2D:
    """Conforming triangulation with boundary tags and region labels."""

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    region: np.ndarray = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.ascontiguousarray(self.vertices, dtype=float))
        object.__setattr__(self, "triangles", np.ascontiguousarray(self.triangles, dtype=np.int64))
        object.__setattr__(
            self, "boundary_edges", np.asarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        )
        object.__setattr__(self, "boundary_tags", np.asarray(self.boundary_tags, dtype="<U10"))
        if self.region is None:
            object.__setattr__(self, "region", np.full(len(self.triangles), "Unlabeled", dtype="<U10"))
        else:
            object.__setattr__(self, "region", np.asarray(self.region, dtype="<U10"))
        for arr in (self.vertices, self.triangles, self.boundary_edges, self.boundary_tags, self.region):
            arr.setflags(write=False)

    # -- geometry of elements
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edge_lengths(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return np.stack(
            [np.linalg.norm(p[:, (i + 1) % 3] - p[:, i], axis=1) for i in range(3)], axis=1
        )

    @property
    def element_h(self) -> np.ndarray:
        if "h" not in self._cache:
            self._cache["h"] = self.edge_lengths().max(axis=1)
        return self._cache["h"]

    def inradius(self) -> np.ndarray:
        L = self.edge_lengths()
        return 2.0 * np.abs(self.signed_areas()) / L.sum(axis=1)

    def shape_ratio(self) -> np.ndarray:
        return self.element_h / self.inradius()

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @property
    def area(self) -> float:
        return float(self.signed_areas().sum())

    # -- topology
    def edges(self):
        """Unique edges ``(E, 2)`` (sorted vertex pairs) and ``(T, 3)`` triangle-to-edge ids.

        Local edge ``i`` of a triangle joins its local vertices ``i`` and ``i+1``.
        """
        if "edges" not in self._cache:
            t = self.triangles
            e = np.stack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]], axis=1).reshape(-1, 2)
            e_sorted = np.sort(e, axis=1)
            uniq, inv = np.unique(e_sorted, axis=0, return_inverse=True)
            self._cache["edges"] = (uniq, inv.reshape(-1, 3))
        return self._cache["edges"]

    def edge_tag_map(self) -> dict:
        return {tuple(sorted(map(int, e))): str(tag) for e, tag in zip(self.boundary_edges, self.boundary_tags)}

    def check_conformity(self) -> None:
        """Raise ``ValueError`` unless every edge has two triangles or a boundary tag."""
        uniq, t2e = self.edges()
        counts = np.bincount(t2e.ravel(), minlength=len(uniq))
        if np.any(counts > 2):
            raise ValueError("edge shared by more than two triangles")
        tagged = self.edge_tag_map()
        for idx in np.flatnonzero(counts == 1):
            if tuple(map(int, uniq[idx])) not in tagged:
                raise ValueError(f"untagged boundary edge {tuple(uniq[idx])}")
        for key in tagged:
            j = np.flatnonzero((uniq[:, 0] == key[0]) & (uniq[:, 1] == key[1]))
            if j.size == 0 or counts[j[0]] != 1:
                raise ValueError(f"tagged edge {key} is not a boundary edge")

    def validate(self, upsilon: float = UPSILON) -> None:
        self.check_conformity()
        if np.any(self.signed_areas() <= 0):
            raise ValueError("non-positive triangle area")
        worst = float(self.shape_ratio().max())
        if worst > upsilon:
            raise ValueError(f"shape-regularity violated: {worst:.2f} > {upsilon}")
        if np.any(self.region == "Unlabeled") and not np.all(self.region == "Unlabeled"):
            raise ValueError("partially labeled mesh")

    def with_regions(self, labels) -> "Mesh2D":
        return Mesh2D(self.vertices, self.triangles, self.boundary_edges, self.boundary_tags, labels)

    def label(self, region_fn: Callable[[np.ndarray], np.ndarray]) -> "Mesh2D":
        return self.with_regions(np.asarray(region_fn(self.centroids())))

    # -- text IO
    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"{self.n_vertices} {self.n_triangles} {len(self.boundary_edges)}\n")
        for x, y in self.vertices:
            buf.write(f"{float(x)!r} {float(y)!r}\n")
        for (i, j, k), r in zip(self.triangles, self.region):
            buf.write(f"{i} {j} {k} {r}\n")
        for (i, j), tag in zip(self.boundary_edges, self.boundary_tags):
            buf.write(f"{i} {j} {tag}\n")
        return buf.getvalue()

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "Mesh2D":
        lines = text.strip().splitlines()
        nv, nt, nb = map(int, lines[0].split())
        v = np.array([list(map(float, ln.split())) for ln in lines[1: 1 + nv]]).reshape(-1, 2)
        tri, reg = [], []
        for ln in lines[1 + nv: 1 + nv + nt]:
            a, b, c, r = ln.split()
            tri.append((int(a), int(b), int(c)))
            reg.append(r)
        be, tags = [], []
        for ln in lines[1 + nv + nt: 1 + nv + nt + nb]:
            a, b, tag = ln.split()
            if tag not in TAGS:
                raise ValueError(f"unknown boundary tag {tag!r}")
            be.append((int(a), int(b)))
            tags.append(tag)
        return cls(v, np.array(tri).reshape(-1, 3), np.array(be).reshape(-1, 2), np.array(tags), np.array(reg))

    @classmethod
    def load(cls, path) -> "Mesh2D":
        return cls.from_text(Path(path).read_text())


# ------------------------------------------------------------------ builders


def _boundary_of(triangles: np.ndarray) -> np.ndarray:
    """Edges used by exactly one triangle, oriented as in that triangle."""
    e = np.stack([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]], axis=1).reshape(-1, 2)
    key = np.sort(e, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    return e[counts[inv.ravel()] == 1]


def build_rect_mesh(box: Box, h_target: float, tag: str = TRUNCATION) -> Mesh2D:
    """Structured mesh: ``ceil(L/h)`` cells per direction, two triangles per cell."""
    if h_target <= 0:
        raise ValueError("h_target must be positive")
    if h_target > min(box.width, box.height):
        raise ValueError("h_target larger than the shorter box side")
    nx = int(np.ceil(box.width / h_target - 1e-12))
    ny = int(np.ceil(box.height / h_target - 1e-12))
    return _structured(box, nx, ny, tag)


def _structured(box: Box, nx: int, ny: int, tag: str = TRUNCATION) -> Mesh2D:
    return _tensor(np.linspace(box.x0, box.x1, nx + 1), np.linspace(box.y0, box.y1, ny + 1), tag)


def _tensor(xs: np.ndarray, ys: np.ndarray, tag: str = TRUNCATION) -> Mesh2D:
    nx, ny = xs.size - 1, ys.size - 1
    X, Y = np.meshgrid(xs, ys)
    verts = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    v00 = (j * (nx + 1) + i).ravel()
    v10, v01, v11 = v00 + 1, v00 + nx + 1, v00 + nx + 2
    tris = np.stack([np.column_stack([v00, v10, v11]), np.column_stack([v00, v11, v01])], axis=1).reshape(-1, 3)
    bnd = _boundary_of(tris)
    return Mesh2D(verts, tris, bnd, np.full(len(bnd), tag))


def _grid_lines(breaks, cell: float) -> np.ndarray:
    """Subdivide each interval between sorted breakpoints into cells of size <= cell."""
    breaks = np.unique(np.asarray(breaks, dtype=float))
    pieces = [breaks[:1]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = int(np.ceil((b - a) / cell - 1e-12))
        pieces.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(pieces)


def _ring(r: float, h: float, offset: float) -> np.ndarray:
    m = max(int(np.ceil(2.0 * np.pi * r / h)), 6)
    t = offset * 2.0 * np.pi / m + 2.0 * np.pi * np.arange(m) / m
    return t


def _ring_radii(a: float, b: float, size) -> np.ndarray:
    """Ring radii on ``(a, b]`` spaced ``sqrt(3)/2 size(r)`` (size-equidistributed)."""
    r = np.linspace(a, b, 2001)
    dens = 2.0 / (np.sqrt(3.0) * size(r))
    psi = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(r))])
    n = max(int(np.ceil(psi[-1] - 1e-9)), 1)
    return np.interp(np.linspace(0.0, psi[-1], n + 1)[1:], psi, r)


def build_disk_annulus_mesh(
    R_obs: float,
    R_tr: float,
    h_target: float,
    rings: Sequence[float] = (),
    h_obstacle: float | None = None,
    growth: float = 1.25,
) -> Mesh2D:
    """Annulus ``R_obs <= |x| <= R_tr`` between inscribed polygons.

    Concentric rings about ``h sqrt(3)/2`` apart carry ``ceil(2 pi r / h)``
    points each; neighbouring rings are stitched by a zipper sweep in angle.
    Extra radii in ``rings`` (e.g. a PML interface) are forced to be rings.
    With ``h_obstacle < h_target`` the local size grows from ``h_obstacle`` at
    the obstacle by about ``growth`` per ring until it reaches ``h_target``.
    """
    if not 0 < R_obs < R_tr:
        raise ValueError("need 0 < R_obs < R_tr")
    if h_target >= (R_tr - R_obs) / 2.0:
        raise ValueError("h_target must be below (R_tr - R_obs)/2")
    h0 = h_target if h_obstacle is None else min(float(h_obstacle), h_target)
    if h0 <= 0:
        raise ValueError("h_obstacle must be positive")
    slope = (growth - 1.0) * 2.0 / np.sqrt(3.0)

    def size(r):
        return np.minimum(h_target, h0 + slope * (np.asarray(r) - R_obs))

    knots = sorted({R_obs, R_tr, *[r for r in rings if R_obs < r < R_tr]})
    radii = [R_obs]
    for a, b in zip(knots[:-1], knots[1:]):
        radii.extend(_ring_radii(a, b, size))
    verts, angles, starts = [], [], []
    count = 0
    for i, r in enumerate(radii):
        t = _ring(r, float(size(r)), 0.5 * (i % 2))
        starts.append(count)
        angles.append(t)
        verts.append(np.column_stack([r * np.cos(t), r * np.sin(t)]))
        count += t.size
    verts = np.concatenate(verts)
    tris = []
    for i in range(len(radii) - 1):
        tris.extend(_zipper(angles[i], starts[i], angles[i + 1], starts[i + 1]))
    tris = np.array(tris, dtype=np.int64)
    inner = np.column_stack([starts[0] + np.arange(angles[0].size), starts[0] + (np.arange(angles[0].size) + 1) % angles[0].size])
    n_out = angles[-1].size
    outer = np.column_stack([starts[-1] + np.arange(n_out), starts[-1] + (np.arange(n_out) + 1) % n_out])
    bnd = np.concatenate([inner, outer])
    tags = np.array([OBSTACLE] * len(inner) + [TRUNCATION] * len(outer))
    mesh = Mesh2D(verts, tris, bnd, tags)
    areas = mesh.signed_areas()
    if np.any(areas <= 0):
        raise RuntimeError("annulus triangulation produced inverted elements")
    return mesh


def _zipper(ta: np.ndarray, sa: int, tb: np.ndarray, sb: int) -> list:
    """Stitch two concentric rings (inner angles ``ta``, outer ``tb``) counterclockwise."""
    na, nb = ta.size, tb.size
    # unwrap angles so both sweeps start at the smallest angle and run 2 pi
    a_ang = np.concatenate([ta, ta[:1] + 2.0 * np.pi])
    b_ang = np.concatenate([tb, tb[:1] + 2.0 * np.pi])
    i = j = 0
    out = []
    while i < na or j < nb:
        advance_a = j >= nb or (i < na and a_ang[i + 1] <= b_ang[j + 1])
        ai, bj = sa + i % na, sb + j % nb
        if advance_a:
            out.append((ai, bj, sa + (i + 1) % na))
            i += 1
        else:
            out.append((ai, bj, sb + (j + 1) % nb))
            j += 1
    return out


# ------------------------------------------------------------------ grading


@dataclass(frozen=True)
class GradedDomain:
    """Rectangle with optional rectangular holes (tagged Obstacle)."""

    box: Box
    holes: tuple = ()


class _Refiner:
    """Longest-edge (Rivara) bisection keeping the mesh conforming."""

    def __init__(self, mesh: Mesh2D):
        self.v = [tuple(p) for p in mesh.vertices]
        self.t = [list(map(int, tri)) for tri in mesh.triangles]
        self.alive = [True] * len(self.t)
        self.edge_tris: dict = {}
        for idx, tri in enumerate(self.t):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                self.edge_tris.setdefault((min(a, b), max(a, b)), []).append(idx)
        self.tags = mesh.edge_tag_map()
        self.mid: dict = {}

    def longest(self, idx):
        tri = self.t[idx]
        best, best_len = None, -1.0
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            pa, pb = self.v[a], self.v[b]
            ln = (pa[0] - pb[0]) ** 2 + (pa[1] - pb[1]) ** 2
            key = (min(a, b), max(a, b))
            if ln > best_len * (1 + 1e-12) or (abs(ln - best_len) <= 1e-12 * best_len and key < best):
                best, best_len = key, ln
        return best

    def diameter(self, idx) -> float:
        tri = self.t[idx]
        return max(
            np.hypot(self.v[a][0] - self.v[b][0], self.v[a][1] - self.v[b][1])
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0]))
        )

    def _bisect_edge(self, e):
        a, b = e
        pa, pb = self.v[a], self.v[b]
        m = len(self.v)
        self.v.append(((pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0))
        owners = self.edge_tris.pop(e)
        for key in ((min(a, m), max(a, m)), (min(m, b), max(m, b))):
            self.edge_tris[key] = []
        if e in self.tags:
            tag = self.tags.pop(e)
            self.tags[(min(a, m), max(a, m))] = tag
            self.tags[(min(m, b), max(m, b))] = tag
        for idx in owners:
            tri = self.t[idx]
            for s in range(3):
                u, w = tri[s], tri[(s + 1) % 3]
                if (min(u, w), max(u, w)) == e:
                    break
            c = tri[(s + 2) % 3]
            child1, child2 = [u, m, c], [m, w, c]
            self.alive[idx] = False
            i1, i2 = len(self.t), len(self.t) + 1
            self.t.extend([child1, child2])
            self.alive.extend([True, True])
            self.edge_tris[(min(u, m), max(u, m))].append(i1)
            self.edge_tris[(min(m, w), max(m, w))].append(i2)
            self.edge_tris[(min(m, c), max(m, c))] = [i1, i2]
            for edge, new in (((c, u), i1), ((w, c), i2)):
                key = (min(edge), max(edge))
                lst = self.edge_tris[key]
                lst[lst.index(idx)] = new
        return m

    def refine(self, idx):
        """Bisect triangle ``idx`` along its longest-edge propagation path."""
        while self.alive[idx]:
            cur = idx
            while True:
                e = self.longest(cur)
                nbs = [j for j in self.edge_tris[e] if j != cur]
                if not nbs or self.longest(nbs[0]) == e:
                    self._bisect_edge(e)
                    break
                cur = nbs[0]

    def mesh(self) -> Mesh2D:
        keep = [i for i, a in enumerate(self.alive) if a]
        tris = np.array([self.t[i] for i in keep], dtype=np.int64)
        verts = np.array(self.v)
        be = np.array(list(self.tags.keys()), dtype=np.int64).reshape(-1, 2)
        tags = np.array(list(self.tags.values()))
        return Mesh2D(verts, tris, be, tags)


def _sample_points(mesh_v, tri) -> np.ndarray:
    p = mesh_v[tri]
    mids = (p + np.roll(p, -1, axis=-2)) / 2.0
    cen = p.mean(axis=-2, keepdims=True)
    return np.concatenate([p, mids, cen], axis=-2)


def grade_mesh_by_region(
    domain: GradedDomain,
    targets: RegionTargets,
    region_fn: Callable[[np.ndarray], np.ndarray],
    max_ratio: float = 2.0,
    max_bands: int = 6,
) -> Mesh2D:
    """Refine a structured mesh until ``h_T <= h_label`` for every label ``T`` touches.

    ``h_T`` is the triangle diameter. The base mesh has diameter
    ``max(targets)``; holes are removed and their edges tagged Obstacle. A
    triangle touches a label when one of its vertices, edge midpoints or its
    centroid is classified with it. The base grid lines pass through every
    hole edge, so holes are meshed exactly. Longest-edge bisection keeps neighbouring
    sizes within a factor 2, so overall ratios above ``max_ratio**max_bands``
    are rejected as infeasible.
    """
    hmax, hmin = max(targets.values), min(targets.values)
    if hmax / hmin > max_ratio**max_bands:
        raise ValueError(
            f"target ratio {hmax / hmin:.1f} exceeds max grading {max_ratio}^{max_bands}"
        )
    box = domain.box
    cell = hmax / np.sqrt(2.0)
    xb = [box.x0, box.x1] + [c for hole in domain.holes for c in (hole.x0, hole.x1) if box.x0 < c < box.x1]
    yb = [box.y0, box.y1] + [c for hole in domain.holes for c in (hole.y0, hole.y1) if box.y0 < c < box.y1]
    base = _tensor(_grid_lines(xb, cell), _grid_lines(yb, cell))
    if domain.holes:
        cen = base.centroids()
        inside = np.zeros(len(cen), dtype=bool)
        for hole in domain.holes:
            inside |= hole.contains(cen)
        tris = base.triangles[~inside]
        bnd = _boundary_of(tris)
        v = base.vertices
        on_outer = np.zeros(len(bnd), dtype=bool)
        for a in (0, 1):
            pa = v[bnd[:, a]]
            on_outer_a = (
                np.isclose(pa[:, 0], box.x0) | np.isclose(pa[:, 0], box.x1)
                | np.isclose(pa[:, 1], box.y0) | np.isclose(pa[:, 1], box.y1)
            )
            on_outer = on_outer_a if a == 0 else on_outer & on_outer_a
        mid = v[bnd].mean(axis=1)
        outer_mid = (
            np.isclose(mid[:, 0], box.x0) | np.isclose(mid[:, 0], box.x1)
            | np.isclose(mid[:, 1], box.y0) | np.isclose(mid[:, 1], box.y1)
        )
        tags = np.where(on_outer & outer_mid, TRUNCATION, OBSTACLE)
        base = Mesh2D(v, tris, bnd, tags)
    ref = _Refiner(base)
    lab_h = {lab: targets.for_label(lab) for lab in ("K", "V", "I", "P")}
    changed = True
    while changed:
        changed = False
        alive = [i for i, a in enumerate(ref.alive) if a]
        verts = np.array(ref.v)
        tri = np.array([ref.t[i] for i in alive])
        pts = _sample_points(verts, tri)
        labels = np.asarray(region_fn(pts.reshape(-1, 2))).reshape(len(alive), -1)
        need = np.full(len(alive), np.inf)
        for lab, hv in lab_h.items():
            need = np.where(np.any(labels == lab, axis=1), np.minimum(need, hv), need)
        p = verts[tri]
        diam = np.max(np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2), axis=1)
        bad = [alive[i] for i in np.flatnonzero(diam > need * (1 + 1e-9))]
        for idx in bad:
            if ref.alive[idx]:
                ref.refine(idx)
                changed = True
    mesh = _compact(ref.mesh())
    return mesh.label(region_fn)


def _compact(mesh: Mesh2D) -> Mesh2D:
    used = np.unique(mesh.triangles)
    remap = -np.ones(mesh.n_vertices, dtype=np.int64)
    remap[used] = np.arange(used.size)
    return Mesh2D(
        mesh.vertices[used], remap[mesh.triangles], remap[mesh.boundary_edges], mesh.boundary_tags, mesh.region
    )


def max_neighbor_ratio(mesh: Mesh2D) -> float:
    """Largest diameter ratio between triangles sharing an edge."""
    _, t2e = mesh.edges()
    h = mesh.element_h
    flat = t2e.ravel()
    owner = np.repeat(np.arange(mesh.n_triangles), 3)
    order = np.argsort(flat, kind="stable")
    f, o = flat[order], owner[order]
    pair = f[1:] == f[:-1]
    a, b = o[:-1][pair], o[1:][pair]
    if a.size == 0:
        return 1.0
    return float(np.max(np.maximum(h[a], h[b]) / np.minimum(h[a], h[b])))


# ------------------------------------------------------------------ regions


def classify_regions_two_rect(boxes: Sequence[Box], r_pml: float, margin: float = 0.0):
    """Region labels for two aligned rectangles facing each other across a gap.

    ``K`` is the slab between the facing sides over their common span, ``V``
    the two axis-aligned beams continuing the slab past its open ends, ``P``
    the set ``|x| >= r_pml`` and ``I`` the rest. ``margin`` widens K and V.
    """
    if len(boxes) != 2:
        raise ValueError("exactly two boxes required")
    b1, b2 = boxes
    if not all(isinstance(b, Box) for b in boxes):
        raise ValueError("boxes must be axis-aligned Box instances")
    if b1.intersects(b2):
        raise ValueError("boxes overlap")
    if b1.x1 <= b2.x0 or b2.x1 <= b1.x0:
        left, right = (b1, b2) if b1.x1 <= b2.x0 else (b2, b1)
        g0, g1 = left.x1, right.x0
        s0, s1 = max(left.y0, right.y0), min(left.y1, right.y1)
        axis = 0
    else:
        low, high = (b1, b2) if b1.y1 <= b2.y0 else (b2, b1)
        g0, g1 = low.y1, high.y0
        s0, s1 = max(low.x0, high.x0), min(low.x1, high.x1)
        axis = 1
    has_cavity = s1 > s0

    def region_fn(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a = pts[:, axis]  # coordinate across the gap
        s = pts[:, 1 - axis]  # coordinate along the facing sides
        out = np.full(len(pts), "I", dtype="<U10")
        in_gap = (a > g0 - margin) & (a < g1 + margin)
        if has_cavity:
            in_span = (s > s0 - margin) & (s < s1 + margin)
            out[in_gap & ~in_span] = "V"
            out[in_gap & in_span] = "K"
        out[np.hypot(pts[:, 0], pts[:, 1]) >= r_pml] = "P"
        return out

    return region_fn

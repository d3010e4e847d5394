"""Parallel overlapping Schwarz iteration with Cartesian PMLs on subdomain boundaries.

``Omega_int = (0, L1) x (0, L2)`` is covered by overlapping boxes ``Omega_int,j``.
Each box is extended outward by a PML of width ``kappa`` on edges lying on
``d Omega_int`` and ``kappa0`` on interior edges, giving ``Omega_j``. The
global domain ``Omega`` is ``Omega_int`` extended by ``kappa`` on every side.

One step solves, for every ``j``, the subdomain problem with its own PML and
the current iterate as Dirichlet data, then glues with a partition of unity:

    u_j = u^n + R_j^T A_j^{-1} R_j (f - A u^n),    u^{n+1} = sum_j chi_j u_j,

which is restricted additive Schwarz with PML-modified local matrices.
"""

from __future__ import annotations

import csv
import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .fem import AssembledSystem, FemSpace, WeightedNorm, assemble_matrix, build_space, constrain, gram, load_vector
from .geometry import Box, Mesh2D, build_rect_mesh
from .linalg import SingularMatrixError, SparseLU
from .medium import UNIT_FIELD, CartesianPmlMedium, CoefficientField, PmlCartesianSpec

log = logging.getLogger(__name__)

STRIP = "Strip"
CHECKERBOARD = "Checkerboard"
DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class Decomposition:
    """Overlapping boxes with per-edge PML widths ``(left, right, bottom, top)``."""

    interior: Box
    boxes: tuple
    widths: tuple
    grid_index: tuple
    kind: str
    shape: tuple
    delta: float
    kappa: float
    kappa0: float
    kappa_lin: float
    sigma: float

    @property
    def n_subdomains(self) -> int:
        return len(self.boxes)

    @property
    def outer(self) -> Box:
        b, w = self.interior, self.kappa
        return Box(b.x0 - w, b.x1 + w, b.y0 - w, b.y1 + w)

    def global_spec(self) -> PmlCartesianSpec:
        return PmlCartesianSpec(self.interior, (self.kappa,) * 4, self.kappa_lin, self.sigma)

    def subdomain_spec(self, j: int) -> PmlCartesianSpec:
        return PmlCartesianSpec(self.boxes[j], self.widths[j], self.kappa_lin, self.sigma)

    def subdomain_box(self, j: int) -> Box:
        return self.subdomain_spec(j).outer


def _intervals(L: float, n: int, delta: float):
    y = np.linspace(0.0, L, n + 1)
    lo = np.where(np.arange(n) == 0, 0.0, y[:-1] - delta)
    hi = np.where(np.arange(n) == n - 1, L, y[1:] + delta)
    return lo, hi


def build_decomposition(
    L: tuple,
    kind: str,
    n,
    delta: float,
    kappa: float,
    kappa0: float,
    kappa_lin: float | None = None,
    sigma: float = 1.0,
) -> Decomposition:
    """Strip(N) (slabs in x) or Checkerboard(N1, N2) of ``(0, L1) x (0, L2)``.

    Grid cells are extended by ``delta`` on interior sides. Raises
    ``ValueError`` when a PML-extended subdomain meets a non-neighbour.
    """
    L1, L2 = map(float, L)
    if kind == STRIP:
        shape = (int(n), 1)
    elif kind == CHECKERBOARD:
        shape = tuple(int(v) for v in n)
        if len(shape) != 2:
            raise ValueError("checkerboard needs (N1, N2)")
    else:
        raise ValueError(f"unknown decomposition kind {kind!r}")
    if min(shape) < 1:
        raise ValueError("subdomain counts must be positive")
    if delta <= 0:
        raise ValueError("overlap delta must be positive")
    if kappa_lin is None:
        kappa_lin = 0.25 * min(kappa, kappa0)
    if not (kappa > kappa_lin and kappa0 > kappa_lin):
        raise ValueError("PML widths must exceed kappa_lin")
    if any(delta >= Lc / nc for Lc, nc in zip((L1, L2), shape) if nc > 1):
        raise ValueError("overlap delta must be smaller than the cell width")
    xs, ys = _intervals(L1, shape[0], delta), _intervals(L2, shape[1], delta)
    boxes, widths, index = [], [], []
    for i, j in itertools.product(range(shape[0]), range(shape[1])):
        b = Box(xs[0][i], xs[1][i], ys[0][j], ys[1][j])
        w = (
            kappa if i == 0 else kappa0,
            kappa if i == shape[0] - 1 else kappa0,
            kappa if j == 0 else kappa0,
            kappa if j == shape[1] - 1 else kappa0,
        )
        boxes.append(b)
        widths.append(w)
        index.append((i, j))
    dec = Decomposition(Box(0.0, L1, 0.0, L2), tuple(boxes), tuple(widths), tuple(index), kind, shape,
                        float(delta), float(kappa), float(kappa0), float(kappa_lin), float(sigma))
    for a, b in itertools.combinations(range(dec.n_subdomains), 2):
        (ia, ja), (ib, jb) = index[a], index[b]
        if max(abs(ia - ib), abs(ja - jb)) > 1 and _open_overlap(dec.subdomain_box(a), dec.subdomain_box(b)):
            raise ValueError(
                f"subdomains {a} and {b} are not neighbours but overlap; "
                "reduce delta or kappa0 (need cell width >= 2 delta + 2 kappa0)"
            )
    return dec


def _open_overlap(a: Box, b: Box) -> bool:
    return min(a.x1, b.x1) > max(a.x0, b.x0) and min(a.y1, b.y1) > max(a.y0, b.y0)


def crossing_number(dec: Decomposition, n_field: CoefficientField = UNIT_FIELD) -> int:
    """Closed-form crossing number for straight rays (n identically 1)."""
    if not n_field.is_constant:
        raise ValueError(
            "crossing numbers are only available in closed form for n == 1; "
            "variable coefficients need ray-word enumeration, which is not implemented"
        )
    return int(sum(dec.shape) - (len(dec.shape) - 1))


# ---------------------------------------------------------------- partition of unity


def smoothstep(t):
    """Quintic ``C^2`` ramp from 0 (t <= 0) to 1 (t >= 1) with ``s(t) + s(1 - t) = 1``."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def _ramp(x, lo, hi, L, delta):
    """1D weight: zero outside ``(lo, hi)`` on interior sides, smoothstep across the 2 delta overlap."""
    out = np.ones_like(x)
    if lo > 0.0:
        out *= smoothstep((x - lo) / (2.0 * delta))
    if hi < L:
        out *= smoothstep((hi - x) / (2.0 * delta))
    return out


def partition_of_unity(dec: Decomposition, points) -> np.ndarray:
    """``chi_j`` at ``points``; shape ``(N, len(points))``.

    Each weight is 1 in the part of ``Omega_int,j`` not shared with a neighbour,
    ramps across the shared overlap and vanishes outside ``Omega_int,j`` on
    interior sides, hence on the subdomain-only PML. On sides at the global
    boundary it is constant in the normal direction.
    """
    pts = np.atleast_2d(points)
    L1, L2 = dec.interior.x1, dec.interior.y1
    chi = np.empty((dec.n_subdomains, len(pts)))
    for j, b in enumerate(dec.boxes):
        chi[j] = _ramp(pts[:, 0], b.x0, b.x1, L1, dec.delta) * _ramp(pts[:, 1], b.y0, b.y1, L2, dec.delta)
    total = chi.sum(axis=0)
    if np.any(total <= 0):
        raise ValueError("partition of unity has uncovered points")
    return chi / total


@dataclass(frozen=True)
class PartitionOfUnity:
    weights: np.ndarray

    def check(self, tol: float = 1e-12) -> float:
        err = float(np.abs(self.weights.sum(axis=0) - 1.0).max())
        if err > tol or np.any(self.weights < 0):
            raise ValueError(f"partition of unity violated (sum error {err:.1e})")
        return err


def build_partition_of_unity(dec: Decomposition, space: FemSpace) -> PartitionOfUnity:
    return PartitionOfUnity(partition_of_unity(dec, space.dof_coords))


# ---------------------------------------------------------------- discrete problem


@dataclass
class Subdomain:
    index: int
    triangles: np.ndarray
    dofs: np.ndarray
    lu: SparseLU


@dataclass
class SchwarzProblem:
    """Global system on ``Omega`` plus factorized subdomain systems."""

    dec: Decomposition
    space: FemSpace
    k: float
    system: AssembledSystem
    subdomains: list
    pou: PartitionOfUnity
    norm_gram: object = None
    _ref: dict = field(default_factory=dict, repr=False)

    @property
    def n_dofs(self) -> int:
        return self.space.n_dofs

    def residual(self, u) -> np.ndarray:
        r = self.system.load - self.system.full @ u
        r[self.space.dirichlet] = 0.0
        return r

    def reference(self) -> np.ndarray:
        """Direct solution of the global discrete problem."""
        if "u" not in self._ref:
            self._ref["u"] = self.system.expand(SparseLU(self.system.matrix).solve(self.system.rhs))
        return self._ref["u"]

    def h1k_norm(self, v) -> float:
        return float(np.sqrt(max(np.real(np.vdot(v, self.norm_gram @ v)), 0.0)))


def _subdomain_triangles(mesh: Mesh2D, box: Box) -> np.ndarray:
    return np.flatnonzero(box.contains(mesh.centroids(), tol=1e-12))


def _interior_dofs(space: FemSpace, tri: np.ndarray) -> np.ndarray:
    """DOFs all of whose triangles lie in ``tri``, minus global Dirichlet DOFs."""
    n = space.n_dofs
    total = np.bincount(space.cell_dofs.ravel(), minlength=n)
    inside = np.bincount(space.cell_dofs[tri].ravel(), minlength=n)
    ok = (inside == total) & (inside > 0) & ~space.dirichlet
    return np.flatnonzero(ok)


def build_problem(
    dec: Decomposition,
    k: float,
    h: float,
    source,
    p: int = 1,
    n_field: CoefficientField = UNIT_FIELD,
) -> SchwarzProblem:
    """Mesh ``Omega`` uniformly, assemble the global system and factor every subdomain."""
    mesh = build_rect_mesh(dec.outer, h)
    space = build_space(mesh, p)
    medium = CartesianPmlMedium(dec.global_spec(), n_field)
    full = assemble_matrix(space, medium, k)
    system = constrain(space, full, k, load=load_vector(space, source))
    subs = []
    for j in range(dec.n_subdomains):
        tri = _subdomain_triangles(mesh, dec.subdomain_box(j))
        Aj = assemble_matrix(space, CartesianPmlMedium(dec.subdomain_spec(j), n_field), k, triangles=tri)
        dofs = _interior_dofs(space, tri)
        try:
            lu = SparseLU(Aj[dofs][:, dofs])
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"subdomain {j}: factorization failed ({exc})") from exc
        subs.append(Subdomain(j, tri, dofs, lu))
    pou = build_partition_of_unity(dec, space)
    pou.check()
    G = gram(space, WeightedNorm(1, k))
    return SchwarzProblem(dec, space, float(k), system, subs, pou, G)


# ---------------------------------------------------------------- iteration


@dataclass(frozen=True)
class SchwarzState:
    u: np.ndarray
    n: int = 0


def _local_corrections(problem: SchwarzProblem, r: np.ndarray) -> np.ndarray:
    out = np.zeros(problem.n_dofs, dtype=complex)
    chi = problem.pou.weights
    for sub in problem.subdomains:  # independent solves, reduced in index order
        d = sub.lu.solve(r[sub.dofs])
        out[sub.dofs] += chi[sub.index, sub.dofs] * d
    return out


def schwarz_step(problem: SchwarzProblem, state: SchwarzState) -> SchwarzState:
    """``u^{n+1} = u^n + sum_j chi_j R_j^T A_j^{-1} R_j (f - A u^n)``."""
    r = problem.residual(state.u)
    return SchwarzState(state.u + _local_corrections(problem, r), state.n + 1)


def ras_apply(problem: SchwarzProblem, v) -> np.ndarray:
    """Restricted additive Schwarz (PML local matrices) applied to a residual vector."""
    v = np.asarray(v, dtype=complex).copy()
    v[problem.space.dirichlet] = 0.0
    return _local_corrections(problem, v)


@dataclass
class SchwarzHistory:
    abs_error: list
    rel_error: list
    wallclock_ms: list
    n_cross: int

    @property
    def contraction_at_cross(self) -> float:
        n = min(self.n_cross, len(self.abs_error) - 1)
        return self.abs_error[n] / self.abs_error[0]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "abs_error_H1k", "rel_error", "wallclock_ms"])
            for i, (a, r, t) in enumerate(zip(self.abs_error, self.rel_error, self.wallclock_ms)):
                w.writerow([i, repr(a), repr(r), repr(t)])


class SchwarzDivergence(RuntimeError):
    def __init__(self, msg, history):
        super().__init__(msg)
        self.history = history


def run_schwarz(problem: SchwarzProblem, max_iters: int, u0=None, n_field: CoefficientField = UNIT_FIELD) -> SchwarzHistory:
    """Iterate from ``u0`` (default 0) and record ``||u - u^n||_{H^1_k(Omega)}``."""
    u_ref = problem.reference()
    ref_norm = problem.h1k_norm(u_ref)
    state = SchwarzState(np.zeros(problem.n_dofs, dtype=complex) if u0 is None else np.asarray(u0, dtype=complex))
    e0 = problem.h1k_norm(u_ref - state.u)
    hist = SchwarzHistory([e0], [e0 / ref_norm], [0.0], crossing_number(problem.dec, n_field))
    t0 = time.perf_counter()
    for _ in range(max_iters):
        state = schwarz_step(problem, state)
        e = problem.h1k_norm(u_ref - state.u)
        hist.abs_error.append(e)
        hist.rel_error.append(e / ref_norm)
        hist.wallclock_ms.append(1e3 * (time.perf_counter() - t0))
        if e > DIVERGENCE_FACTOR * max(e0, 1e-300):
            raise SchwarzDivergence(f"Schwarz iteration diverged at n={state.n}: error {e:.2e}", hist)
    return hist


def gaussian_source(center, width: float, amplitude: float = 1.0):
    c = np.asarray(center, dtype=float)

    def f(x):
        d2 = np.sum((np.atleast_2d(x) - c) ** 2, axis=1)
        return amplitude * np.exp(-0.5 * d2 / width**2)

    return f

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helmbench.fem import (
    PlaneWave,
    SolverConfig,
    WeightedNorm,
    assemble,
    assemble_matrix,
    best_approximation,
    build_space,
    constrain,
    element_matrices,
    error_norm,
    expected_dof_count,
    gram,
    load_vector,
    scattering_rhs,
    scattering_system,
    shape_functions,
    solve_fem,
    triangle_rule,
    write_solution_csv,
)
from helmbench.fem.space import reference_nodes
from helmbench.geometry import OBSTACLE, TRUNCATION, Box, Mesh2D, build_disk_annulus_mesh, build_rect_mesh
from helmbench.linalg import SparseLU
from helmbench.medium import UNMULTIPLIED, PhysicalMedium, PmlRadialSpec, RadialPmlMedium
from helmbench.reference import MieSolution

from oracles import slope

UNIT = Box(0.0, 1.0, 0.0, 1.0)


class _Zero:
    def coefficients(self, x):
        x = np.atleast_2d(x)
        return np.zeros((len(x), 2, 2), dtype=complex), np.zeros(len(x), dtype=complex), None


def _reference_triangle():
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return Mesh2D(v, [[0, 1, 2]], [[0, 1], [1, 2], [2, 0]], [TRUNCATION] * 3)


# ---------------------------------------------------------------- quadrature and basis


@pytest.mark.parametrize("order", range(0, 11))
def test_triangle_rule_exact(order):
    qp, qw = triangle_rule(order)
    assert qw.sum() == pytest.approx(0.5, abs=1e-15)
    from math import factorial

    for a in range(order + 1):
        for b in range(order + 1 - a):
            exact = factorial(a) * factorial(b) / factorial(a + b + 2)
            assert np.sum(qw * qp[:, 0] ** a * qp[:, 1] ** b) == pytest.approx(exact, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_shape_functions_nodal_and_partition(p):
    nodes = reference_nodes(p)
    vals, grads = shape_functions(p, nodes)
    assert np.allclose(vals, np.eye(len(nodes)), atol=1e-12)
    pts = np.random.default_rng(p).uniform(0, 0.5, (20, 2))
    vals, grads = shape_functions(p, pts)
    assert np.allclose(vals.sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(grads.sum(axis=1), 0.0, atol=1e-10)


# ---------------------------------------------------------------- spaces


def test_dof_counts_unit_square():
    m = build_rect_mesh(UNIT, 0.5)
    assert build_space(m, 1).n_dofs == 9
    n_edges = len(m.edges()[0])
    assert n_edges == 16
    assert build_space(m, 2).n_dofs == 9 + n_edges
    assert build_space(m, 3).n_dofs == expected_dof_count(m, 3) == 9 + 2 * n_edges + 8


def test_rejects_degree():
    with pytest.raises(ValueError):
        build_space(build_rect_mesh(UNIT, 0.5), 4)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_obstacle_dofs_constrained(p):
    m = build_disk_annulus_mesh(1.0, 2.0, 0.3)
    sp = build_space(m, p)
    on_obs = np.abs(np.hypot(*sp.dof_coords.T) - 1.0) < 1e-12
    # vertices lie on the circle; edge nodes lie on the polygon chords
    obstacle = sp.dof_tags == OBSTACLE
    assert np.all(obstacle[on_obs])
    assert np.all(sp.dirichlet[obstacle])
    e = m.boundary_edges[m.boundary_tags == OBSTACLE]
    assert obstacle.sum() == len(e) * p


@pytest.mark.parametrize("p", [2, 3])
def test_shared_edge_dofs_agree(p):
    sp = build_space(build_disk_annulus_mesh(1.0, 2.0, 0.4), p)
    from helmbench.fem.norms import evaluate

    u = sp.interpolate(lambda x: x[:, 0] ** p + 2 * x[:, 1] - x[:, 0] * x[:, 1])
    # a degree-p polynomial is reproduced exactly only if shared DOFs are consistent
    idx = np.arange(sp.mesh.n_triangles)
    X, _, vals, _ = evaluate(sp, u, idx, 2 * p)
    exact = X[..., 0] ** p + 2 * X[..., 1] - X[..., 0] * X[..., 1]
    assert np.max(np.abs(vals - exact)) < 1e-11


# ---------------------------------------------------------------- assembly


def test_reference_local_matrix():
    sp = build_space(_reference_triangle(), 1)
    K = element_matrices(sp, PhysicalMedium(), 1.0, np.array([0]), 2)[0]
    stiff = np.array([[1, -0.5, -0.5], [-0.5, 0.5, 0], [-0.5, 0, 0.5]])
    mass = np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]) / 24.0
    assert np.allclose(K, stiff - mass, atol=1e-15)


def test_zero_coefficients_zero_matrix():
    sp = build_space(build_rect_mesh(UNIT, 0.25), 2)
    assert abs(assemble_matrix(sp, _Zero(), 3.0)).max() == 0.0


@pytest.mark.parametrize("p", [1, 2])
def test_multiplied_complex_symmetric(p):
    sp = build_space(build_disk_annulus_mesh(1.0, 2.5, 0.25, rings=(1.5,)), p)
    A = assemble_matrix(sp, RadialPmlMedium(PmlRadialSpec(1.25, 1.5, 2.5, 0.6)), 5.0)
    assert abs(A - A.T).max() < 1e-14 * abs(A).max()
    assert abs(A - A.conj().T).max() > 1e-3  # complex symmetric, not Hermitian


def test_unmultiplied_not_symmetric():
    sp = build_space(build_disk_annulus_mesh(1.0, 2.5, 0.25, rings=(1.5,)), 1)
    A = assemble_matrix(sp, RadialPmlMedium(PmlRadialSpec(1.25, 1.5, 2.5, 0.6, UNMULTIPLIED)), 5.0)
    assert abs(A - A.T).max() > 1e-6


def test_assembly_deterministic():
    sp = build_space(build_disk_annulus_mesh(1.0, 2.5, 0.2, rings=(1.5,)), 2)
    med = RadialPmlMedium(PmlRadialSpec(1.25, 1.5, 2.5, 0.6))
    a, b = assemble_matrix(sp, med, 4.0), assemble_matrix(sp, med, 4.0)
    assert np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.data, b.data)


def test_quad_order_too_low():
    sp = build_space(build_rect_mesh(UNIT, 0.5), 2)
    with pytest.raises(ValueError):
        assemble_matrix(sp, PhysicalMedium(), 1.0, quad_order=3)


def test_load_vector_integrates_constant():
    sp = build_space(build_rect_mesh(UNIT, 0.25), 2)
    f = load_vector(sp, lambda x: np.full(len(x), 2.0))
    assert f.sum() == pytest.approx(2.0, abs=1e-13)


def test_dirichlet_lifting():
    sp = build_space(build_rect_mesh(UNIT, 0.25), 1)
    full = assemble_matrix(sp, PhysicalMedium(), 2.0)
    g = sp.interpolate(lambda x: 1.0 + x[:, 0])
    sys_ = constrain(sp, full, 2.0, dirichlet_values=g)
    u = solve_fem(sys_)
    assert np.allclose(u[sp.dirichlet], g[sp.dirichlet])
    r = full @ u
    assert np.max(np.abs(r[sp.free])) < 1e-10


# ---------------------------------------------------------------- scattering data


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.0, max_value=2 * np.pi), st.floats(min_value=0.5, max_value=50.0))
def test_plane_wave_at_origin(angle, k):
    pw = PlaneWave(k, angle)
    assert pw(np.zeros((1, 2)))[0] == pytest.approx(1.0)
    assert np.allclose(np.abs(pw(np.random.default_rng(0).uniform(-3, 3, (5, 2)))), 1.0)


def test_no_obstacle_zero_solution():
    sp = build_space(build_rect_mesh(UNIT, 0.25), 2)
    sys_ = scattering_system(sp, PhysicalMedium(), 7.0, 0.3)
    assert np.all(sys_.rhs == 0)
    assert np.all(solve_fem(sys_) == 0)


def test_scattering_dirichlet_data():
    sp = build_space(build_disk_annulus_mesh(1.0, 2.0, 0.25), 2)
    k, a = 3.0, np.array([0.6, 0.8])
    rhs, g = scattering_rhs(sp, PhysicalMedium(), k, a)
    obs = sp.dof_tags == OBSTACLE
    assert np.allclose(g[obs], -np.exp(1j * k * sp.dof_coords[obs] @ a))
    assert np.all(g[sp.dof_tags == TRUNCATION] == 0)
    assert rhs.shape == (sp.free.size,)


@pytest.mark.parametrize("p", [1, 2])
def test_incident_residual_rate(p):
    """The interpolated plane wave nearly satisfies the discrete equations."""
    k, pw = 10.0, PlaneWave(10.0, (0.6, 0.8))
    hs, res = [1 / 8, 1 / 16, 1 / 32], []
    for h in hs:
        sp = build_space(build_rect_mesh(UNIT, h), p)
        r = (assemble_matrix(sp, PhysicalMedium(), k) @ sp.interpolate(pw))[sp.free]
        G = gram(sp, WeightedNorm(1, k))[sp.free][:, sp.free]
        res.append(np.sqrt(np.real(np.vdot(r, SparseLU(G).solve(r)))))
    assert slope(hs, res) >= p - 0.3


# ---------------------------------------------------------------- norms


@pytest.mark.parametrize("p", [1, 2, 3])
def test_interpolant_of_polynomial(p):
    sp = build_space(build_disk_annulus_mesh(1.0, 2.0, 0.3), p)
    poly = lambda x: (x[:, 0] ** p - 0.5 * x[:, 1] ** p + 1j * x[:, 0] * x[:, 1] ** (p - 1))

    def ref(x):
        X, Y = x[:, 0], x[:, 1]
        gx = p * X ** (p - 1) + 1j * Y ** (p - 1)
        gy = -0.5 * p * Y ** (p - 1) + 1j * (p - 1) * X * Y ** max(p - 2, 0) if p > 1 else -0.5 + 0j * X
        return poly(x), np.column_stack([gx, gy * np.ones_like(X)])

    u = sp.interpolate(poly)
    assert error_norm(sp, u, ref, WeightedNorm(1, 2.0)) < 1e-11
    assert best_approximation(sp, ref, WeightedNorm(0, 2.0)) < 1e-9


def test_constant_l2():
    sp = build_space(build_rect_mesh(Box(0, 2, 0, 1.5), 0.25), 1)
    c = 2 - 1j
    ref = lambda x: (np.full(len(x), c), np.zeros((len(x), 2), dtype=complex))
    assert error_norm(sp, 0, ref, WeightedNorm(0, 1.0)) == pytest.approx(abs(c) * np.sqrt(3.0), rel=1e-13)


def test_plane_wave_h1k_norm():
    k = 12.0
    sp = build_space(build_rect_mesh(UNIT, 0.1), 1)
    ref = PlaneWave(k, 0.0).field
    assert error_norm(sp, 0, ref, WeightedNorm(1, k)) == pytest.approx(np.sqrt(2.0), rel=1e-10)


def test_masked_norm():
    sp = build_space(build_rect_mesh(UNIT, 0.25), 1)
    ref = lambda x: (np.ones(len(x), dtype=complex), np.zeros((len(x), 2), dtype=complex))
    mask = sp.mesh.centroids()[:, 0] < 0.5
    assert error_norm(sp, 0, ref, WeightedNorm(0, 1.0), mask) == pytest.approx(np.sqrt(0.5))


def test_weighted_norm_validation():
    with pytest.raises(ValueError):
        WeightedNorm(2, 1.0)
    with pytest.raises(ValueError):
        WeightedNorm(1, 0.0)


@pytest.mark.parametrize("p", [1, 2])
def test_plane_wave_best_approximation_rates(p):
    k, ref = 10.0, PlaneWave(10.0, (0.6, 0.8)).field
    hs = [0.1, 0.05, 0.025]
    sps_ = [build_space(build_rect_mesh(UNIT, h), p) for h in hs]
    e0 = [best_approximation(s, ref, WeightedNorm(0, k)) for s in sps_]
    e1 = [best_approximation(s, ref, WeightedNorm(1, k)) for s in sps_]
    assert abs(slope(hs, e0) - (p + 1)) <= 0.3
    assert abs(slope(hs, e1) - p) <= 0.3


# ---------------------------------------------------------------- solvers


def test_solve_mass_system_direct_vs_gmres():
    sp = build_space(build_rect_mesh(UNIT, 0.1), 1)
    G = gram(sp, WeightedNorm(0, 1.0)).astype(complex)
    f = load_vector(sp, lambda x: np.exp(1j * x[:, 0]) + x[:, 1])
    sys_ = constrain(sp, G.tocsr(), 1.0, load=f)
    ud = solve_fem(sys_)
    ug, stats = solve_fem(sys_, SolverConfig(method="gmres", tol=1e-12, blocks=0), return_stats=True)
    assert stats.converged
    assert np.linalg.norm(ud - ug) <= 1e-8 * np.linalg.norm(ud)


def test_scattering_direct_vs_gmres_k10():
    k = 10.0
    mesh = build_disk_annulus_mesh(1.0, 3.0, 0.1, rings=(1.5, 2.0))
    sp = build_space(mesh, 1)
    sys_ = scattering_system(sp, RadialPmlMedium(PmlRadialSpec(1.5, 2.0, 3.0, np.pi / 4)), k)
    ud = solve_fem(sys_)
    ug, stats = solve_fem(sys_, SolverConfig(method="gmres", tol=1e-10, restart=50), return_stats=True)
    assert stats.converged
    assert np.linalg.norm(ud - ug) <= 1e-6 * np.linalg.norm(ud)


def test_unknown_solver():
    sys_ = assemble(build_space(build_rect_mesh(UNIT, 0.5), 1), PhysicalMedium(), 1.0)
    with pytest.raises(ValueError):
        solve_fem(sys_, SolverConfig(method="magic"))


def test_scattering_agrees_with_mie():
    k = 4.0
    spec = PmlRadialSpec(1.5, 2.0, 3.0, np.pi / 4)
    mesh = build_disk_annulus_mesh(1.0, 3.0, 0.1, rings=(1.5, 2.0), h_obstacle=0.03)
    sp = build_space(mesh, 2)
    u = solve_fem(scattering_system(sp, RadialPmlMedium(spec), k, 0.4))
    mie = MieSolution(k, direction=0.4)
    mask = np.hypot(*mesh.centroids().T) < 1.5
    rel = error_norm(sp, u, mie.scattered, WeightedNorm(1, k), mask) / error_norm(sp, 0, mie.scattered, WeightedNorm(1, k), mask)
    assert rel < 5e-3


def test_solution_csv(tmp_path):
    sp = build_space(build_rect_mesh(UNIT, 0.5), 1)
    u = np.arange(sp.n_dofs) * (1 + 2j)
    write_solution_csv(tmp_path / "u.csv", sp, u)
    rows = (tmp_path / "u.csv").read_text().splitlines()
    assert rows[0] == "x,y,re_u,im_u"
    assert len(rows) == sp.n_dofs + 1
    assert rows[-1].split(",")[2:] == ["8.0", "16.0"]

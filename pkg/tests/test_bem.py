import mpmath
import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from helmbench.bem_circle import (
    BieOperator,
    BoundaryGrid,
    assemble_bie,
    bessel,
    discrete_norms,
    exact_density,
    jy_table,
    layer_symbol,
    plane_wave_data,
    plane_wave_rhs,
    single_layer_far_field,
    solve_bie_and_metrics,
    symbol_table,
)
from helmbench.bem_circle.special import i_table_scaled, k_table_scaled
from helmbench.reference import MieSolution

from oracles import nystrom_symbol

# ---------------------------------------------------------------- special functions


def test_bessel_at_zero():
    assert bessel("j", 0, 0.0) == 1.0
    for n in range(1, 6):
        assert bessel("j", n, 0.0) == 0.0


def test_wronskian_x5_n3():
    j, dj = bessel("j", 3, 5.0, derivative=True)
    y, dy = bessel("y", 3, 5.0, derivative=True)
    assert abs((j * dy - dj * y) - 2 / (5 * np.pi)) <= 1e-10 * 2 / (5 * np.pi)


def test_first_zero_of_j0():
    assert abs(bessel("j", 0, 2.404825557695773)) < 1e-9


@pytest.mark.parametrize("x", [0.3, 1.0, 5.0, 17.5, 60.0, 150.0])
def test_wronskian_table(x):
    J, Y = jy_table(40, np.array(x))
    J, Y = J.ravel(), Y.ravel()
    n = np.arange(40)
    lhs = J[1:41] * Y[:40] - J[:40] * Y[1:41]
    ok = np.isfinite(Y[1:41]) & (np.abs(Y[1:41]) < 1e100)
    assert np.allclose(lhs[ok], 2 / (np.pi * x), rtol=1e-10, atol=0)
    assert n.size == 40


def test_jy_against_scipy():
    x = np.array([0.01, 0.5, 2.0, 9.9, 33.0, 120.0, 400.0])
    J, Y = jy_table(60, x)
    for n in range(60):
        ref_j = sp.jv(n, x)
        big = np.abs(ref_j) > 1e-250
        assert np.allclose(J[n][big], ref_j[big], rtol=1e-10, atol=1e-15 * np.abs(ref_j).max())
        ref_y = sp.yv(n, x)
        fin = np.isfinite(ref_y) & (np.abs(ref_y) < 1e280)
        assert np.allclose(Y[n][fin], ref_y[fin], rtol=1e-10)


def test_modified_against_mpmath():
    for x in (0.2, 3.0, 25.0):
        I = i_table_scaled(12, np.array(x)).ravel()
        Kt = k_table_scaled(12, np.array(x)).ravel()
        for n in range(12):
            assert float(I[n]) == pytest.approx(float(mpmath.besseli(n, x) * mpmath.exp(-x)), rel=1e-10)
            assert float(Kt[n]) == pytest.approx(float(mpmath.besselk(n, x) * mpmath.exp(x)), rel=1e-10)


def test_negative_order_reflection():
    assert bessel("j", -3, 2.5) == pytest.approx(-sp.jv(3, 2.5), rel=1e-12)
    assert bessel("y", -2, 2.5) == pytest.approx(sp.yv(2, 2.5), rel=1e-12)
    assert bessel("h", 1, 2.5) == pytest.approx(sp.hankel1(1, 2.5), rel=1e-12)
    with pytest.raises(ValueError):
        bessel("q", 0, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=30), st.floats(min_value=0.05, max_value=200.0))
def test_bessel_property_vs_scipy(n, x):
    j, dj = bessel("j", n, x, derivative=True)
    assert j == pytest.approx(sp.jv(n, x), rel=1e-9, abs=1e-14)
    assert dj == pytest.approx(sp.jvp(n, x), rel=1e-9, abs=1e-14)


# ---------------------------------------------------------------- symbols


def test_symbols_even():
    for kind in ("V", "K", "H", "S_ik", "Ak", "AkPrime", "Breg", "BregPrime"):
        lam = layer_symbol(kind, np.arange(-15, 16), 7.3)
        assert np.allclose(lam, lam[::-1], rtol=0, atol=0)


def test_single_layer_n0_k5_nystrom():
    assert abs(layer_symbol("V", 0, 5.0) - nystrom_symbol("V", 0, 5.0)) < 1e-6


def test_k_equals_kprime():
    for k in (0.7, 4.0, 19.0):
        assert np.array_equal(symbol_table("K", k, 40), symbol_table("KPrime", k, 40))
        assert abs(layer_symbol("K", 5, k) - nystrom_symbol("KPrime", 5, k)) < 1e-6


def test_symbols_vs_nystrom_random():
    rng = np.random.default_rng(2024)
    kinds = ("V", "K", "H", "S_ik")
    worst = 0.0
    for i in range(20):
        n, k = int(rng.integers(-25, 26)), float(rng.uniform(0.5, 30.0))
        kind = kinds[i % 4]
        a, b = layer_symbol(kind, n, k), nystrom_symbol(kind, n, k)
        worst = max(worst, abs(a - b) / max(abs(b), 1e-3))
    assert worst < 1e-5


def test_combined_symbols_from_parts():
    k, n = 9.0, np.arange(0, 30)
    V, K, H, S = (symbol_table(s, k, 29) for s in ("V", "K", "H", "S_ik"))
    assert np.allclose(symbol_table("AkPrime", k, 29), 0.5 + K - 1j * k * V)
    assert np.allclose(symbol_table("Breg", k, 29), 1j * (0.5 - K) + S * H)
    assert n.size == 30


def test_symbol_limits():
    op = BieOperator.build("Breg", 5.0, 4000)
    assert abs(op(4000) - op.limit) < 1e-3
    op = BieOperator.build("AkPrime", 5.0, 4000)
    assert abs(op(-4000) - 0.5) < 1e-3
    with pytest.raises(IndexError):
        op(4001)


# ---------------------------------------------------------------- Galerkin


@pytest.mark.parametrize("p", [0, 1])
def test_identity_kind_is_mass(p):
    grid = BoundaryGrid(32, p)
    G, _ = assemble_bie("Identity", 3.0, grid)
    assert np.allclose(G, grid.mass_matrix(), atol=1e-12)


@pytest.mark.parametrize("p", [0, 1])
def test_norm_bounds_k10_m128(p):
    G, _ = assemble_bie("AkPrime", 10.0, BoundaryGrid(128, p))
    norm, inv = discrete_norms(G, BoundaryGrid(128, p))
    assert norm >= 0.5
    assert inv >= 2 - 0.05


def test_discrete_norms_vs_dense():
    grid = BoundaryGrid(40, 1)
    G, _ = assemble_bie("Breg", 6.0, grid)
    Mh = grid.mass_matrix()
    w, U = np.linalg.eigh(Mh)
    Mi = U @ np.diag(w**-0.5) @ U.T
    s = np.linalg.svd(Mi @ G @ Mi, compute_uv=False)
    norm, inv = discrete_norms(G, grid)
    assert norm == pytest.approx(s.max(), rel=1e-10)
    assert inv == pytest.approx(1 / s.min(), rel=1e-10)


def test_rhs_tail_and_symmetry():
    k = 12.0
    orders, f = plane_wave_data("AkPrime", k, 0.0, nmax=int(2 * k + 80))
    tail = np.abs(orders) >= 2 * k + 40
    assert np.abs(f[tail]).max() <= 1e-8
    assert np.allclose(f, f[::-1], atol=1e-15)
    b = plane_wave_rhs("AkPrime", k, BoundaryGrid(64, 0))
    assert np.linalg.norm(b) > 0


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.1, max_value=60.0))
def test_rhs_nonzero(k):
    for kind in ("AkPrime", "Breg"):
        _, f = plane_wave_data(kind, k)
        assert np.linalg.norm(f) > 0


def test_cqo_at_least_one():
    for kind, p in (("AkPrime", 0), ("AkPrime", 1), ("Breg", 0), ("Ak", 1), ("BregPrime", 0)):
        res = solve_bie_and_metrics(kind, 8.0, BoundaryGrid(48, p))
        assert res.C_qo >= 1.0 - 1e-12
        assert 0 < res.rel_error < 1


def test_galerkin_converges():
    errs = [solve_bie_and_metrics("AkPrime", 5.0, BoundaryGrid(M, 1)).rel_error for M in (32, 64, 128)]
    assert errs[0] > errs[1] > errs[2]
    assert np.log2(errs[1] / errs[2]) == pytest.approx(2.0, abs=0.3)


def test_exact_density_matches_mie():
    """Direct sound-soft formulation: the density is the normal derivative of the total field."""
    k = 10.0
    orders, v = exact_density("AkPrime", k)
    o2, c = MieSolution(k).density_coefficients()
    band = np.abs(orders) <= o2.max()
    full = np.zeros(orders.size, dtype=complex)
    full[band] = c[np.searchsorted(o2, orders[band])]
    assert np.linalg.norm(v - full) <= 1e-8 * np.linalg.norm(v)


def test_far_field_direct():
    k = 10.0
    res = solve_bie_and_metrics("AkPrime", k, BoundaryGrid(400, 1))
    n = np.arange(-80, 81)
    vhat = res.grid.coefficients_of(res.coeffs, n)
    ang = np.linspace(0, 2 * np.pi, 37)
    F_h = -single_layer_far_field(vhat, n, k, ang)
    F = MieSolution(k).far_field(ang)
    assert np.max(np.abs(F_h - F)) <= 1e-3 * np.max(np.abs(F))


def test_bad_inputs():
    with pytest.raises(ValueError):
        BoundaryGrid(3)
    with pytest.raises(ValueError):
        BoundaryGrid(16, 2)
    with pytest.raises(ValueError):
        assemble_bie("AkPrime", 5.0, BoundaryGrid(16), n_f=10)
    with pytest.raises(ValueError):
        solve_bie_and_metrics("V", 5.0, BoundaryGrid(16))
    with pytest.raises(ValueError):
        symbol_table("Q", 1.0, 3)

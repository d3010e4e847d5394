import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helmbench.bem_circle import layer_symbol
from helmbench.reference import (
    NO_SCATTERER,
    SOUND_HARD,
    SOUND_SOFT,
    MieSolution,
    far_field_decay_check,
    mie_density,
    mie_field,
)

from oracles import mie_far_field, mie_scattered


def circle(n, r=1.0):
    t = 2 * np.pi * np.arange(n) / n
    return t, np.column_stack([r * np.cos(t), r * np.sin(t)])


@pytest.mark.parametrize("k", [1.0, 10.0, 40.0])
def test_sound_soft_boundary(k):
    _, x = circle(64)
    u, _ = mie_field(MieSolution(k, SOUND_SOFT), x)
    assert np.abs(u).max() <= 1e-10


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.5, max_value=30.0), st.floats(min_value=0.0, max_value=2 * np.pi))
def test_sound_soft_boundary_any_direction(k, phi):
    _, x = circle(64)
    u, _ = MieSolution(k, SOUND_SOFT, direction=phi).total(x)
    assert np.abs(u).max() <= 1e-10


def test_sound_hard_neumann_k5():
    t, x = circle(64)
    _, g = mie_field(MieSolution(5.0, SOUND_HARD), x)
    ur = g[:, 0] * np.cos(t) + g[:, 1] * np.sin(t)
    assert np.abs(ur).max() <= 1e-10


def test_no_scatterer_is_plane_wave():
    rng = np.random.default_rng(1)
    x = rng.uniform(-3, 3, (50, 2))
    sol = MieSolution(7.0, NO_SCATTERER, direction=0.3)
    u, g = sol.total(x)
    a = np.array([np.cos(0.3), np.sin(0.3)])
    assert np.allclose(u, np.exp(7j * x @ a), atol=1e-14)
    assert np.allclose(g, 7j * a[None, :] * u[:, None], atol=1e-13)


@pytest.mark.parametrize("soft", [True, False])
def test_against_scipy_series(soft):
    k = 8.0
    _, x = circle(40, 1.7)
    sol = MieSolution(k, SOUND_SOFT if soft else SOUND_HARD)
    u, _ = sol.scattered(x)
    assert np.allclose(u, mie_scattered(k, x, soft), rtol=0, atol=1e-11)
    ang = np.linspace(0, 2 * np.pi, 25)
    assert np.allclose(sol.far_field(ang), mie_far_field(k, ang, soft), atol=1e-11)


def test_gradient_by_finite_differences():
    sol = MieSolution(6.0)
    x0 = np.array([[1.3, 0.4]])
    _, g = sol.scattered(x0)
    eps = 1e-6
    for j in range(2):
        e = np.zeros((1, 2))
        e[0, j] = eps
        fd = (sol.scattered(x0 + e)[0] - sol.scattered(x0 - e)[0]) / (2 * eps)
        assert abs(fd[0] - g[0, j]) < 1e-6


def test_density_solves_boundary_equation():
    """Soft density v satisfies (1/2 + K' - ik V) v = d_nu u^I - ik u^I, mode by mode."""
    k = 10.0
    orders, v = mie_density(MieSolution(k))
    lam = layer_symbol("AkPrime", orders, k)
    t, x = circle(512)
    uI = np.exp(1j * k * x[:, 0])
    f = 1j * k * np.cos(t) * uI - 1j * k * uI
    fhat = np.fft.fft(f) / t.size
    rhs = fhat[orders % t.size]
    assert np.linalg.norm(lam * v - rhs) <= 1e-6 * np.linalg.norm(rhs)


def test_density_tail_small():
    k = 20.0
    orders, v = MieSolution(k).density_coefficients()
    assert np.abs(v[np.abs(orders) > k + 30]).max() < 1e-10 * np.abs(v).max()


def test_soft_density_is_normal_derivative():
    k = 4.0
    sol = MieSolution(k, direction=0.7)
    t, x = circle(48)
    _, g = sol.total(x)
    ur = g[:, 0] * np.cos(t) + g[:, 1] * np.sin(t)
    assert np.allclose(sol.density(t), ur, atol=1e-10)


def test_hard_density_is_trace():
    k = 4.0
    sol = MieSolution(k, SOUND_HARD, direction=1.1)
    t, x = circle(48)
    u, _ = mie_field(sol, x)
    assert np.allclose(sol.density(t), u, atol=1e-10)


def test_far_field_decay_k10():
    radii = np.geomspace(10, 100, 12)
    slope, resid = far_field_decay_check(MieSolution(10.0), radii, angle=0.5)
    assert abs(slope + 0.5) <= 0.05
    assert resid[-1] < resid[0]
    assert np.all(np.diff(resid) < 0)


def test_far_field_decay_no_scatterer():
    slope, resid = far_field_decay_check(MieSolution(10.0, NO_SCATTERER), [10.0, 20.0, 40.0])
    assert np.isnan(slope)
    assert np.all(resid == 0)


def test_far_field_asymptotics():
    k, R = 10.0, 4000.0
    sol = MieSolution(k)
    ang = np.array([0.0, 1.0, 2.5])
    x = np.column_stack([R * np.cos(ang), R * np.sin(ang)])
    u, _ = sol.scattered(x)
    approx = np.exp(1j * k * R) / np.sqrt(R) * sol.far_field(ang)
    assert np.allclose(u, approx, rtol=0, atol=2e-3 * np.abs(approx).max())


def test_invalid():
    with pytest.raises(ValueError):
        MieSolution(-1.0)
    with pytest.raises(ValueError):
        MieSolution(1.0, "Robin")
    with pytest.raises(ValueError):
        MieSolution(5.0).scattered(np.array([[0.5, 0.0]]))
    with pytest.raises(ValueError):
        far_field_decay_check(MieSolution(5.0), [5.0, 3.0])
    with pytest.raises(ValueError):
        MieSolution(5.0, NO_SCATTERER).density_coefficients()

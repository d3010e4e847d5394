"""Galerkin boundary elements on a uniform grid of the unit circle.

Functions on the circle are written ``f(theta) = sum_n f_n e^{i n theta}`` with
``f_n = (1/2pi) int f e^{-i n theta}``, so ``<f, g> = 2 pi sum_n f_n conj(g_n)``.

The bases are piecewise constants (p = 0) and periodic hat functions (p = 1) on
``M`` arcs of length ``h = 2 pi / M``. Every basis function is a rotation of
the first, so Galerkin matrices of rotation-invariant operators are circulant.
Their first row follows from one FFT of the aliased sums of
``lambda_n |phi_n|^2``. The identity part ``lambda_inf`` of a second-kind
operator uses the exact mass matrix; the remainder is summed in Fourier space
up to ``n_f`` and its tail beyond ``n_f`` is added from a fitted power law.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.special as special_fn

from .. import linalg
from .special import jy_table
from .symbols import COMBINED_KINDS, LIMITS, BieOperator, symbol_table

log = logging.getLogger(__name__)

TAIL_TOL = 1e-8


@dataclass(frozen=True)
class BoundaryGrid:
    """``M`` uniform arcs on the unit circle with degree-``p`` elements."""

    M: int
    p: int = 0

    def __post_init__(self):
        if self.M < 4:
            raise ValueError("need at least 4 arcs")
        if self.p not in (0, 1):
            raise ValueError("degree must be 0 or 1")

    @property
    def h(self) -> float:
        return 2.0 * np.pi / self.M

    @property
    def nodes(self) -> np.ndarray:
        """Arc start angles (p = 0) or hat centres (p = 1)."""
        return self.h * np.arange(self.M)

    def ppw(self, k: float) -> float:
        return 2.0 * np.pi / (self.h * k)

    def basis_coefficients(self, n) -> np.ndarray:
        """Fourier coefficients of the basis function attached to node 0."""
        n = np.asarray(n, dtype=float)
        h = self.h
        s = np.sinc(n * h / (2.0 * np.pi))  # numpy sinc is sin(pi x)/(pi x)
        if self.p == 0:
            return (h / (2.0 * np.pi)) * np.exp(-0.5j * n * h) * s
        return (h / (2.0 * np.pi)) * s * s

    def mass_matrix(self) -> np.ndarray:
        M, h = self.M, self.h
        if self.p == 0:
            return h * np.eye(M)
        G = (2.0 * h / 3.0) * np.eye(M)
        idx = np.arange(M)
        G[idx, (idx + 1) % M] += h / 6.0
        G[idx, (idx - 1) % M] += h / 6.0
        return G

    def mass_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the circulant mass matrix, indexed by DFT mode."""
        m = np.arange(self.M)
        if self.p == 0:
            return np.full(self.M, self.h)
        return self.h * (2.0 / 3.0 + np.cos(2.0 * np.pi * m / self.M) / 3.0)

    def coefficients_of(self, c: np.ndarray, n) -> np.ndarray:
        """Fourier coefficients of ``sum_j c_j phi_j`` at orders ``n``."""
        n = np.asarray(n, dtype=int)
        C = np.fft.fft(c)  # C[m] = sum_j c_j e^{-2 pi i m j / M}
        return self.basis_coefficients(n) * C[np.mod(n, self.M)]

    def load_vector(self, fhat: np.ndarray, orders: np.ndarray) -> np.ndarray:
        """``<f, phi_i>`` for band-limited f given by ``fhat`` at ``orders``."""
        w = fhat * np.conj(self.basis_coefficients(orders))
        E = np.exp(1j * np.outer(self.nodes, orders))
        return 2.0 * np.pi * (E @ w)


def default_n_f(k: float, M: int) -> int:
    return int(max(np.ceil(4.0 * k), 8 * M))


def _circulant(first_col: np.ndarray) -> np.ndarray:
    M = first_col.size
    idx = (np.arange(M)[None, :] - np.arange(M)[:, None]) % M
    return first_col[idx]


def _tail_model(op: BieOperator):
    """Power law ``r_n ~ r_N (N/|n|)^s`` fitted to the last symbol values."""
    nf = op.n_f
    r_end = op.table[-1] - op.limit
    r_half = op.table[op.n_f + nf // 2] - op.limit
    if abs(r_end) == 0.0 or abs(r_half) == 0.0:
        return r_end, 2.0
    s = float(np.log2(abs(r_half) / abs(r_end)))
    return r_end, max(s, 0.5)


def _alias_tail(op: BieOperator, grid: BoundaryGrid) -> np.ndarray:
    """Per-residue sum of ``r_n |phi_n|^2`` over ``|n| > n_f`` under the tail model.

    Beyond the table ``|phi_n|^2 = (h/2pi)^2 (2/h)^q sin^q(m h/2) / n^q`` with
    ``q = 2`` (p = 0) or ``q = 4`` (p = 1), where ``m = n mod M``; the sums over
    each residue class are Hurwitz zeta values.
    """
    M, h, nf = grid.M, grid.h, op.n_f
    q = 2 if grid.p == 0 else 4
    r_end, s = _tail_model(op)
    m = np.arange(M)
    amp = (h / (2.0 * np.pi)) ** 2 * (2.0 / h) ** q * np.abs(np.sin(m * h / 2.0)) ** q
    expo = q + s

    def side(res):
        # sum over n = res + l M > nf of n^{-expo}
        L = np.ceil((nf + 1 - res) / M)
        return M ** (-expo) * special_fn.zeta(expo, L + res / M)

    total = side(m) + side((M - m) % M)
    return r_end * nf**s * amp * total


def galerkin_matrix(op: BieOperator, grid: BoundaryGrid, split: bool = True) -> np.ndarray:
    """Dense matrix ``G[i, j] = <A phi_j, phi_i>``.

    With ``split`` the limit ``lambda_inf`` is applied through the exact mass
    matrix, ``lambda_n - lambda_inf`` is summed over ``|n| <= n_f`` and the
    remaining tail is added from a fitted power law.
    """
    lam_inf = op.limit if split else 0.0
    n = op.orders
    w = np.abs(grid.basis_coefficients(n)) ** 2
    r = (op.table - lam_inf) * w
    alias = np.zeros(grid.M, dtype=complex)
    np.add.at(alias, np.mod(n, grid.M), r)
    if split:
        alias += _alias_tail(op, grid)
    g = 2.0 * np.pi * np.fft.fft(alias)  # g[d] multiplies e^{-2 pi i m d / M}
    G = _circulant(g)
    if lam_inf != 0.0:
        G = G + lam_inf * grid.mass_matrix()
    return G


def tail_estimate(op: BieOperator, grid: BoundaryGrid) -> float:
    """Size of the tail-model mismatch relative to the mass scale ``h``.

    Compares the fitted power law with the symbol at ``3 n_f / 4`` and scales
    the mismatch by the weight carried beyond ``n_f``.
    """
    nf = op.n_f
    r_end, s = _tail_model(op)
    n34 = (3 * nf) // 4
    pred = r_end * (nf / n34) ** s
    mismatch = abs(op.table[op.n_f + n34] - op.limit - pred)
    power = 2 if grid.p == 0 else 4
    h = grid.h
    tail = 2.0 * (h / (2.0 * np.pi)) ** 2 * (2.0 / h) ** power * nf ** (1 - power) / (power - 1)
    return 2.0 * np.pi * mismatch * tail / h


def assemble_bie(kind: str, k: float, grid: BoundaryGrid, n_f: int | None = None):
    """Galerkin matrix of a second-kind operator (or a diagnostic kind).

    Returns ``(G, op)``. Raises ``ValueError`` when the Fourier truncation
    ``n_f`` is below ``max(4k, 8M)`` or the tail estimate exceeds tolerance.
    With ``n_f=None`` the truncation starts at that minimum and is doubled
    as needed.
    """
    need = default_n_f(k, grid.M)
    adaptive = n_f is None
    if adaptive:
        n_f = need
    elif n_f < need:
        raise ValueError(f"n_f={n_f} below required max(4k, 8M)={need}")
    op = BieOperator.build(kind, k, n_f)
    tail = tail_estimate(op, grid)
    # without an explicit truncation, double it until the tail model is accurate enough
    while adaptive and tail > TAIL_TOL and n_f < 64 * need:
        n_f *= 2
        op = BieOperator.build(kind, k, n_f)
        tail = tail_estimate(op, grid)
    if tail > TAIL_TOL:
        raise ValueError(f"Fourier tail estimate {tail:.2e} above {TAIL_TOL:.0e}")
    return galerkin_matrix(op, grid), op


def _band(k: float) -> int:
    return int(np.ceil(2.0 * k + 40.0))


def plane_wave_traces(k: float, direction: float = 0.0, nmax: int | None = None):
    """Fourier coefficients of ``u^I`` and ``d_nu u^I`` on the unit circle.

    ``direction`` is the polar angle of the unit propagation vector ``a``.
    Returns ``(orders, uhat, dnuhat)`` using the Jacobi-Anger expansion
    ``e^{ik cos(theta - phi)} = sum_n i^n J_n(k) e^{i n (theta - phi)}``.
    """
    if nmax is None:
        nmax = _band(k)
    J, _ = jy_table(nmax + 1, np.array(float(k)), with_y=False)
    J = J.reshape(-1)
    dJ = np.empty(nmax + 1)
    dJ[0] = -J[1]
    dJ[1:] = 0.5 * (J[: nmax] - J[2: nmax + 2])
    orders = np.arange(-nmax, nmax + 1)
    m = np.abs(orders)
    phase = (1j) ** m * np.exp(-1j * orders * direction)
    return orders, phase * J[m], phase * k * dJ[m]


def plane_wave_data(kind: str, k: float, direction: float = 0.0, nmax: int | None = None):
    """Fourier coefficients of the right-hand side for each formulation.

    ``AkPrime``: ``d_nu u^I - i k u^I``; ``Ak``: ``-u^I``;
    ``Breg``: ``i u^I - S_ik d_nu u^I``; ``BregPrime``: ``-d_nu u^I``.
    """
    orders, u, du = plane_wave_traces(k, direction, nmax)
    if kind == "AkPrime":
        return orders, du - 1j * k * u
    if kind == "Ak":
        return orders, -u
    if kind == "Breg":
        S = symbol_table("S_ik", k, int(np.abs(orders).max()))[np.abs(orders)]
        return orders, 1j * u - S * du
    if kind == "BregPrime":
        return orders, -du
    raise ValueError(f"no plane-wave data for kind {kind!r}")


def plane_wave_rhs(kind: str, k: float, grid: BoundaryGrid, direction: float = 0.0):
    orders, fhat = plane_wave_data(kind, k, direction)
    return grid.load_vector(fhat, orders)


def exact_density(kind: str, k: float, direction: float = 0.0):
    """Continuous solution ``v_n = f_n / lambda_n`` on the data band."""
    orders, fhat = plane_wave_data(kind, k, direction)
    lam = symbol_table(kind, k, int(np.abs(orders).max()))[np.abs(orders)]
    return orders, fhat / lam


@dataclass
class BemResult:
    kind: str
    k: float
    grid: BoundaryGrid
    coeffs: np.ndarray
    orders: np.ndarray
    reference: np.ndarray
    C_qo: float
    rel_error: float
    best_error: float
    rho_hat: float
    norm: float
    pivot_growth: float


def discrete_norms(G: np.ndarray, grid: BoundaryGrid):
    """``(||A_h||, ||A_h^{-1}||)`` in L^2 for the Galerkin operator on V_h.

    ``G`` and the mass matrix are circulant, so ``M^{-1/2} G M^{-1/2}`` is
    normal with eigenvalues ``g_m / mu_m``.
    """
    g = np.fft.fft(G[:, 0])
    s = np.abs(g / grid.mass_eigenvalues())
    return float(s.max()), float(1.0 / s.min())


def solve_bie_and_metrics(kind: str, k: float, grid: BoundaryGrid, direction: float = 0.0) -> BemResult:
    """Solve the Galerkin system and compare with the exact density."""
    if kind not in COMBINED_KINDS:
        raise ValueError(f"{kind!r} is not a second-kind formulation")
    G, _ = assemble_bie(kind, k, grid)
    b = plane_wave_rhs(kind, k, grid, direction)
    norm, inv_norm = discrete_norms(G, grid)
    if not np.isfinite(inv_norm) or inv_norm > 1e12:
        raise np.linalg.LinAlgError(f"Galerkin matrix numerically singular at k={k}")
    c, info = linalg.lu_solve(G, b, return_info=True)
    orders, v = exact_density(kind, k, direction)
    Mass = grid.mass_matrix()
    bv = grid.load_vector(v, orders)
    c_best = linalg.lu_solve(Mass, bv)
    vnorm2 = 2.0 * np.pi * float(np.sum(np.abs(v) ** 2))
    best2 = vnorm2 - float(np.real(np.vdot(c_best, Mass @ c_best)))
    d = c - c_best
    diff2 = float(np.real(np.vdot(d, Mass @ d)))
    if best2 <= 1e-13 * vnorm2:
        log.warning("best-approximation error near round-off; C_qo unreliable")
    best2 = max(best2, 1e-300)
    err2 = best2 + diff2
    return BemResult(
        kind=kind,
        k=float(k),
        grid=grid,
        coeffs=c,
        orders=orders,
        reference=v,
        C_qo=float(np.sqrt(err2 / best2)),
        rel_error=float(np.sqrt(err2 / vnorm2)),
        best_error=float(np.sqrt(best2)),
        rho_hat=inv_norm,
        norm=norm,
        pivot_growth=info.pivot_growth,
    )


def single_layer_far_field(vhat: np.ndarray, orders: np.ndarray, k: float, angles) -> np.ndarray:
    """Far-field pattern of ``S_k v`` (``u ~ e^{ikr}/sqrt(r) F``)."""
    angles = np.asarray(angles, dtype=float)
    m = np.abs(orders)
    J, _ = jy_table(int(m.max()), np.array(float(k)), with_y=False)
    J = J.reshape(-1)[m] * np.where(orders < 0, (-1.0) ** m, 1.0)
    terms = vhat * (-1j) ** orders * J
    E = np.exp(1j * np.outer(angles, orders))
    pref = 0.25j * np.sqrt(2.0 / (np.pi * k)) * np.exp(-0.25j * np.pi)
    return pref * 2.0 * np.pi * (E @ terms)

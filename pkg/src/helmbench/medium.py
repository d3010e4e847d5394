"""Complex-scaled coefficients for perfectly matched layers.

Every medium exposes ``coefficients(x) -> (A, n, b)`` with ``A`` of shape
``(N, 2, 2)``, ``n`` of shape ``(N,)`` and ``b`` of shape ``(N, 2)`` or ``None``.
The sesquilinear form assembled from them is

    a(u, v) = int k^-2 A grad u . grad v  +  k^-2 (b . grad u) v  -  n u v.

Radial layers scale ``r -> r + i g_theta(r)`` with
``g_theta = tan(theta) (r - R_PML)_+^e / w^(e-1)``; ``alpha = 1 + i g_theta'``
and ``beta = 1 + i g_theta / r``. Cartesian layers stretch each coordinate
separately with ``s = 1 + i f'(depth)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import Box

MULTIPLIED = "Multiplied"
UNMULTIPLIED = "Unmultiplied"
THETA_EPS = 1e-3


@dataclass(frozen=True)
class CoefficientField:
    """Scalar coefficient ``n(x)`` equal to 1 outside ``support``."""

    n: Callable[[np.ndarray], np.ndarray] | None = None
    support: Box | None = None
    n_min: float = 1e-8

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        out = np.ones(len(x))
        if self.n is None:
            return out
        inside = self.support.contains(x) if self.support is not None else np.ones(len(x), dtype=bool)
        if np.any(inside):
            vals = np.asarray(self.n(x[inside]), dtype=float)
            if np.any(vals < self.n_min):
                raise ValueError("coefficient n below its positive lower bound")
            out[inside] = vals
        return out

    @property
    def is_constant(self) -> bool:
        return self.n is None

    def support_radius(self) -> float:
        if self.n is None or self.support is None:
            return 0.0
        b = self.support
        return float(max(np.hypot(x, y) for x in (b.x0, b.x1) for y in (b.y0, b.y1)))


UNIT_FIELD = CoefficientField()


@dataclass(frozen=True)
class PmlRadialSpec:
    """Radial layer on ``R_PML <= r <= R_tr`` around a scatterer inside ``R_scat``."""

    R_scat: float
    R_PML: float
    R_tr: float
    theta: float
    variant: str = MULTIPLIED
    exponent: float = 3.0
    omega: float | None = None

    def __post_init__(self):
        if not 0 < self.R_scat < self.R_PML < self.R_tr:
            raise ValueError("need 0 < R_scat < R_PML < R_tr")
        if not THETA_EPS <= self.theta <= np.pi / 2 - THETA_EPS:
            raise ValueError("theta must lie inside (0, pi/2)")
        if self.variant not in (MULTIPLIED, UNMULTIPLIED):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.exponent < 2:
            raise ValueError("profile exponent must be at least 2")

    @property
    def width(self) -> float:
        return self.R_tr - self.R_PML

    @property
    def rotation(self) -> float:
        """Garding rotation: 0 for Multiplied, ``atan(e tan(theta))`` otherwise.

        ``alpha^-2`` has argument down to ``-2 atan(e tan(theta))`` at ``R_tr``;
        rotating by half that range keeps every eigenvalue in the right half plane.
        """
        if self.variant == MULTIPLIED:
            return 0.0
        if self.omega is not None:
            return self.omega
        return float(np.arctan(self.exponent * np.tan(self.theta)))


def radial_profile(spec: PmlRadialSpec, r):
    """``(g, g', g'')`` of ``(r - R_PML)_+^e / w^(e-1)`` (without the tan factor)."""
    r = np.asarray(r, dtype=float)
    e, w = spec.exponent, spec.width
    d = np.maximum(r - spec.R_PML, 0.0)
    scale = w ** (e - 1.0)
    return d**e / scale, e * d ** (e - 1.0) / scale, e * (e - 1.0) * d ** (e - 2.0) / scale


def radial_scaling_g(spec: PmlRadialSpec, r):
    """``(g_theta, g_theta')`` at radius ``r``."""
    g, dg, _ = radial_profile(spec, r)
    t = np.tan(spec.theta)
    return t * g, t * dg


def _radial_factors(spec: PmlRadialSpec, r):
    g, dg, d2g = radial_profile(spec, r)
    t = np.tan(spec.theta)
    rs = np.where(r > 0, r, 1.0)
    alpha = 1.0 + 1j * t * dg
    beta = 1.0 + 1j * t * g / rs
    dalpha = 1j * t * d2g
    dbeta = 1j * t * (dg / rs - g / rs**2)
    return alpha, beta, dalpha, dbeta


def eval_pml_radial(spec: PmlRadialSpec, x, n_field: CoefficientField = UNIT_FIELD):
    """``(A, n, b)`` of the radial layer at points ``x`` (shape ``(N, 2)``).

    Multiplied: ``A = H diag(beta/alpha, alpha/beta) H^T``, ``n = alpha beta``,
    ``b = 0``. Unmultiplied: ``A = H diag(alpha^-2, beta^-2) H^T``, ``n`` unscaled
    and ``b = -alpha^-2 (log(alpha beta))' e_r``, which makes the form equal to
    the weak form of ``-k^-2 Delta_theta - n``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = np.hypot(x[:, 0], x[:, 1])
    rs = np.where(r > 0, r, 1.0)
    c, s = x[:, 0] / rs, x[:, 1] / rs
    alpha, beta, dalpha, dbeta = _radial_factors(spec, r)
    if spec.variant == MULTIPLIED:
        d1, d2 = beta / alpha, alpha / beta
    else:
        d1, d2 = alpha**-2, beta**-2
    A = np.empty((len(x), 2, 2), dtype=complex)
    A[:, 0, 0] = d1 * c * c + d2 * s * s
    A[:, 0, 1] = A[:, 1, 0] = (d1 - d2) * c * s
    A[:, 1, 1] = d1 * s * s + d2 * c * c
    nphys = n_field(x)
    if spec.variant == MULTIPLIED:
        n = nphys * alpha * beta
        b = np.zeros((len(x), 2), dtype=complex)
    else:
        n = nphys.astype(complex)
        drift = -(alpha**-2) * (dalpha / alpha + dbeta / beta)
        b = np.column_stack([drift * c, drift * s])
    return A, n, b


@dataclass(frozen=True)
class RadialPmlMedium:
    spec: PmlRadialSpec
    n_field: CoefficientField = UNIT_FIELD

    def coefficients(self, x):
        A, n, b = eval_pml_radial(self.spec, x, self.n_field)
        return A, n, (b if self.spec.variant == UNMULTIPLIED else None)

    @property
    def complex_symmetric(self) -> bool:
        return self.spec.variant == MULTIPLIED


@dataclass(frozen=True)
class PhysicalMedium:
    """``A = I`` and ``n = n(x)``, no layer."""

    n_field: CoefficientField = UNIT_FIELD

    def coefficients(self, x):
        x = np.atleast_2d(x)
        A = np.broadcast_to(np.eye(2, dtype=complex), (len(x), 2, 2)).copy()
        return A, self.n_field(x).astype(complex), None

    complex_symmetric = True


@dataclass(frozen=True)
class PmlCartesianSpec:
    """Per-direction stretching outside the physical box ``[a_1, b_1] x [a_2, b_2]``.

    ``widths`` gives the layer width on the (left, right, bottom, top) edges;
    a width of 0 means no layer on that edge. The stretch derivative is the
    quadratic-linear blend ``f'(d) = sigma min(d / kappa_lin, 1)``.
    """

    physical: Box
    widths: Sequence[float]
    kappa_lin: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.kappa_lin <= 0:
            raise ValueError("kappa_lin must be positive")
        if len(self.widths) != 4:
            raise ValueError("need four edge widths")
        for w in self.widths:
            if w and not self.kappa_lin < w:
                raise ValueError("kappa_lin must be smaller than every layer width")

    @property
    def outer(self) -> Box:
        b, (wl, wr, wb, wt) = self.physical, self.widths
        return Box(b.x0 - wl, b.x1 + wr, b.y0 - wb, b.y1 + wt)


def blend(spec: PmlCartesianSpec, depth):
    """``(f, f')`` of the quadratic-linear blend at nonnegative ``depth``."""
    d = np.maximum(np.asarray(depth, dtype=float), 0.0)
    kl, sg = spec.kappa_lin, spec.sigma
    f = np.where(d < kl, sg * d * d / (2.0 * kl), sg * (d - kl / 2.0))
    df = sg * np.minimum(d / kl, 1.0)
    return f, df


def eval_pml_cartesian(spec: PmlCartesianSpec, x) -> np.ndarray:
    """Stretch factors ``(N, 2)``: ``1 + i f'(depth_l)`` per direction."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    b, (wl, wr, wb, wt) = spec.physical, spec.widths
    dx = np.where(x[:, 0] < b.x0, (b.x0 - x[:, 0]) * (wl > 0), np.where(x[:, 0] > b.x1, (x[:, 0] - b.x1) * (wr > 0), 0.0))
    dy = np.where(x[:, 1] < b.y0, (b.y0 - x[:, 1]) * (wb > 0), np.where(x[:, 1] > b.y1, (x[:, 1] - b.y1) * (wt > 0), 0.0))
    return np.column_stack([1.0 + 1j * blend(spec, dx)[1], 1.0 + 1j * blend(spec, dy)[1]])


@dataclass(frozen=True)
class CartesianPmlMedium:
    """Multiplied (divergence-form) Cartesian layer: ``A = diag(s2/s1, s1/s2)``, ``n = s1 s2 n(x)``."""

    spec: PmlCartesianSpec
    n_field: CoefficientField = UNIT_FIELD

    def coefficients(self, x):
        x = np.atleast_2d(x)
        s = eval_pml_cartesian(self.spec, x)
        A = np.zeros((len(x), 2, 2), dtype=complex)
        A[:, 0, 0] = s[:, 1] / s[:, 0]
        A[:, 1, 1] = s[:, 0] / s[:, 1]
        return A, self.n_field(x) * s[:, 0] * s[:, 1], None

    complex_symmetric = True


def garding_min(medium, points, omega: float | None = None) -> float:
    """``min_x min_|xi|=1 Re(e^{i omega} A(x) xi . conj(xi))`` over ``points``.

    For complex-symmetric ``A`` the inner minimum over complex directions is
    the smallest eigenvalue of ``Re(e^{i omega} A)``, so it is computed exactly.
    ``omega`` defaults to the rotation carried by a radial spec (0 otherwise).
    """
    if omega is None:
        spec = getattr(medium, "spec", None)
        omega = spec.rotation if isinstance(spec, PmlRadialSpec) else 0.0
    A, _, _ = medium.coefficients(points)
    R = np.real(np.exp(1j * omega) * A)
    R = 0.5 * (R + np.transpose(R, (0, 2, 1)))
    return float(np.linalg.eigvalsh(R)[:, 0].min())


def annulus_samples(spec: PmlRadialSpec, n_r: int = 40, n_phi: int = 25) -> np.ndarray:
    """Polar sample grid over ``R_scat/2 <= r <= R_tr``."""
    r = np.linspace(spec.R_scat / 2.0, spec.R_tr, n_r)
    phi = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    R, P = np.meshgrid(r, phi)
    return np.column_stack([(R * np.cos(P)).ravel(), (R * np.sin(P)).ravel()])

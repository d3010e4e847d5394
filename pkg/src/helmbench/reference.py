"""Plane waves and Mie series for scattering by the unit disk.

For incidence direction ``(cos phi, sin phi)`` and ``psi = theta - phi``,
``u^I = sum_n eps_n i^n J_n(kr) cos(n psi)`` and
``u^S = sum_n eps_n a_n H_n(kr) cos(n psi)`` with ``eps_0 = 1``, ``eps_n = 2``,
``a_n = -i^n J_n(k) / H_n(k)`` (sound-soft) or ``-i^n J_n'(k) / H_n'(k)`` (sound-hard).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bem_circle.special import jy_table

SOUND_SOFT = "SoundSoft"
SOUND_HARD = "SoundHard"
NO_SCATTERER = "None"
COEFF_TOL = 1e-14
CHUNK = 20000


def _hankel_table(nmax: int, x: np.ndarray):
    """``H_n(x)`` and ``H_n'(x)`` for ``n = 0..nmax``; shape ``(nmax + 1, N)``."""
    J, Y = jy_table(nmax + 1, x)
    H = J + 1j * Y
    dH = np.empty((nmax + 1,) + x.shape, dtype=complex)
    dH[0] = -H[1]
    n = np.arange(1, nmax + 1).reshape((-1,) + (1,) * x.ndim)
    dH[1:] = H[:-2] - n / x * H[1:-1]
    return H[:-1], dH


@dataclass(frozen=True)
class MieSolution:
    """Exact scattered field for plane-wave incidence on the disk of radius ``radius``.

    The series is cut where the boundary size of the remaining modes drops
    below ``1e-16`` relative; the coefficients themselves are far smaller.
    """

    k: float
    bc: str = SOUND_SOFT
    direction: float = 0.0
    radius: float = 1.0
    _c: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be positive")
        if self.bc not in (SOUND_SOFT, SOUND_HARD, NO_SCATTERER):
            raise ValueError(f"unknown boundary condition {self.bc!r}")

    @property
    def n_mie(self) -> int:
        if "n" not in self._c:
            self._coefficients()
        return self._c["n"]

    @property
    def coefficients(self) -> np.ndarray:
        """``a_n`` for ``n = 0..n_mie``."""
        return self._coefficients()

    def _coefficients(self) -> np.ndarray:
        if "a" in self._c:
            return self._c["a"]
        kr = self.k * self.radius
        nmax = int(kr + 12.0 * kr ** (1.0 / 3.0) + 40)
        J, Y = jy_table(nmax + 1, np.array(kr))
        J, Y = J.ravel(), Y.ravel()
        n = np.arange(nmax + 1)
        H = J + 1j * Y
        if self.bc == SOUND_SOFT:
            a = -(1j**n) * J[:-1] / H[:-1]
        elif self.bc == SOUND_HARD:
            dJ = np.concatenate([[-J[1]], J[:-2] - n[1:] / kr * J[1:-1]])
            dH = np.concatenate([[-H[1]], H[:-2] - n[1:] / kr * H[1:-1]])
            a = -(1j**n) * dJ / dH
        else:
            a = np.zeros(nmax + 1, dtype=complex)
        # size of mode n (with its gradient) on the boundary, where it is largest
        mode = np.abs(a) * np.abs(H[:-1]) * np.maximum(1.0, n / kr)
        big = np.flatnonzero(mode > COEFF_TOL * 1e-2 * max(mode.max(), 1e-300))
        N = int(big[-1]) + 1 if big.size else 0
        if N >= nmax:
            raise RuntimeError("Mie coefficients did not decay within the table")
        self._c["n"] = N
        self._c["a"] = a[: N + 1]
        return self._c["a"]

    # -- fields
    def incident(self, x):
        x = np.atleast_2d(x)
        a = np.array([np.cos(self.direction), np.sin(self.direction)])
        u = np.exp(1j * self.k * (x @ a))
        return u, 1j * self.k * a[None, :] * u[:, None]

    def scattered(self, x, min_radius: float | None = None):
        """``(u^S, grad u^S)`` at points ``x`` (N, 2).

        Points with ``|x| < min_radius`` (default ``0.9 radius``) are rejected;
        the series continues analytically slightly inside the disk, which lets
        it serve as the reference on inscribed polygonal meshes.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        lo = 0.9 * self.radius if min_radius is None else min_radius
        r = np.hypot(x[:, 0], x[:, 1])
        if np.any(r < lo):
            raise ValueError("Mie series evaluated inside the scatterer")
        a = self._coefficients()
        N = self.n_mie
        u = np.zeros(len(x), dtype=complex)
        g = np.zeros((len(x), 2), dtype=complex)
        if N == 0 and not np.any(a):
            return u, g
        eps = np.where(np.arange(N + 1) == 0, 1.0, 2.0) * a
        n = np.arange(N + 1)[:, None]
        for s in range(0, len(x), CHUNK):
            sl = slice(s, s + CHUNK)
            rr = r[sl]
            th = np.arctan2(x[sl, 1], x[sl, 0])
            H, dH = _hankel_table(N, self.k * rr)
            psi = n * (th - self.direction)[None, :]
            c, sn = np.cos(psi), np.sin(psi)
            u[sl] = eps @ (H * c)
            ur = self.k * (eps @ (dH * c))
            ut = -(eps @ (n * H * sn)) / rr
            ct, st = np.cos(th), np.sin(th)
            g[sl, 0] = ur * ct - ut * st
            g[sl, 1] = ur * st + ut * ct
        return u, g

    def total(self, x):
        uI, gI = self.incident(x)
        uS, gS = self.scattered(x)
        return uI + uS, gI + gS

    def field(self, x):
        """Alias for :meth:`total`."""
        return self.total(x)

    # -- boundary data
    def density_coefficients(self):
        """Fourier coefficients (orders ``-N..N``) of the BIE unknown.

        Sound-soft: ``d_nu u`` on the boundary; sound-hard: the trace of ``u``.
        Normalized to the unit circle (``radius`` must be 1).
        """
        if self.radius != 1.0:
            raise ValueError("densities are defined for the unit circle")
        N = self.n_mie
        J, Y = jy_table(N + 1, np.array(float(self.k)))
        H = (J + 1j * Y).ravel()
        m = np.arange(N + 1)
        if self.bc == SOUND_SOFT:
            c = (1j**m) * (-2j / np.pi) / H[:-1]
        elif self.bc == SOUND_HARD:
            dH = np.concatenate([[-H[1]], H[:-2] - m[1:] / self.k * H[1:-1]])
            c = (1j**m) * (2j / (np.pi * self.k)) / dH
        else:
            raise ValueError("no density without a scatterer")
        orders = np.arange(-N, N + 1)
        return orders, c[np.abs(orders)] * np.exp(-1j * orders * self.direction)

    def density(self, theta):
        orders, c = self.density_coefficients()
        theta = np.asarray(theta, dtype=float)
        return np.exp(1j * np.multiply.outer(theta, orders)) @ c

    def far_field(self, angles):
        """``u^inf`` with ``u^S ~ e^{ikr} r^{-1/2} u^inf``."""
        a = self._coefficients()
        n = np.arange(a.size)
        eps = np.where(n == 0, 1.0, 2.0)
        ang = np.asarray(angles, dtype=float)
        s = np.cos(np.multiply.outer(ang - self.direction, n)) @ (eps * a * (-1j) ** n)
        return np.sqrt(2.0 / (np.pi * self.k)) * np.exp(-0.25j * np.pi) * s


def mie_field(sol: MieSolution, x):
    """Total field ``(u, grad u)`` at points with ``|x| >= radius``."""
    return sol.total(x)


def mie_density(sol: MieSolution):
    """Boundary density as ``(orders, Fourier coefficients)``."""
    return sol.density_coefficients()


def far_field_decay_check(sol: MieSolution, radii, angle: float = 0.0):
    """Slope of ``log |u^S|`` against ``log r`` along one ray, and the scaled radiation residuals.

    Returns ``(slope, residuals)``; ``slope`` is ``nan`` when ``u^S`` vanishes.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0) or radii[0] < 2.0:
        raise ValueError("radii must be increasing and at least 2")
    x = np.column_stack([radii * np.cos(angle), radii * np.sin(angle)])
    u, g = sol.scattered(x)
    ur = g[:, 0] * np.cos(angle) + g[:, 1] * np.sin(angle)
    resid = np.abs(ur - 1j * sol.k * u) * np.sqrt(radii)
    if np.all(np.abs(u) == 0):
        return float("nan"), resid
    slope = float(np.polyfit(np.log(radii), np.log(np.abs(u)), 1)[0])
    return slope, resid

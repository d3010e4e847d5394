"""Fourier multipliers of the Helmholtz layer operators on the unit circle.

With the fundamental solution ``Phi_k(x, y) = (i/4) H_0^(1)(k|x - y|)`` the
operators act diagonally on ``e^{in theta}``:

* single layer        ``V_n = (i pi / 2) J_n(k) H_n(k)``
* double layer        ``K_n = K'_n = (i pi k / 4) (J_n' H_n + J_n H_n')``
* hypersingular       ``H_n = (i pi k^2 / 2) J_n' H_n'``
* ``S_ik`` (single layer at wavenumber ``ik``) ``I_n(k) K_n(k)``

The combined operators use coupling parameter ``eta = k``. All multipliers
are even in ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .special import ik_products, jy_products

LAYER_KINDS = ("V", "K", "KPrime", "H", "S_ik")
COMBINED_KINDS = ("Ak", "AkPrime", "Breg", "BregPrime")
ALL_KINDS = LAYER_KINDS + COMBINED_KINDS + ("Identity",)

# limits of the combined symbols as |n| -> infinity
LIMITS = {
    "Ak": 0.5 + 0.0j,
    "AkPrime": 0.5 + 0.0j,
    "Breg": 0.5j - 0.25,
    "BregPrime": 0.5j - 0.25,
    "Identity": 1.0 + 0.0j,
    "V": 0.0j,
    "K": 0.0j,
    "KPrime": 0.0j,
    "H": 0.0j,
    "S_ik": 0.0j,
}


def symbol_table(kind: str, k: float, nmax: int) -> np.ndarray:
    """Multipliers lambda_n for n = 0..nmax (use ``abs(n)`` for negative n)."""
    if kind not in ALL_KINDS:
        raise ValueError(f"unknown operator kind {kind!r}")
    if k <= 0:
        raise ValueError("k must be positive")
    if kind == "Identity":
        return np.ones(nmax + 1, dtype=complex)
    if kind == "S_ik":
        return ik_products(nmax, k).astype(complex)
    p = jy_products(nmax, k)
    V = 0.5j * np.pi * (p["JJ"] + 1j * p["JY"])
    K = 0.25j * np.pi * k * (2.0 * p["JdJ"] + 1j * (p["dJY"] + p["JdY"]))
    if kind == "V":
        return V
    if kind in ("K", "KPrime"):
        return K
    H = 0.5j * np.pi * k * k * (p["dJdJ"] + 1j * p["dJdY"])
    if kind == "H":
        return H
    if kind in ("Ak", "AkPrime"):
        return 0.5 + K - 1j * k * V
    S = ik_products(nmax, k)
    return 1j * (0.5 - K) + S * H


def layer_symbol(kind: str, n, k: float):
    """Multiplier of ``kind`` at integer order(s) ``n`` and wavenumber ``k``."""
    n_arr = np.abs(np.asarray(n, dtype=int))
    nmax = int(n_arr.max()) if n_arr.size else 0
    tab = symbol_table(kind, k, nmax)
    out = tab[n_arr]
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class BieOperator:
    """Fourier-symbol representation of a boundary operator on the unit circle.

    ``table[n + n_f]`` holds lambda_n for ``-n_f <= n <= n_f``.
    """

    kind: str
    k: float
    n_f: int
    table: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, kind: str, k: float, n_f: int) -> "BieOperator":
        half = symbol_table(kind, k, n_f)
        table = np.concatenate([half[:0:-1], half])
        table.setflags(write=False)
        return cls(kind=kind, k=float(k), n_f=int(n_f), table=table)

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.n_f, self.n_f + 1)

    @property
    def limit(self) -> complex:
        return LIMITS[self.kind]

    def __call__(self, n):
        n = np.asarray(n)
        if np.any(np.abs(n) > self.n_f):
            raise IndexError("order outside the symbol table")
        return self.table[n + self.n_f]

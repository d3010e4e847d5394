"""Integer-order Bessel, Hankel and modified Bessel functions of real argument.

The J and I families come from Miller's downward recurrence normalised by the
Neumann sums ``J_0 + 2 sum J_2k = 1`` and ``I_0 + 2 sum I_k = e^x``. Y_0 and Y_1
are built from the Neumann series in the J values and then carried upward,
which is the stable direction for Y. K_0 and K_1 come from a trapezoidal rule
on ``int_0^inf exp(-x cosh t) cosh(nu t) dt`` (spectrally accurate for this
integrand) and are also carried upward.

For the circle symbols only products such as ``J_n Y_n`` or ``I_n K_n`` are
needed. Past the turning point those products are formed from ratio
recurrences, so orders far beyond the argument never overflow.
"""

from __future__ import annotations

import numpy as np

EULER_GAMMA = 0.57721566490153286061
_BIG = 1e250
_SMALL = 1.0 / _BIG


def _miller_start(nmax: int, xmax: float) -> int:
    m = max(nmax, int(np.ceil(xmax))) + 30 + int(12.0 * max(xmax, 1.0) ** (1.0 / 3.0))
    return m + (m % 2)


def _j_table_full(nmax: int, x: np.ndarray) -> np.ndarray:
    """J_0..J_m at every x (m >= nmax from the Miller start); x > 0."""
    m = _miller_start(nmax, float(x.max()) if x.size else 1.0)
    tab = np.zeros((m + 1,) + x.shape)
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-300)
    tab[m] = j
    norm = 2.0 * j  # m is even
    for n in range(m, 0, -1):
        jm1 = (2.0 * n / x) * j - jp1
        tab[n - 1] = jm1
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm = norm + 2.0 * jm1
        jp1, j = j, jm1
        big = np.abs(j) > _BIG
        if np.any(big):
            tab[n - 1:, big] *= _SMALL
            j = np.where(big, j * _SMALL, j)
            jp1 = np.where(big, jp1 * _SMALL, jp1)
            norm = np.where(big, norm * _SMALL, norm)
    norm = norm + tab[0]
    return tab / norm


def jy_table(nmax: int, x, with_y: bool = True):
    """J_n(x) and Y_n(x) for n = 0..nmax.

    Parameters
    ----------
    nmax : int
        Highest order.
    x : array_like
        Nonnegative arguments (Y requires x > 0).

    Returns
    -------
    J, Y : ndarray
        Arrays of shape ``(nmax + 1,) + x.shape``. Y is None when ``with_y`` is
        false.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("negative argument")
    zero = x == 0.0
    xs = np.where(zero, 1.0, x)
    full = _j_table_full(nmax + 1, xs)
    J = full[: nmax + 1].copy()
    if np.any(zero):
        J[:, zero] = 0.0
        J[0, zero] = 1.0
    if not with_y:
        return J, None
    if np.any(zero):
        raise ValueError("Y_n is singular at x = 0")
    m = full.shape[0] - 1
    lg = np.log(xs / 2.0) + EULER_GAMMA
    kk = np.arange(1, m // 2 + 1)
    sgn = (-1.0) ** kk
    even = full[2 * kk]
    y0 = (2.0 / np.pi) * lg * full[0] - (4.0 / np.pi) * np.tensordot(sgn / kk, even, axes=1)
    kk1 = kk[2 * kk + 1 <= m]
    diff = full[2 * kk1 - 1] - full[2 * kk1 + 1]
    y1 = (2.0 / np.pi) * (lg * full[1] - full[0] / xs) + (2.0 / np.pi) * np.tensordot(
        ((-1.0) ** kk1) / kk1, diff, axes=1
    )
    Y = np.empty_like(J)
    Y[0] = y0
    if nmax >= 1:
        Y[1] = y1
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, nmax):
            Y[n + 1] = (2.0 * n / xs) * Y[n] - Y[n - 1]
    return J, Y


def i_table_scaled(nmax: int, x) -> np.ndarray:
    """e^{-x} I_n(x) for n = 0..nmax, x > 0."""
    x = np.asarray(x, dtype=float)
    m = _miller_start(nmax, float(x.max()) if x.size else 1.0)
    tab = np.zeros((m + 1,) + x.shape)
    ip1 = np.zeros_like(x)
    i = np.full_like(x, 1e-300)
    tab[m] = i
    norm = 2.0 * i
    for n in range(m, 0, -1):
        im1 = (2.0 * n / x) * i + ip1
        tab[n - 1] = im1
        if n - 1 > 0:
            norm = norm + 2.0 * im1
        ip1, i = i, im1
        big = np.abs(i) > _BIG
        if np.any(big):
            tab[n - 1:, big] *= _SMALL
            i = np.where(big, i * _SMALL, i)
            ip1 = np.where(big, ip1 * _SMALL, ip1)
            norm = np.where(big, norm * _SMALL, norm)
    norm = norm + tab[0]
    return tab[: nmax + 1] / norm


def _k01_scaled(x: np.ndarray):
    """e^x K_0(x) and e^x K_1(x) by the trapezoidal rule in t."""
    x = np.asarray(x, dtype=float)
    out0 = np.empty_like(x)
    out1 = np.empty_like(x)
    for idx, xv in np.ndenumerate(x):
        h = min(0.05, 0.5 / np.sqrt(xv))
        tmax = np.arccosh(1.0 + 745.0 / xv)
        t = np.arange(0.0, tmax + h, h)
        w = np.full(t.shape, h)
        w[0] = h / 2.0
        e = np.exp(-xv * (np.cosh(t) - 1.0))
        out0[idx] = np.dot(w, e)
        out1[idx] = np.dot(w, e * np.cosh(t))
    return out0, out1


def k_table_scaled(nmax: int, x) -> np.ndarray:
    """e^{x} K_n(x) for n = 0..nmax, x > 0 (may overflow to inf for n >> x)."""
    x = np.asarray(x, dtype=float)
    k0, k1 = _k01_scaled(x)
    K = np.empty((nmax + 1,) + x.shape)
    K[0] = k0
    if nmax >= 1:
        K[1] = k1
    with np.errstate(over="ignore"):
        for n in range(1, nmax):
            K[n + 1] = (2.0 * n / x) * K[n] + K[n - 1]
    return K


def _reflect(n: int, values, kind: str):
    if n >= 0 or kind in ("i", "k"):
        return values
    return values * (-1.0) ** (-n)


def bessel(kind: str, n: int, x, derivative: bool = False):
    """Evaluate one integer-order Bessel-type function.

    ``kind`` is one of ``"j"``, ``"y"``, ``"h"`` (first-kind Hankel), ``"i"``,
    ``"k"``. With ``derivative=True`` a ``(value, derivative)`` pair is
    returned. Negative orders use the reflection formulas.
    """
    kind = kind.lower()
    if kind not in ("j", "y", "h", "i", "k"):
        raise ValueError(f"unknown Bessel kind {kind!r}")
    n = int(n)
    m = abs(n)
    x = np.asarray(x, dtype=float)
    if kind in ("j", "y", "h"):
        J, Y = jy_table(m + 1, x, with_y=kind != "j")
        if kind == "j":
            tab = J
        elif kind == "y":
            tab = Y
        else:
            tab = J + 1j * Y
        if kind != "j" and not np.all(np.isfinite(tab[m])):
            raise OverflowError(f"Y_{m}(x) overflows double precision")
        val = tab[m]
        der = -tab[1] if m == 0 else 0.5 * (tab[m - 1] - tab[m + 1])
        val, der = _reflect(n, val, kind), _reflect(n, der, kind)
    elif kind == "i":
        tab = i_table_scaled(m + 1, x) * np.exp(x)
        val = tab[m]
        der = tab[1] if m == 0 else 0.5 * (tab[m - 1] + tab[m + 1])
    else:
        tab = k_table_scaled(m + 1, x) * np.exp(-x)
        if not np.all(np.isfinite(tab[m + 1])):
            raise OverflowError(f"K_{m}(x) overflows double precision")
        val = tab[m]
        der = -tab[1] if m == 0 else -0.5 * (tab[m - 1] + tab[m + 1])
    if derivative:
        return val, der
    return val


def jy_products(nmax: int, x: float) -> dict:
    """Products of J_n, Y_n and their derivatives at a scalar x, n = 0..nmax.

    Returns a dict of arrays ``JJ = J_n^2``, ``JdJ = J_n J_n'``,
    ``dJdJ = J_n'^2``, ``JY = J_n Y_n``, ``dJY = J_n' Y_n``, ``JdY = J_n Y_n'``
    and ``dJdY = J_n' Y_n'``. Orders past ``x + 20`` are obtained from the
    ratio ``q_n = J_{n+1}/J_n`` and the Wronskian, which stays finite where the
    individual factors under- or overflow.
    """
    x = float(x)
    if x <= 0:
        raise ValueError("x must be positive")
    n0 = min(nmax, int(x) + 20)
    J, Y = jy_table(n0 + 1, np.array(x))
    J = J.reshape(-1)
    Y = Y.reshape(-1)
    dJ = np.empty(n0 + 1)
    dY = np.empty(n0 + 1)
    dJ[0], dY[0] = -J[1], -Y[1]
    dJ[1:] = 0.5 * (J[: n0] - J[2: n0 + 2])
    dY[1:] = 0.5 * (Y[: n0] - Y[2: n0 + 2])
    out = {
        "JJ": np.empty(nmax + 1),
        "JdJ": np.empty(nmax + 1),
        "dJdJ": np.empty(nmax + 1),
        "JY": np.empty(nmax + 1),
        "dJY": np.empty(nmax + 1),
        "JdY": np.empty(nmax + 1),
        "dJdY": np.empty(nmax + 1),
    }
    s = slice(0, n0 + 1)
    Jn, Yn = J[: n0 + 1], Y[: n0 + 1]
    out["JJ"][s] = Jn * Jn
    out["JdJ"][s] = Jn * dJ
    out["dJdJ"][s] = dJ * dJ
    out["JY"][s] = Jn * Yn
    out["dJY"][s] = dJ * Yn
    out["JdY"][s] = Jn * dY
    out["dJdY"][s] = dJ * dY
    if nmax == n0:
        return out
    # q_n = J_{n+1}/J_n from the backward continued fraction
    top = nmax + 60
    q = np.zeros(top + 2)
    for n in range(top, n0 - 1, -1):
        q[n] = 1.0 / (2.0 * (n + 1) / x - q[n + 1])
    two_pi_x = 2.0 / (np.pi * x)
    jj = out["JJ"][n0]
    sprod = out["JY"][n0]
    for n in range(n0, nmax):
        qn = q[n]
        s_next = qn * (qn * sprod - two_pi_x)
        jj_next = qn * qn * jj
        m = n + 1
        a = m / x - q[m]  # J'_m / J_m
        out["JJ"][m] = jj_next
        out["JY"][m] = s_next
        out["JdJ"][m] = a * jj_next
        out["dJdJ"][m] = a * a * jj_next
        jj, sprod = jj_next, s_next
    # Y'_m / Y_m = m/x - Y_{m+1}/Y_m with Y_{m+1}/Y_m = S_{m+1} / (S_m q_m)
    S = out["JY"]
    for m in range(n0 + 1, nmax + 1):
        if m + 1 <= nmax:
            s_up = S[m + 1]
        else:
            s_up = q[m] * (q[m] * S[m] - two_pi_x)
        ratio_y = s_up / (S[m] * q[m])
        a = m / x - q[m]
        b = m / x - ratio_y
        out["dJY"][m] = a * S[m]
        out["JdY"][m] = b * S[m]
        out["dJdY"][m] = a * b * S[m]
    return out


def ik_products(nmax: int, x: float) -> np.ndarray:
    """I_n(x) K_n(x) for n = 0..nmax at scalar x > 0."""
    x = float(x)
    if x <= 0:
        raise ValueError("x must be positive")
    top = nmax + 60 + int(x)
    r = np.zeros(top + 2)
    for n in range(top, -1, -1):
        r[n] = 1.0 / (2.0 * (n + 1) / x + r[n + 1])
    i0 = i_table_scaled(0, np.array([x]))[0, 0]
    k0, _ = _k01_scaled(np.array([x]))
    P = np.empty(nmax + 1)
    P[0] = i0 * k0[0]
    for n in range(nmax):
        P[n + 1] = r[n] * (1.0 / x - r[n] * P[n])
    return P

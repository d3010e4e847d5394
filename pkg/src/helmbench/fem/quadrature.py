"""Gauss rules on the reference triangle ``(0,0), (1,0), (0,1)``."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=None)
def triangle_rule(order: int):
    """Collapsed Gauss-Jacobi x Gauss-Legendre rule exact for degree ``order``.

    Returns ``(points (Q, 2), weights (Q,))``; weights sum to 1/2.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    n = max(1, (order + 2) // 2)
    t, wt = roots_jacobi(n, 1.0, 0.0)  # weight (1 - t) on [-1, 1]
    s, ws = roots_legendre(n)
    b = 0.5 * (t + 1.0)
    wb = wt / 4.0
    a = 0.5 * (s + 1.0)
    wa = ws / 2.0
    A, B = np.meshgrid(a, b, indexing="ij")
    W = np.outer(wa, wb)
    pts = np.column_stack([(A * (1.0 - B)).ravel(), B.ravel()])
    w = W.ravel()
    pts.setflags(write=False)
    w.setflags(write=False)
    return pts, w


def gauss_line(n: int):
    """Gauss-Legendre points and weights on ``[0, 1]``."""
    s, w = roots_legendre(n)
    return 0.5 * (s + 1.0), 0.5 * w

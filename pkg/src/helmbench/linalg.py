"""Dense LU, sparse-matrix helpers and restarted GMRES.

Dense LU with partial pivoting and GMRES are implemented here; sparse storage
and the sparse direct factorization come from ``scipy.sparse``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-14


class SingularMatrixError(np.linalg.LinAlgError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, msg: str, stats: "IterStats"):
        super().__init__(msg)
        self.stats = stats


@dataclass
class LUFactors:
    """Packed ``PA = LU`` factors (unit lower triangle below the diagonal)."""

    lu: np.ndarray
    perm: np.ndarray
    pivot_growth: float

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b)
        y = b[self.perm].astype(np.result_type(self.lu, b), copy=True)
        n = self.lu.shape[0]
        lu = self.lu
        for i in range(1, n):
            y[i] -= lu[i, :i] @ y[:i]
        for i in range(n - 1, -1, -1):
            y[i] = (y[i] - lu[i, i + 1:] @ y[i + 1:]) / lu[i, i]
        return y


def lu_factor(A) -> LUFactors:
    """LU factorization with partial pivoting (right-looking, rank-1 updates).

    Raises ``SingularMatrixError`` when a pivot falls below ``PIVOT_TOL``
    times the largest entry of ``A``.
    """
    A = np.array(A, dtype=np.result_type(A, float), copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    n = A.shape[0]
    perm = np.arange(n)
    amax = np.abs(A).max() if n else 0.0
    if amax == 0.0:
        raise SingularMatrixError("zero matrix")
    growth = amax
    for j in range(n - 1):
        p = j + int(np.argmax(np.abs(A[j:, j])))
        if p != j:
            A[[j, p]] = A[[p, j]]
            perm[[j, p]] = perm[[p, j]]
        piv = A[j, j]
        if abs(piv) <= PIVOT_TOL * amax:
            raise SingularMatrixError(f"zero pivot at column {j}")
        A[j + 1:, j] /= piv
        A[j + 1:, j + 1:] -= np.outer(A[j + 1:, j], A[j, j + 1:])
        growth = max(growth, np.abs(A[j + 1:, j + 1:]).max(initial=0.0))
    if abs(A[n - 1, n - 1]) <= PIVOT_TOL * amax:
        raise SingularMatrixError(f"zero pivot at column {n - 1}")
    return LUFactors(A, perm, float(growth / amax))


def lu_solve(A, b, return_info: bool = False):
    """Solve ``Ax = b`` by LU with partial pivoting."""
    F = lu_factor(A)
    x = F.solve(b)
    if return_info:
        return x, F
    return x


# ---------------------------------------------------------------- sparse


def to_csr(rows, cols, vals, shape) -> sps.csr_matrix:
    """Finalize COO triplets: sum duplicates, sort indices, drop zeros."""
    A = sps.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    return A


def csr_to_dense(A) -> np.ndarray:
    return np.asarray(A.toarray())


class SparseLU:
    """Sparse direct factorization (SuperLU) with a ``solve`` method."""

    def __init__(self, A):
        A = sps.csc_matrix(A)
        try:
            self._lu = spla.splu(A, permc_spec="COLAMD")
        except RuntimeError as exc:  # SuperLU reports exact singularity this way
            raise SingularMatrixError(str(exc)) from exc
        self.shape = A.shape
        self._complex = np.iscomplexobj(A.data)

    def solve(self, b):
        b = np.asarray(b)
        if np.iscomplexobj(b) and not self._complex:
            return self._lu.solve(np.ascontiguousarray(b.real)) + 1j * self._lu.solve(np.ascontiguousarray(b.imag))
        return self._lu.solve(b)


# ---------------------------------------------------------------- GMRES


@dataclass
class IterStats:
    iterations: int = 0
    restarts: int = 0
    residual: float = np.inf
    converged: bool = False
    history: list = field(default_factory=list)


def gmres(
    apply: Callable[[np.ndarray], np.ndarray],
    b,
    restart: int = 50,
    tol: float = 1e-8,
    maxit: int = 1000,
    precond: Callable[[np.ndarray], np.ndarray] | None = None,
    x0=None,
    raise_on_failure: bool = False,
):
    """Right-preconditioned restarted GMRES.

    The Arnoldi basis is built by modified Gram-Schmidt with one
    reorthogonalization pass. ``tol`` is relative to ``||b||`` and the
    reported residual is that of the unpreconditioned system. Returns
    ``(x, IterStats)``; ``maxit`` counts inner iterations.
    """
    b = np.asarray(b, dtype=complex)
    n = b.size
    M = precond if precond is not None else (lambda v: v)
    x = np.zeros(n, dtype=complex) if x0 is None else np.array(x0, dtype=complex)
    bnorm = np.linalg.norm(b)
    stats = IterStats()
    if bnorm == 0.0:
        stats.residual, stats.converged = 0.0, True
        stats.history.append(0.0)
        return np.zeros(n, dtype=complex), stats
    r = b - apply(x)
    if not np.all(np.isfinite(r)):
        raise FloatingPointError("NaN/inf in operator application")
    beta = np.linalg.norm(r)
    stats.history.append(beta / bnorm)
    best_x, best_res = x.copy(), beta / bnorm
    while True:
        if beta / bnorm <= tol:
            stats.converged = True
            break
        if stats.iterations >= maxit:
            break
        m = restart
        V = np.zeros((m + 1, n), dtype=complex)
        H = np.zeros((m + 1, m), dtype=complex)
        cs = np.zeros(m, dtype=complex)
        sn = np.zeros(m, dtype=complex)
        g = np.zeros(m + 1, dtype=complex)
        g[0] = beta
        V[0] = r / beta
        j_used = 0
        lucky = False
        for j in range(m):
            w = apply(M(V[j]))
            if not np.all(np.isfinite(w)):
                raise FloatingPointError("NaN/inf in operator application")
            for _ in range(2):
                for i in range(j + 1):
                    hij = np.vdot(V[i], w)
                    H[i, j] += hij
                    w = w - hij * V[i]
            H[j + 1, j] = np.linalg.norm(w)
            if abs(H[j + 1, j]) > 1e-14 * max(1.0, np.abs(H[: j + 1, j]).max()):
                V[j + 1] = w / H[j + 1, j]
            else:
                lucky = True
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + np.conj(cs[i]) * H[i + 1, j]
                H[i, j] = t
            a, c = H[j, j], H[j + 1, j]
            den = np.sqrt(abs(a) ** 2 + abs(c) ** 2)
            cs[j] = np.conj(a) / den if den else 1.0
            sn[j] = np.conj(c) / den if den else 0.0
            H[j, j] = den
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            stats.iterations += 1
            j_used = j + 1
            res = abs(g[j + 1]) / bnorm
            stats.history.append(res)
            if res <= tol or lucky or stats.iterations >= maxit:
                break
        y = np.linalg.solve(np.triu(H[:j_used, :j_used]), g[:j_used])
        x = x + M(V[:j_used].T @ y)
        r = b - apply(x)
        beta = np.linalg.norm(r)
        if beta / bnorm < best_res:
            best_x, best_res = x.copy(), beta / bnorm
        stats.restarts += 1
        if lucky:
            stats.converged = beta / bnorm <= max(tol, 1e-10)
            break
    stats.residual = float(beta / bnorm)
    if not stats.converged:
        x = best_x
        stats.residual = float(best_res)
        msg = f"GMRES did not converge: {stats.iterations} iterations, residual {stats.residual:.2e}"
        if raise_on_failure:
            raise ConvergenceError(msg, stats)
        log.warning(msg)
    return x, stats

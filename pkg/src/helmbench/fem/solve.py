"""Direct and preconditioned-iterative solution of assembled systems."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..linalg import ConvergenceError, IterStats, SparseLU, gmres
from .assembly import AssembledSystem

log = logging.getLogger(__name__)

DIRECT_TOL = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    method: str = "direct"
    tol: float = 1e-10
    restart: int = 50
    maxit: int = 2000
    blocks: int = 4


def block_jacobi(matrix, coords, blocks: int):
    """Non-overlapping block-Jacobi preconditioner; blocks are slabs in x."""
    order = np.argsort(coords[:, 0], kind="stable")
    parts = np.array_split(order, max(1, blocks))
    facs = [(idx, SparseLU(matrix[idx][:, idx])) for idx in parts if idx.size]

    def apply(v):
        out = np.empty_like(v, dtype=complex)
        for idx, f in facs:
            out[idx] = f.solve(v[idx])
        return out

    return apply


def solve_fem(system: AssembledSystem, config: SolverConfig = SolverConfig(), return_stats: bool = False):
    """Solve for the free DOFs and return the full DOF vector (lifting included)."""
    A, b = system.matrix, system.rhs
    stats = None
    if config.method == "direct":
        lu = SparseLU(A)
        x = lu.solve(b)
        res = system.residual(x)
        if res > DIRECT_TOL:
            x = x + lu.solve(b - A @ x)
            res = system.residual(x)
        if res > DIRECT_TOL:
            log.warning("direct solve residual %.2e above %.0e", res, DIRECT_TOL)
        stats = IterStats(iterations=1, residual=res, converged=res <= DIRECT_TOL, history=[res])
    elif config.method == "gmres":
        coords = system.space.dof_coords[system.free]
        M = block_jacobi(A, coords, config.blocks) if config.blocks else None
        x, stats = gmres(lambda v: A @ v, b, restart=config.restart, tol=config.tol, maxit=config.maxit, precond=M)
        if not stats.converged:
            raise ConvergenceError(
                f"GMRES stopped after {stats.iterations} iterations at residual {stats.residual:.2e}", stats
            )
    else:
        raise ValueError(f"unknown solver method {config.method!r}")
    u = system.expand(x)
    return (u, stats) if return_stats else u

"""Deterministic Davidson iteration for the lowest eigenpair of a symmetric operator.

No randomness anywhere: the start vector is the unit vector at the smallest
diagonal entry, ties broken toward the lower index, and the returned vector has
its largest-magnitude component made positive. Two Ritz vectors are kept across
subspace restarts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, EmptyError


@dataclass
class DavidsonResult:
    value: float
    vector: np.ndarray
    matvecs: int
    residual: float
    # spread of the two lowest Ritz values at exit, None when the final
    # subspace held a single vector; a coarse stand-in for the true gap
    ritz_gap: float | None = None


def _reorthogonalize(t: np.ndarray, V: np.ndarray, ncol: int) -> tuple[np.ndarray, float]:
    for _ in range(2):
        t = t - V[:, :ncol] @ (V[:, :ncol].T @ t)
    return t, float(np.linalg.norm(t))


def lowest_eigenpair(
    matvec: Callable[[np.ndarray], np.ndarray],
    diagonal: np.ndarray,
    tol: float = 1e-9,
    max_subspace: int = 32,
    max_restarts: int = 40,
    v0: np.ndarray | None = None,
) -> DavidsonResult:
    """Smallest eigenvalue and eigenvector of the operator behind matvec.

    diagonal is the operator diagonal, used for the start vector and the
    preconditioner; v0, when given and nonzero, overrides the default unit
    start vector. Raises ConvergenceError (carrying the best residual seen)
    if the restart budget runs out.
    """
    diagonal = np.asarray(diagonal, dtype=np.float64)
    dim = diagonal.shape[0]
    if dim == 0:
        raise EmptyError("cannot diagonalize an empty space")
    if dim == 1:
        e = float(matvec(np.ones(1))[0])
        return DavidsonResult(e, np.ones(1), 1, 0.0, None)

    max_subspace = min(max_subspace, dim)
    V = np.zeros((dim, max_subspace))
    W = np.zeros((dim, max_subspace))
    if v0 is not None and (nrm0 := float(np.linalg.norm(v0))) > 0:
        V[:, 0] = np.asarray(v0, dtype=np.float64) / nrm0
    else:
        V[int(np.argmin(diagonal)), 0] = 1.0
    W[:, 0] = matvec(V[:, 0])
    ncol = 1
    nmv = 1
    best = np.inf

    for _ in range(max_restarts):
        while True:
            T = V[:, :ncol].T @ W[:, :ncol]
            T = 0.5 * (T + T.T)
            evals, evecs = np.linalg.eigh(T)
            theta = float(evals[0])
            s = evecs[:, 0]
            x = V[:, :ncol] @ s
            r = W[:, :ncol] @ s - theta * x
            rnorm = float(np.linalg.norm(r))
            best = min(best, rnorm)
            if rnorm < tol:
                x /= np.linalg.norm(x)
                if x[int(np.argmax(np.abs(x)))] < 0:
                    x = -x
                gap = float(evals[1] - evals[0]) if ncol >= 2 else None
                return DavidsonResult(theta, x, nmv, rnorm, gap)
            if ncol == max_subspace:
                break
            denom = diagonal - theta
            np.copyto(denom, np.where(np.abs(denom) < 1e-8, np.where(denom < 0, -1e-8, 1e-8), denom))
            t, nrm = _reorthogonalize(r / denom, V, ncol)
            if nrm < 1e-10:
                # preconditioned residual collapsed onto the span; push along
                # the largest raw residual component instead
                t = np.zeros(dim)
                t[int(np.argmax(np.abs(r)))] = 1.0
                t, nrm = _reorthogonalize(t, V, ncol)
                if nrm < 1e-10:
                    raise ConvergenceError(
                        f"stagnated at residual {rnorm:.3e}", residual=rnorm
                    )
            V[:, ncol] = t / nrm
            W[:, ncol] = matvec(V[:, ncol])
            nmv += 1
            ncol += 1
        keep = min(2, ncol)
        V[:, :keep] = V[:, :ncol] @ evecs[:, :keep]
        W[:, :keep] = W[:, :ncol] @ evecs[:, :keep]
        ncol = keep
    raise ConvergenceError(f"no convergence in {max_restarts} restarts", residual=best)

"""Single-reference LUCJ parameters from CCSD doubles amplitudes.

The mixed-spin doubles tensor t2[i,a,j,b], viewed as a symmetric matrix over
composite (ia) indices, factors into eigenpairs (lambda, m). Each kept pair
becomes one circuit layer realizing exp(-i theta A^2) for the one-body
generator A = C + C^T, where C embeds m into the virtual-occupied block and
theta = scale * lambda: diagonalizing A = V diag(d) V^T, the layer's orbital
rotation is K = log(V) (real, via the Schur form) and the density couplings
are J_aa = J_bb = -theta d d^T with J_ab doubled. Expanding the exponential
off the reference populates exactly the t2-weighted double excitations, which
is what sampling-based selection needs from a seed state.

Every A^2 layer preserves excitation-rank parity within one spin register, so
a half-register state built from the layers alone carries no single-excitation
half-configurations and tensor products of its samples can never reach the
dominant mixed-spin doubles. The final orbital rotation K2 repairs that: it is
seeded as k2_mix * sum_k sqrt(|theta_k|) (C_k - C_k^T), giving each important
single-excited half an amplitude whose square matches the corresponding
doubles weight, so sampled halves pair up into exactly those doubles.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.linalg


class SeedError(ValueError):
    """Amplitude tensor malformed or not factorizable."""


def _real_log_special_orthogonal(V: np.ndarray) -> np.ndarray:
    """Real antisymmetric K with expm(K) = V for V in SO(n)."""
    T, Q = scipy.linalg.schur(V, output="real")
    n = V.shape[0]
    L = np.zeros((n, n))
    i = 0
    minus_ones = []
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > 1e-12:
            phi = np.arctan2(T[i + 1, i], T[i, i])
            L[i, i + 1] = -phi
            L[i + 1, i] = phi
            i += 2
        else:
            if T[i, i] < 0.0:
                minus_ones.append(i)
            i += 1
    # -1 eigenvalues come in pairs for SO(n); each pair is a rotation by pi
    if len(minus_ones) % 2:
        raise SeedError("matrix is not special orthogonal")
    for a, b in zip(minus_ones[0::2], minus_ones[1::2]):
        L[a, b] = -np.pi
        L[b, a] = np.pi
    K = Q @ L @ Q.T
    return 0.5 * (K - K.T)


def seed_layers(t2: np.ndarray, norb: int, nocc: int, *, scale: float = 1.0,
                max_layers: int = 8, rel_tol: float = 1e-3,
                k2_mix: float = 1.0) -> dict:
    """LUCJ parameter dictionary covering the doubles directions of t2.

    t2 is the mixed-spin block [i, a, j, b]; layers are ordered by descending
    eigenvalue magnitude and truncated at max_layers or when an eigenvalue
    drops below rel_tol times the largest. K2 sums over every direction
    regardless of truncation (it is a single matrix, not a per-layer cost)
    and k2_mix trades half-register sampling coverage against subspace size.
    """
    no, nv = t2.shape[0], t2.shape[1]
    if t2.shape != (no, nv, no, nv):
        raise SeedError(f"t2 must be [occ, virt, occ, virt], got {t2.shape}")
    if nocc != no or norb != no + nv:
        raise SeedError(f"t2 {t2.shape} inconsistent with norb={norb}, nocc={nocc}")
    M = t2.reshape(no * nv, no * nv)
    if not np.allclose(M, M.T, atol=1e-10):
        raise SeedError("t2[(ia),(jb)] is not symmetric")
    lam, vecs = np.linalg.eigh(M)
    order = np.argsort(-np.abs(lam))
    cutoff = rel_tol * max(np.abs(lam).max(), 1e-300)

    layers = []
    K2 = np.zeros((norb, norb))
    for rank, k in enumerate(order):
        theta = scale * float(lam[k])
        if abs(theta) < 1e-12:
            break
        m = vecs[:, k].reshape(no, nv)
        C = np.zeros((norb, norb))
        C[no:, :no] = m.T
        K2 += k2_mix * np.sqrt(abs(theta)) * (C - C.T)
        if rank >= max_layers or abs(lam[k]) < cutoff:
            continue
        A = C + C.T
        d, V = np.linalg.eigh(A)
        if np.linalg.det(V) < 0:
            V[:, 0] = -V[:, 0]
        K = _real_log_special_orthogonal(V)
        dd = np.outer(d, d)
        layers.append({
            "K": K.tolist(),
            "J_aa": (-theta * dd).tolist(),
            "J_bb": (-theta * dd).tolist(),
            "J_ab": (-2.0 * theta * dd).tolist(),
        })
    if not layers:
        raise SeedError("t2 has no usable doubles directions")
    return {
        "norb": int(norb),
        "layers": layers,
        "K2": K2.tolist(),
    }


def write_seed(path, params: dict) -> None:
    Path(path).write_text(json.dumps(params, indent=1) + "\n")

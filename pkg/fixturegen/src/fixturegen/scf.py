"""Restricted Hartree-Fock with DIIS, MO transforms, and active-space folding.

Closed-shell only: the density carries a factor 2 over doubly occupied MOs.
Orbitals come out in ascending energy order with a deterministic sign (the
largest-magnitude AO coefficient of each MO is positive). Folding freezes the
lowest n_core orbitals into an effective core energy and one-body term and
windows the integrals to the requested active orbitals; everything stays in
chemist (pq|rs) convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .integrals import core_hamiltonian, eri_tensor, overlap_matrix

_DIIS_DEPTH = 8


class ScfError(RuntimeError):
    """SCF failed: non-convergence or an unusable electron count."""


@dataclass(frozen=True)
class ScfResult:
    energy: float
    mo_energies: np.ndarray
    mo_coefs: np.ndarray
    n_iter: int
    e_nuc: float


def _fix_signs(C: np.ndarray) -> np.ndarray:
    C = C.copy()
    for k in range(C.shape[1]):
        i = int(np.argmax(np.abs(C[:, k])))
        if C[i, k] < 0:
            C[:, k] = -C[:, k]
    return C


def rhf(mol, eri: np.ndarray | None = None, max_iter: int = 150, conv: float = 1e-10) -> ScfResult:
    if mol.n_electrons % 2:
        raise ScfError(f"closed-shell RHF needs an even electron count, got {mol.n_electrons}")
    nocc = mol.n_electrons // 2
    if nocc > mol.n_ao:
        raise ScfError(f"{mol.n_electrons} electrons exceed {mol.n_ao} orbitals")
    S = overlap_matrix(mol)
    h = core_hamiltonian(mol)
    if eri is None:
        eri = eri_tensor(mol)
    w, V = np.linalg.eigh(S)
    if w.min() < 1e-10:
        raise ScfError("overlap matrix is numerically singular")
    X = V @ np.diag(w**-0.5) @ V.T
    e_nuc = mol.nuclear_repulsion()

    # generalized Wolfsberg-Helmholz start; a bare core guess can settle into
    # a higher SCF stationary point for multiply bonded systems (N2: +0.73 Ha)
    hd = np.diag(h)
    F = 0.875 * S * (hd[:, None] + hd[None, :])
    np.fill_diagonal(F, hd.copy())
    energy = 0.0
    errs: list = []
    focks: list = []
    for it in range(1, max_iter + 1):
        eps, Cp = np.linalg.eigh(X.T @ F @ X)
        C = _fix_signs(X @ Cp)
        D = 2.0 * C[:, :nocc] @ C[:, :nocc].T
        J = np.einsum("pqrs,rs->pq", eri, D, optimize=True)
        K = np.einsum("prqs,rs->pq", eri, D, optimize=True)
        F_new = h + J - 0.5 * K
        e_new = 0.5 * np.sum(D * (h + F_new)) + e_nuc
        comm = F_new @ D @ S - S @ D @ F_new
        err = X.T @ comm @ X
        if np.abs(err).max() < conv and abs(e_new - energy) < 10 * conv:
            return ScfResult(float(e_new), eps, C, it, e_nuc)
        energy = e_new
        errs.append(err.ravel())
        focks.append(F_new)
        if len(errs) > _DIIS_DEPTH:
            errs.pop(0)
            focks.pop(0)
        if len(errs) >= 2:
            m = len(errs)
            B = -np.ones((m + 1, m + 1))
            B[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    B[i, j] = errs[i] @ errs[j]
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                coef = np.linalg.solve(B, rhs)[:m]
                F = sum(c * f for c, f in zip(coef, focks))
            except np.linalg.LinAlgError:
                F = F_new
        else:
            F = F_new
    raise ScfError(f"SCF did not converge in {max_iter} iterations")


def mo_transform(h_ao: np.ndarray, eri_ao: np.ndarray, C: np.ndarray):
    """One- and two-electron integrals in the MO basis, (pq|rs) order."""
    h = C.T @ h_ao @ C
    tmp = np.einsum("pqrs,pi->iqrs", eri_ao, C, optimize=True)
    tmp = np.einsum("iqrs,qj->ijrs", tmp, C, optimize=True)
    tmp = np.einsum("ijrs,rk->ijks", tmp, C, optimize=True)
    eri = np.einsum("ijks,sl->ijkl", tmp, C, optimize=True)
    return h, eri


def fold_active(h_mo: np.ndarray, eri_mo: np.ndarray, e_nuc: float,
                n_electrons: int, ne_act: int, no_act: int):
    """Freeze core orbitals below the active window; return (e_core, h_eff, eri_act)."""
    n_mo = h_mo.shape[0]
    if (n_electrons - ne_act) % 2:
        raise ScfError(f"cannot freeze an odd electron count ({n_electrons} -> {ne_act})")
    n_core = (n_electrons - ne_act) // 2
    if n_core < 0:
        raise ScfError(f"active electrons {ne_act} exceed total {n_electrons}")
    if n_core + no_act > n_mo:
        raise ScfError(f"active window [{n_core}, {n_core + no_act}) exceeds {n_mo} orbitals")
    if ne_act > 2 * no_act:
        raise ScfError(f"{ne_act} electrons do not fit in {no_act} orbitals")
    core = np.arange(n_core)
    act = np.arange(n_core, n_core + no_act)
    e_core = e_nuc + 2.0 * h_mo[core, core].sum()
    for c in core:
        for cp in core:
            e_core += 2.0 * eri_mo[c, c, cp, cp] - eri_mo[c, cp, cp, c]
    h_eff = h_mo[np.ix_(act, act)].copy()
    for c in core:
        for ip, p in enumerate(act):
            for iq, q in enumerate(act):
                h_eff[ip, iq] += 2.0 * eri_mo[p, q, c, c] - eri_mo[p, c, c, q]
    eri_act = eri_mo[np.ix_(act, act, act, act)].copy()
    return float(e_core), h_eff, eri_act


def hf_in_active(e_core: float, h_eff: np.ndarray, eri_act: np.ndarray, ne_act: int) -> float:
    """HF determinant energy evaluated from folded quantities (consistency check)."""
    no = ne_act // 2
    occ = np.arange(no)
    e = e_core + 2.0 * h_eff[occ, occ].sum()
    for i in occ:
        for j in occ:
            e += 2.0 * eri_act[i, i, j, j] - eri_act[i, j, j, i]
    return float(e)

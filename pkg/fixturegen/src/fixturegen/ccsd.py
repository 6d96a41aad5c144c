"""Spin-orbital CCSD for reference correlation energies and t2 amplitudes.

Works directly on active-space integrals in chemist (pq|rs) convention with
a closed-shell reference. Spin orbitals interleave alpha and beta (2p, 2p+1)
so the occupied block is contiguous. Amplitude equations use the standard
one- and two-particle intermediates; iteration starts from MP2 and is
DIIS-accelerated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_DIIS_DEPTH = 8


class CcsdError(RuntimeError):
    """Amplitude iteration failed to converge."""


@dataclass(frozen=True)
class CcsdResult:
    e_corr: float
    e_total: float
    e_mp2: float
    t1: np.ndarray
    t2: np.ndarray
    n_iter: int


def spin_orbital_integrals(h1: np.ndarray, h2: np.ndarray):
    """Interleaved spin-orbital h and antisymmetrized <pq||rs> from spatial chemist data."""
    n = h1.shape[0]
    nso = 2 * n
    h = np.zeros((nso, nso))
    h[0::2, 0::2] = h1
    h[1::2, 1::2] = h1
    chem_t = np.ascontiguousarray(h2.transpose(0, 2, 1, 3))  # [i,j,k,l] = (ik|jl)
    phys = np.zeros((nso,) * 4)
    for sa in (0, 1):
        for sb in (0, 1):
            phys[sa::2, sb::2, sa::2, sb::2] = chem_t
    anti = phys - phys.transpose(0, 1, 3, 2)
    return h, anti


def ccsd(h1: np.ndarray, h2: np.ndarray, e_core: float, nelec: int,
         max_iter: int = 200, conv: float = 1e-10) -> CcsdResult:
    h, M = spin_orbital_integrals(h1, h2)
    nso = h.shape[0]
    if not 0 < nelec < nso:
        raise CcsdError(f"{nelec} electrons out of range for {nso} spin orbitals")
    o = slice(0, nelec)
    v = slice(nelec, nso)

    f = h + np.einsum("piqi->pq", M[:, o, :, o], optimize=True)
    e_ref = float(np.sum(np.diag(h)[o]) + 0.5 * np.einsum("ijij->", M[o, o, o, o])) + e_core

    eps = np.diag(f)
    d1 = eps[o, None] - eps[None, v]
    d2 = eps[o, None, None, None] + eps[None, o, None, None] \
        - eps[None, None, v, None] - eps[None, None, None, v]

    t1 = np.zeros_like(d1)
    t2 = M[o, o, v, v] / d2
    e_mp2 = 0.25 * float(np.einsum("ijab,ijab->", M[o, o, v, v], t2, optimize=True))

    def energy(t1, t2):
        e = float(np.einsum("ia,ia->", f[o, v], t1, optimize=True))
        e += 0.25 * float(np.einsum("ijab,ijab->", M[o, o, v, v], t2, optimize=True))
        e += 0.5 * float(np.einsum("ijab,ia,jb->", M[o, o, v, v], t1, t1, optimize=True))
        return e

    e_old = e_mp2
    errs: list = []
    amps: list = []
    for it in range(1, max_iter + 1):
        tau_t = t2 + 0.5 * (np.einsum("ia,jb->ijab", t1, t1)
                            - np.einsum("ib,ja->ijab", t1, t1))
        tau = t2 + np.einsum("ia,jb->ijab", t1, t1) - np.einsum("ib,ja->ijab", t1, t1)

        Fae = f[v, v] - np.diag(np.diag(f[v, v]))
        Fae -= 0.5 * np.einsum("me,ma->ae", f[o, v], t1, optimize=True)
        Fae += np.einsum("mf,mafe->ae", t1, M[o, v, v, v], optimize=True)
        Fae -= 0.5 * np.einsum("mnaf,mnef->ae", tau_t, M[o, o, v, v], optimize=True)

        Fmi = f[o, o] - np.diag(np.diag(f[o, o]))
        Fmi += 0.5 * np.einsum("ie,me->mi", t1, f[o, v], optimize=True)
        Fmi += np.einsum("ne,mnie->mi", t1, M[o, o, o, v], optimize=True)
        Fmi += 0.5 * np.einsum("inef,mnef->mi", tau_t, M[o, o, v, v], optimize=True)

        Fme = f[o, v] + np.einsum("nf,mnef->me", t1, M[o, o, v, v], optimize=True)

        Wmnij = M[o, o, o, o].copy()
        x = np.einsum("je,mnie->mnij", t1, M[o, o, o, v], optimize=True)
        Wmnij += x - x.transpose(0, 1, 3, 2)
        Wmnij += 0.25 * np.einsum("ijef,mnef->mnij", tau, M[o, o, v, v], optimize=True)

        Wabef = M[v, v, v, v].copy()
        x = np.einsum("mb,amef->abef", t1, M[v, o, v, v], optimize=True)
        Wabef -= x - x.transpose(1, 0, 2, 3)
        Wabef += 0.25 * np.einsum("mnab,mnef->abef", tau, M[o, o, v, v], optimize=True)

        Wmbej = M[o, v, v, o].copy()
        Wmbej += np.einsum("jf,mbef->mbej", t1, M[o, v, v, v], optimize=True)
        Wmbej -= np.einsum("nb,mnej->mbej", t1, M[o, o, v, o], optimize=True)
        Wmbej -= np.einsum("jnfb,mnef->mbej",
                           0.5 * t2 + np.einsum("jf,nb->jnfb", t1, t1),
                           M[o, o, v, v], optimize=True)

        t1_new = f[o, v].copy()
        t1_new += np.einsum("ie,ae->ia", t1, Fae, optimize=True)
        t1_new -= np.einsum("ma,mi->ia", t1, Fmi, optimize=True)
        t1_new += np.einsum("imae,me->ia", t2, Fme, optimize=True)
        t1_new -= np.einsum("nf,naif->ia", t1, M[o, v, o, v], optimize=True)
        t1_new -= 0.5 * np.einsum("imef,maef->ia", t2, M[o, v, v, v], optimize=True)
        t1_new -= 0.5 * np.einsum("mnae,nmei->ia", t2, M[o, o, v, o], optimize=True)
        t1_new /= d1

        t2_new = M[o, o, v, v].copy()
        x = np.einsum("ijae,be->ijab", t2,
                      Fae - 0.5 * np.einsum("mb,me->be", t1, Fme), optimize=True)
        t2_new += x - x.transpose(0, 1, 3, 2)
        x = np.einsum("imab,mj->ijab", t2,
                      Fmi + 0.5 * np.einsum("je,me->mj", t1, Fme), optimize=True)
        t2_new -= x - x.transpose(1, 0, 2, 3)
        t2_new += 0.5 * np.einsum("mnab,mnij->ijab", tau, Wmnij, optimize=True)
        t2_new += 0.5 * np.einsum("ijef,abef->ijab", tau, Wabef, optimize=True)
        x = np.einsum("imae,mbej->ijab", t2, Wmbej, optimize=True)
        x -= np.einsum("ie,ma,mbej->ijab", t1, t1, M[o, v, v, o], optimize=True)
        t2_new += x - x.transpose(1, 0, 2, 3) - x.transpose(0, 1, 3, 2) \
            + x.transpose(1, 0, 3, 2)
        x = np.einsum("ie,abej->ijab", t1, M[v, v, v, o], optimize=True)
        t2_new += x - x.transpose(1, 0, 2, 3)
        x = np.einsum("ma,mbij->ijab", t1, M[o, v, o, o], optimize=True)
        t2_new -= x - x.transpose(0, 1, 3, 2)
        t2_new /= d2

        e_new = energy(t1_new, t2_new)
        step = np.concatenate([(t1_new - t1).ravel(), (t2_new - t2).ravel()])
        if abs(e_new - e_old) < conv and np.abs(step).max() < 100 * conv:
            return CcsdResult(e_new, e_ref + e_new, e_mp2, t1_new, t2_new, it)
        e_old = e_new

        errs.append(step)
        amps.append(np.concatenate([t1_new.ravel(), t2_new.ravel()]))
        if len(errs) > _DIIS_DEPTH:
            errs.pop(0)
            amps.pop(0)
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
                c = np.linalg.solve(B, rhs)[:m]
                mixed = sum(ci * ai for ci, ai in zip(c, amps))
                t1 = mixed[: t1.size].reshape(t1.shape)
                t2 = mixed[t1.size:].reshape(t2.shape)
            except np.linalg.LinAlgError:
                t1, t2 = t1_new, t2_new
        else:
            t1, t2 = t1_new, t2_new
    raise CcsdError(f"amplitudes did not converge in {max_iter} iterations")


def spatial_t2(result: CcsdResult, nelec: int) -> np.ndarray:
    """Mixed-spin doubles block as [i, a, j, b] over spatial occupied/virtual."""
    no = nelec // 2
    t2 = result.t2
    nv = t2.shape[2] // 2
    out = np.zeros((no, nv, no, nv))
    for i in range(no):
        for j in range(no):
            for a in range(nv):
                for b in range(nv):
                    out[i, a, j, b] = t2[2 * i, 2 * j + 1, 2 * a, 2 * b + 1]
    return out

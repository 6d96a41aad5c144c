"""Gaussian integrals over contracted cartesian functions.

McMurchie-Davidson throughout: 1D Hermite expansion coefficients E_t carry the
angular momentum, the Boys function and the auxiliary tensor R_tuv carry the
Coulomb kernel. Primitive integrals are unnormalized; contraction coefficients
supplied by the basis layer already include primitive norms.

The ERI builder vectorizes over primitive pairs: per AO pair it caches the
composite exponents, centers, and dense Hermite tensors Lambda[t,u,v,pair],
then every AO quartet reduces to one Boys evaluation over the bra x ket pair
grid and a small contraction. Chemist convention throughout: eri[i,j,k,l] =
(ij|kl).
"""

from __future__ import annotations

import numpy as np
import scipy.special

__all__ = [
    "boys",
    "hermite_coefs",
    "overlap_prim",
    "kinetic_prim",
    "nuclear_prim",
    "eri_prim",
    "overlap_contracted",
    "kinetic_contracted",
    "nuclear_contracted",
    "eri_contracted",
    "overlap_matrix",
    "kinetic_matrix",
    "nuclear_matrix",
    "eri_tensor",
    "core_hamiltonian",
]


def boys(mmax: int, x) -> np.ndarray:
    """F_m(x) for m = 0..mmax; top order from the incomplete gamma, rest downward."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    flat = x.ravel()
    F = np.empty((mmax + 1, flat.size))
    mm = mmax + 0.5
    tiny = flat < 1e-13
    F[mmax, tiny] = 1.0 / (2 * mmax + 1)
    if (~tiny).any():
        xb = flat[~tiny]
        F[mmax, ~tiny] = scipy.special.gamma(mm) * scipy.special.gammainc(mm, xb) / (2 * xb**mm)
    ex = np.exp(-flat)
    for m in range(mmax - 1, -1, -1):
        F[m] = (2 * flat * F[m + 1] + ex) / (2 * m + 1)
    return F.reshape((mmax + 1,) + x.shape)


def hermite_coefs(i: int, j: int, a: float, b: float, Q: float) -> np.ndarray:
    """E_t for t = 0..i+j, expanding x^i x^j Gaussians at separation Q = Ax - Bx."""
    p = a + b
    E = np.zeros((i + 1, j + 1, i + j + 2))  # slack slot keeps t+1 reads in range
    E[0, 0, 0] = np.exp(-a * b / p * Q * Q)
    for ii in range(i + 1):
        for jj in range(j + 1):
            if ii == jj == 0:
                continue
            if jj == 0:
                src, shift = E[ii - 1, 0], -b * Q / p
            else:
                src, shift = E[ii, jj - 1], a * Q / p
            for t in range(ii + jj + 1):
                left = src[t - 1] / (2 * p) if t else 0.0
                E[ii, jj, t] = left + shift * src[t] + (t + 1) * src[t + 1]
    return E[i, j, : i + j + 1]


def _coulomb_R(t: int, u: int, v: int, n: int, p, PC, F, memo: dict):
    """Auxiliary Hermite-Coulomb tensor; works elementwise on array arguments."""
    key = (t, u, v, n)
    if key in memo:
        return memo[key]
    if t == u == v == 0:
        val = (-2.0 * p) ** n * F[n]
    elif t > 0:
        val = PC[0] * _coulomb_R(t - 1, u, v, n + 1, p, PC, F, memo)
        if t > 1:
            val = val + (t - 1) * _coulomb_R(t - 2, u, v, n + 1, p, PC, F, memo)
    elif u > 0:
        val = PC[1] * _coulomb_R(t, u - 1, v, n + 1, p, PC, F, memo)
        if u > 1:
            val = val + (u - 1) * _coulomb_R(t, u - 2, v, n + 1, p, PC, F, memo)
    else:
        val = PC[2] * _coulomb_R(t, u, v - 1, n + 1, p, PC, F, memo)
        if v > 1:
            val = val + (v - 1) * _coulomb_R(t, u, v - 2, n + 1, p, PC, F, memo)
    memo[key] = val
    return val


def overlap_prim(pw1, A, a, pw2, B, b) -> float:
    p = a + b
    val = (np.pi / p) ** 1.5
    for d in range(3):
        val *= hermite_coefs(pw1[d], pw2[d], a, b, A[d] - B[d])[0]
    return val


def _s1d(i: int, j: int, a: float, b: float, Q: float) -> float:
    if i < 0 or j < 0:
        return 0.0
    return hermite_coefs(i, j, a, b, Q)[0] * np.sqrt(np.pi / (a + b))


def kinetic_prim(pw1, A, a, pw2, B, b) -> float:
    svals = [_s1d(pw1[d], pw2[d], a, b, A[d] - B[d]) for d in range(3)]
    tvals = []
    for d in range(3):
        i, j, Q = pw1[d], pw2[d], A[d] - B[d]
        t = b * (2 * j + 1) * _s1d(i, j, a, b, Q) - 2 * b * b * _s1d(i, j + 2, a, b, Q)
        if j > 1:
            t -= 0.5 * j * (j - 1) * _s1d(i, j - 2, a, b, Q)
        tvals.append(t)
    return (
        tvals[0] * svals[1] * svals[2]
        + svals[0] * tvals[1] * svals[2]
        + svals[0] * svals[1] * tvals[2]
    )


def nuclear_prim(pw1, A, a, pw2, B, b, C) -> float:
    """Attraction to a unit positive charge at C (positive-valued integral)."""
    p = a + b
    P = (a * np.asarray(A) + b * np.asarray(B)) / p
    E = [hermite_coefs(pw1[d], pw2[d], a, b, A[d] - B[d]) for d in range(3)]
    PC = P - np.asarray(C)
    lt = pw1[0] + pw2[0] + pw1[1] + pw2[1] + pw1[2] + pw2[2]
    F = boys(lt, p * float(PC @ PC))[:, 0]
    memo: dict = {}
    val = 0.0
    for t in range(len(E[0])):
        for u in range(len(E[1])):
            for v in range(len(E[2])):
                val += E[0][t] * E[1][u] * E[2][v] * _coulomb_R(t, u, v, 0, p, PC, F, memo)
    return 2 * np.pi / p * val


def eri_prim(pw1, A, a, pw2, B, b, pw3, C, c, pw4, D, d) -> float:
    """(ab|cd) over four unnormalized primitives, chemist convention."""
    p, q = a + b, c + d
    P = (a * np.asarray(A) + b * np.asarray(B)) / p
    Q = (c * np.asarray(C) + d * np.asarray(D)) / q
    Eb = [hermite_coefs(pw1[i], pw2[i], a, b, A[i] - B[i]) for i in range(3)]
    Ek = [hermite_coefs(pw3[i], pw4[i], c, d, C[i] - D[i]) for i in range(3)]
    alpha = p * q / (p + q)
    PQ = P - Q
    lt = sum(pw1) + sum(pw2) + sum(pw3) + sum(pw4)
    F = boys(lt, alpha * float(PQ @ PQ))[:, 0]
    memo: dict = {}
    val = 0.0
    for t in range(len(Eb[0])):
        for u in range(len(Eb[1])):
            for v in range(len(Eb[2])):
                braw = Eb[0][t] * Eb[1][u] * Eb[2][v]
                if braw == 0.0:
                    continue
                for tt in range(len(Ek[0])):
                    for uu in range(len(Ek[1])):
                        for vv in range(len(Ek[2])):
                            ketw = Ek[0][tt] * Ek[1][uu] * Ek[2][vv]
                            if ketw == 0.0:
                                continue
                            sign = -1.0 if (tt + uu + vv) % 2 else 1.0
                            val += braw * ketw * sign * _coulomb_R(
                                t + tt, u + uu, v + vv, 0, alpha, PQ, F, memo
                            )
    return 2 * np.pi**2.5 / (p * q * np.sqrt(p + q)) * val


def _contract_pair(f, ao1, ao2, *extra) -> float:
    val = 0.0
    for a, ca in zip(ao1.exps, ao1.coefs):
        for b, cb in zip(ao2.exps, ao2.coefs):
            val += ca * cb * f(ao1.powers, ao1.center, a, ao2.powers, ao2.center, b, *extra)
    return val


def overlap_contracted(ao1, ao2) -> float:
    return _contract_pair(overlap_prim, ao1, ao2)


def kinetic_contracted(ao1, ao2) -> float:
    return _contract_pair(kinetic_prim, ao1, ao2)


def nuclear_contracted(ao1, ao2, C) -> float:
    return _contract_pair(nuclear_prim, ao1, ao2, C)


def eri_contracted(ao1, ao2, ao3, ao4) -> float:
    val = 0.0
    for a, ca in zip(ao1.exps, ao1.coefs):
        for b, cb in zip(ao2.exps, ao2.coefs):
            for c, cc in zip(ao3.exps, ao3.coefs):
                for d, cd in zip(ao4.exps, ao4.coefs):
                    val += ca * cb * cc * cd * eri_prim(
                        ao1.powers, ao1.center, a,
                        ao2.powers, ao2.center, b,
                        ao3.powers, ao3.center, c,
                        ao4.powers, ao4.center, d,
                    )
    return val


def _pair_matrix(mol, f, *extra) -> np.ndarray:
    n = mol.n_ao
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            M[i, j] = M[j, i] = f(mol.aos[i], mol.aos[j], *extra)
    return M


def overlap_matrix(mol) -> np.ndarray:
    return _pair_matrix(mol, overlap_contracted)


def kinetic_matrix(mol) -> np.ndarray:
    return _pair_matrix(mol, kinetic_contracted)


def nuclear_matrix(mol) -> np.ndarray:
    """Full nuclear attraction, charge-weighted and negative."""
    n = mol.n_ao
    M = np.zeros((n, n))
    for center, Z in zip(mol.coords, mol.charges):
        M -= Z * _pair_matrix(mol, nuclear_contracted, center)
    return M


def core_hamiltonian(mol) -> np.ndarray:
    return kinetic_matrix(mol) + nuclear_matrix(mol)


class _HermitePair:
    """Per-AO-pair primitive data: composite exponents, centers, Hermite tensor."""

    def __init__(self, ao1, ao2):
        a = np.repeat(ao1.exps, ao2.exps.size)
        b = np.tile(ao2.exps, ao1.exps.size)
        cc = np.repeat(ao1.coefs, ao2.coefs.size) * np.tile(ao2.coefs, ao1.coefs.size)
        self.p = a + b
        self.P = (a[:, None] * ao1.center + b[:, None] * ao2.center) / self.p[:, None]
        dims = [ao1.powers[d] + ao2.powers[d] + 1 for d in range(3)]
        lam = np.zeros((dims[0], dims[1], dims[2], a.size))
        comp = [
            np.array([
                hermite_coefs(ao1.powers[d], ao2.powers[d], ai, bi, ao1.center[d] - ao2.center[d])
                for ai, bi in zip(a, b)
            ]).T
            for d in range(3)
        ]
        for t in range(dims[0]):
            for u in range(dims[1]):
                for v in range(dims[2]):
                    lam[t, u, v] = cc * comp[0][t] * comp[1][u] * comp[2][v]
        self.lam = lam
        self.ltot = sum(dims) - 3


def eri_tensor(mol) -> np.ndarray:
    """All (ij|kl) with 8-fold fill; one Boys evaluation per AO quartet."""
    n = mol.n_ao
    pairs = {}
    for i in range(n):
        for j in range(i + 1):
            pairs[(i, j)] = _HermitePair(mol.aos[i], mol.aos[j])
    keys = sorted(pairs)
    out = np.zeros((n, n, n, n))
    for pi, (i, j) in enumerate(keys):
        bra = pairs[(i, j)]
        for (k, l) in keys[: pi + 1]:
            ket = pairs[(k, l)]
            val = _quartet(bra, ket)
            for a, b in ((i, j), (j, i)):
                for c, d in ((k, l), (l, k)):
                    out[a, b, c, d] = out[c, d, a, b] = val
    return out


def _quartet(bra: _HermitePair, ket: _HermitePair) -> float:
    p = bra.p[:, None]
    q = ket.p[None, :]
    alpha = p * q / (p + q)
    PQ = bra.P[:, None, :] - ket.P[None, :, :]
    x = alpha * np.einsum("ijd,ijd->ij", PQ, PQ)
    F = boys(bra.ltot + ket.ltot, x)
    scale = 2 * np.pi**2.5 / (p * q * np.sqrt(p + q))
    memo: dict = {}
    PQd = (PQ[..., 0], PQ[..., 1], PQ[..., 2])
    total = 0.0
    bt, bu, bv = bra.lam.shape[:3]
    kt, ku, kv = ket.lam.shape[:3]
    for t in range(bt):
        for u in range(bu):
            for v in range(bv):
                w_bra = bra.lam[t, u, v][:, None] * scale
                for tt in range(kt):
                    for uu in range(ku):
                        for vv in range(kv):
                            sign = -1.0 if (tt + uu + vv) % 2 else 1.0
                            R = _coulomb_R(t + tt, u + uu, v + vv, 0, alpha, PQd, F, memo)
                            total += sign * np.sum(w_bra * ket.lam[tt, uu, vv][None, :] * R)
    return float(total)

"""Dense full CI over an active space, for reference energies.

Determinants are (alpha, beta) occupation bitmasks over spatial orbitals.
Matrix elements follow the Slater-Condon rules with chemist-notation (pq|rs)
integrals; phases come from annihilating and creating in ascending orbital
order. Sized for fixtures: the dense sector Hamiltonian is built in memory
and diagonalized directly, so dimensions are capped.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np


class FciError(RuntimeError):
    """Sector too large or an unusable electron count."""


@dataclass(frozen=True)
class FciResult:
    energy: float
    dimension: int


def sector_dimension(norb: int, nelec: int) -> int:
    if nelec % 2:
        raise FciError(f"closed-shell sector needs an even electron count, got {nelec}")
    na = nelec // 2
    if na > norb:
        raise FciError(f"{nelec} electrons exceed {norb} orbitals")
    return comb(norb, na) ** 2


def _masks(norb: int, nocc: int) -> list:
    out = []
    for occ in combinations(range(norb), nocc):
        m = 0
        for p in occ:
            m |= 1 << p
        out.append(m)
    return out


def _annihilate(mask: int, p: int):
    sign = -1 if bin(mask & ((1 << p) - 1)).count("1") % 2 else 1
    return mask & ~(1 << p), sign


def _create(mask: int, p: int):
    sign = -1 if bin(mask & ((1 << p) - 1)).count("1") % 2 else 1
    return mask | (1 << p), sign


def _single_phase(mask: int, p: int, q: int) -> int:
    """Phase of a_q^dag a_p acting on the ascending-ordered determinant."""
    m, s1 = _annihilate(mask, p)
    _, s2 = _create(m, q)
    return s1 * s2


def _occ(mask: int) -> list:
    out = []
    p = 0
    while mask >> p:
        if (mask >> p) & 1:
            out.append(p)
        p += 1
    return out


def _diagonal(oa, ob, h1, h2) -> float:
    e = sum(h1[p, p] for p in oa) + sum(h1[p, p] for p in ob)
    for occ in (oa, ob):
        for p in occ:
            for q in occ:
                e += 0.5 * (h2[p, p, q, q] - h2[p, q, q, p])
    for p in oa:
        for q in ob:
            e += h2[p, p, q, q]
    return e


def _single(p, q, occ_same, occ_other, h1, h2) -> float:
    """<D|H|D'> body for one p -> q excitation, before the phase."""
    v = h1[p, q]
    for r in occ_same:
        if r != p:
            v += h2[p, q, r, r] - h2[p, r, r, q]
    for r in occ_other:
        v += h2[p, q, r, r]
    return v


def build_sector_hamiltonian(h1: np.ndarray, h2: np.ndarray, norb: int, nelec: int) -> np.ndarray:
    na = nelec // 2
    amasks = _masks(norb, na)
    n_a = len(amasks)
    dim = n_a * n_a
    occs = {m: _occ(m) for m in amasks}
    H = np.zeros((dim, dim))

    # precompute alpha-string pair data: degree, and for degree 1/2 the moved orbitals
    pair: dict = {}
    for i, mi in enumerate(amasks):
        for j, mj in enumerate(amasks):
            diff = mi ^ mj
            deg = bin(diff).count("1") // 2
            if deg > 2:
                continue
            rem = _occ(diff & mi)
            add = _occ(diff & mj)
            pair[(i, j)] = (deg, rem, add)

    for ia in range(n_a):
        ma = amasks[ia]
        oa = occs[ma]
        for ib in range(n_a):
            mb = amasks[ib]
            ob = occs[mb]
            row = ia * n_a + ib
            for ja in range(n_a):
                pa = pair.get((ia, ja))
                if pa is None:
                    continue
                dega, rema, adda = pa
                for jb in range(n_a):
                    pb = pair.get((ib, jb))
                    if pb is None:
                        continue
                    degb, remb, addb = pb
                    if dega + degb > 2:
                        continue
                    col = ja * n_a + jb
                    if col < row:
                        continue
                    if dega == 0 and degb == 0:
                        v = _diagonal(oa, ob, h1, h2)
                    elif dega == 1 and degb == 0:
                        (p,), (q,) = rema, adda
                        v = _single_phase(ma, p, q) * _single(p, q, oa, ob, h1, h2)
                    elif dega == 0 and degb == 1:
                        (p,), (q,) = remb, addb
                        v = _single_phase(mb, p, q) * _single(p, q, ob, oa, h1, h2)
                    elif dega == 1 and degb == 1:
                        (p,), (q,) = rema, adda
                        (r,), (s,) = remb, addb
                        v = _single_phase(ma, p, q) * _single_phase(mb, r, s) * h2[p, q, r, s]
                    elif dega == 2:
                        (p, q), (r, s) = rema, adda  # p < q, r < s
                        m1, s1 = _annihilate(ma, p)
                        m1, s2 = _annihilate(m1, q)
                        m1, s3 = _create(m1, s)
                        _, s4 = _create(m1, r)
                        v = s1 * s2 * s3 * s4 * (h2[p, r, q, s] - h2[p, s, q, r])
                    else:
                        (p, q), (r, s) = remb, addb
                        m1, s1 = _annihilate(mb, p)
                        m1, s2 = _annihilate(m1, q)
                        m1, s3 = _create(m1, s)
                        _, s4 = _create(m1, r)
                        v = s1 * s2 * s3 * s4 * (h2[p, r, q, s] - h2[p, s, q, r])
                    H[row, col] = v
                    H[col, row] = v
    return H


def fci_ground(h1: np.ndarray, h2: np.ndarray, e_core: float, nelec: int,
               max_dim: int = 2500) -> FciResult:
    """Lowest eigenvalue of the (nelec/2, nelec/2) sector, core energy included."""
    norb = h1.shape[0]
    dim = sector_dimension(norb, nelec)
    if dim > max_dim:
        raise FciError(f"sector dimension {dim} exceeds the dense cap {max_dim}")
    H = build_sector_hamiltonian(h1, h2, norb, nelec)
    w = np.linalg.eigvalsh(H)
    return FciResult(float(w[0] + e_core), dim)

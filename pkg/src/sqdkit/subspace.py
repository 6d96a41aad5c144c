"""Determinant subspaces and projected-Hamiltonian ground states.

Two space layouts. DeterminantSpace is an explicit list of determinants whose
Hamiltonian is assembled sparse, row by row, from the connection engine.
TensorSpace is a product of alpha and beta half-configuration sets; its
operator is applied matrix-free, with the opposite-spin interaction routed
through packed orbital-pair link tables so nothing outside the product space
is ever touched. Both agree element-for-element, which the tests check by
materializing small tensor spaces explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np
import scipy.sparse as sp

from .bitops import bits_matrix, popcount, popcount_array, sector_masks
from .davidson import lowest_eigenpair
from .determinants import Determinant
from .errors import CapacityError, EmptyError, RangeError, SectorError
from .excitations import ConnectionEngine, engine_for
from .integrals import IntegralTable

FCI_SPACE_CAP = 2_000_000
DENSE_CUTOFF = 2000


def det_keys(amasks: np.ndarray, bmasks: np.ndarray, norb: int) -> np.ndarray:
    """Sortable int64 key per determinant: alpha register in the high bits."""
    return (np.asarray(amasks, dtype=np.int64) << norb) | np.asarray(bmasks, dtype=np.int64)


def _as_sorted_unique_masks(masks: np.ndarray, norb: int, what: str) -> np.ndarray:
    arr = np.unique(np.asarray(masks, dtype=np.int64))
    if arr.size == 0:
        raise EmptyError(f"no {what} provided")
    if arr[0] < 0 or arr[-1] >= (1 << norb):
        raise RangeError(f"{what} mask out of range for norb={norb}")
    counts = popcount_array(arr)
    if counts.min() != counts.max():
        raise SectorError(f"{what} occupation numbers are not uniform")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DeterminantSpace:
    """Explicit determinant list, stored sorted by (alpha, beta) key, no repeats."""

    norb: int
    amasks: np.ndarray
    bmasks: np.ndarray

    @classmethod
    def from_masks(cls, norb: int, amasks, bmasks) -> "DeterminantSpace":
        amasks = np.asarray(amasks, dtype=np.int64)
        bmasks = np.asarray(bmasks, dtype=np.int64)
        if amasks.shape != bmasks.shape:
            raise SectorError("alpha and beta mask arrays must align")
        if amasks.size == 0:
            raise EmptyError("no determinants provided")
        if min(amasks.min(), bmasks.min()) < 0 or max(amasks.max(), bmasks.max()) >= (1 << norb):
            raise RangeError(f"determinant mask out of range for norb={norb}")
        ca = popcount_array(amasks)
        cb = popcount_array(bmasks)
        if ca.min() != ca.max() or cb.min() != cb.max():
            raise SectorError("determinants span more than one particle sector")
        keys = np.unique(det_keys(amasks, bmasks, norb))
        a = keys >> norb
        b = keys & ((np.int64(1) << norb) - 1)
        a.flags.writeable = False
        b.flags.writeable = False
        return cls(norb, a, b)

    @classmethod
    def from_determinants(cls, dets) -> "DeterminantSpace":
        dets = list(dets)
        if not dets:
            raise EmptyError("no determinants provided")
        norb = dets[0].norb
        return cls.from_masks(
            norb,
            np.array([d.alpha.mask for d in dets], dtype=np.int64),
            np.array([d.beta.mask for d in dets], dtype=np.int64),
        )

    @property
    def size(self) -> int:
        return int(self.amasks.size)

    @cached_property
    def keys(self) -> np.ndarray:
        k = det_keys(self.amasks, self.bmasks, self.norb)
        k.flags.writeable = False
        return k

    def index_of(self, amasks, bmasks) -> np.ndarray:
        """Index per query determinant, -1 where absent."""
        q = det_keys(amasks, bmasks, self.norb)
        pos = np.searchsorted(self.keys, q)
        pos = np.minimum(pos, self.size - 1)
        out = np.where(self.keys[pos] == q, pos, -1)
        return out.astype(np.int64)

    def contains(self, amasks, bmasks) -> np.ndarray:
        return self.index_of(amasks, bmasks) >= 0

    def union(self, other: "DeterminantSpace") -> "DeterminantSpace":
        if other.norb != self.norb:
            raise SectorError("register widths differ")
        return DeterminantSpace.from_masks(
            self.norb,
            np.concatenate([self.amasks, other.amasks]),
            np.concatenate([self.bmasks, other.bmasks]),
        )

    def determinants(self) -> Iterator[Determinant]:
        for a, b in zip(self.amasks.tolist(), self.bmasks.tolist()):
            yield Determinant.from_masks(a, b, self.norb)


@dataclass(frozen=True)
class TensorSpace:
    """Product space of alpha strings times beta strings, row-major, alpha outer."""

    norb: int
    astrings: np.ndarray
    bstrings: np.ndarray

    @classmethod
    def from_strings(cls, norb: int, astrings, bstrings) -> "TensorSpace":
        a = _as_sorted_unique_masks(astrings, norb, "alpha strings")
        b = _as_sorted_unique_masks(bstrings, norb, "beta strings")
        return cls(norb, a, b)

    @property
    def size(self) -> int:
        return int(self.astrings.size) * int(self.bstrings.size)

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.astrings.size), int(self.bstrings.size)

    def to_determinant_space(self) -> DeterminantSpace:
        na, nb = self.shape
        a = np.repeat(self.astrings, nb)
        b = np.tile(self.bstrings, na)
        return DeterminantSpace.from_masks(self.norb, a, b)

    def determinants(self) -> Iterator[Determinant]:
        for a in self.astrings.tolist():
            for b in self.bstrings.tolist():
                yield Determinant.from_masks(a, b, self.norb)


def fci_space(norb: int, n_alpha: int, n_beta: int, cap: int = FCI_SPACE_CAP) -> TensorSpace:
    """The complete particle-number sector as a tensor space."""
    a = sector_masks(norb, n_alpha)
    b = sector_masks(norb, n_beta)
    if int(a.size) * int(b.size) > cap:
        raise CapacityError(
            f"full sector has {int(a.size) * int(b.size)} determinants, cap is {cap}"
        )
    return TensorSpace.from_strings(norb, a, b)


# ---- explicit sparse Hamiltonian ----

def build_hamiltonian(space: DeterminantSpace, table: IntegralTable) -> sp.csr_matrix:
    """Projected Hamiltonian over an explicit space, diagonal included."""
    eng = engine_for(table)
    norb = space.norb
    keys = space.keys
    n = space.size
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for i in range(n):
        at, bt, v = eng.connections(int(space.amasks[i]), int(space.bmasks[i]))
        if len(v) == 0:
            continue
        tk = det_keys(at, bt, norb)
        pos = np.searchsorted(keys, tk)
        pos = np.minimum(pos, n - 1)
        hit = (keys[pos] == tk) & (pos > i)  # upper triangle once, mirrored below
        if not hit.any():
            continue
        j = pos[hit].astype(np.int32)
        v = v[hit]
        ii = np.full(j.size, i, dtype=np.int32)
        rows.append(ii)
        cols.append(j)
        vals.append(v)
        rows.append(j)
        cols.append(ii)
        vals.append(v)
    diag = eng.diagonal_batch(space.amasks, space.bmasks)
    idx = np.arange(n, dtype=np.int32)
    rows.append(idx)
    cols.append(idx)
    vals.append(diag)
    H = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return H.tocsr()


# ---- one-register Hamiltonian over a string set ----

def one_spin_hamiltonian(strings: np.ndarray, eng: ConnectionEngine) -> sp.csr_matrix:
    """Single-register Hamiltonian: one-electron plus same-register two-electron terms."""
    n = eng.norb
    ns = strings.size
    occ = bits_matrix(strings, n)
    same = eng.jpp - eng.kpj
    diag = occ @ eng.diag_h1 + 0.5 * np.einsum("ip,pq,iq->i", occ, same, occ)
    rows = [np.arange(ns, dtype=np.int32)]
    cols = [np.arange(ns, dtype=np.int32)]
    vals = [diag]
    for i in range(ns):
        m = int(strings[i])
        G = eng.single_matrix(occ[i], None)
        hh, pp, sg, tgt = eng.single_moves(m)
        h1s, h2s, p1s, p2s, dsg, dtgt = eng.double_moves(m)
        t = np.concatenate([tgt, dtgt])
        v = np.concatenate(
            [
                sg * G[pp, hh],
                dsg * (eng.eri[p1s, h1s, p2s, h2s] - eng.eri[p1s, h2s, p2s, h1s]),
            ]
        )
        pos = np.searchsorted(strings, t)
        pos = np.minimum(pos, ns - 1)
        hit = (strings[pos] == t) & (pos > i)
        if not hit.any():
            continue
        j = pos[hit].astype(np.int32)
        v = v[hit]
        ii = np.full(j.size, i, dtype=np.int32)
        rows += [ii, j]
        cols += [j, ii]
        vals += [v, v]
    H = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(ns, ns)
    )
    return H.tocsr()


# ---- matrix-free product-space operator ----

class TensorOperator:
    """H over a TensorSpace, applied as Ha (x) I + I (x) Hb + opposite-spin part.

    The opposite-spin part sums (pq|rs) E^a_pq E^b_rs through packed pair
    operators A_t = E_pq + E_qp (p > q) or E_pp, contracted with the packed
    integral block by one dense matmul per coefficient chunk. Move lists are
    restricted to the given string sets up front, so applications never leave
    the space.
    """

    def __init__(self, space: TensorSpace, table: IntegralTable, chunk: int = 256):
        self.space = space
        self.table = table
        self.chunk = chunk
        eng = engine_for(table)
        self.eng = eng
        n = table.norb
        self.norb = n
        self.na, self.nb = space.shape
        self.Ha = one_spin_hamiltonian(space.astrings, eng)
        self.Hb = one_spin_hamiltonian(space.bstrings, eng)
        self.Oa = bits_matrix(space.astrings, n)
        self.Ob = bits_matrix(space.bstrings, n)

        pairs = [(p, q) for p in range(n) for q in range(p + 1)]
        self.pairs = pairs
        npair = len(pairs)
        V = np.empty((npair, npair))
        for t, (p, q) in enumerate(pairs):
            for u, (r, s) in enumerate(pairs):
                V[t, u] = eng.eri[p, q, r, s]
        self.Vp = V
        self.amoves = [self._pair_moves(space.astrings, p, q) for (p, q) in pairs]
        self.bmoves = [self._pair_moves(space.bstrings, p, q) for (p, q) in pairs]

    def _pair_moves(self, strings: np.ndarray, p: int, q: int):
        """(src, dst, sign) for the q -> p move within the string set; None on the diagonal."""
        if p == q:
            return None
        has_q = (strings >> q) & 1
        has_p = (strings >> p) & 1
        src = np.nonzero((has_q == 1) & (has_p == 0))[0]
        if src.size == 0:
            return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0)
        moved = strings[src] ^ ((np.int64(1) << q) | (np.int64(1) << p))
        pos = np.searchsorted(strings, moved)
        pos = np.minimum(pos, strings.size - 1)
        hit = strings[pos] == moved
        src = src[hit]
        sign = 1.0 - 2.0 * (
            popcount_array(strings[src] & self.eng.between[q, p]) & 1
        )
        return src.astype(np.int64), pos[hit].astype(np.int64), sign

    @property
    def shape(self) -> tuple[int, int]:
        return self.space.size, self.space.size

    def diagonal(self) -> np.ndarray:
        d = self.Ha.diagonal()[:, None] + self.Hb.diagonal()[None, :]
        d = d + self.Oa @ self.eng.jpp @ self.Ob.T
        return (d + self.table.e_core).ravel()

    def matvec(self, x: np.ndarray) -> np.ndarray:
        C = np.ascontiguousarray(x.reshape(self.na, self.nb))
        sigma = self.Ha @ C
        sigma += (self.Hb @ C.T).T
        sigma += self.table.e_core * C
        npair = len(self.pairs)
        T = np.empty((npair, self.na, self.chunk))
        for lo in range(0, self.nb, self.chunk):
            hi = min(lo + self.chunk, self.nb)
            w = hi - lo
            Cc = C[:, lo:hi]
            Tw = T[:, :, :w]
            Tw[:] = 0.0
            for t, (p, q) in enumerate(self.pairs):
                if p == q:
                    Tw[t] = self.Oa[:, p : p + 1] * Cc
                else:
                    src, dst, sg = self.amoves[t]
                    if src.size:
                        Tw[t][dst] = sg[:, None] * Cc[src]
                        Tw[t][src] = sg[:, None] * Cc[dst]
            W = (self.Vp @ Tw.reshape(npair, -1)).reshape(npair, self.na, w)
            for u, (r, s) in enumerate(self.pairs):
                if r == s:
                    sigma[:, lo:hi] += W[u] * self.Ob[lo:hi, r][None, :]
                else:
                    src, dst, sg = self.bmoves[u]
                    sel = (src >= lo) & (src < hi)
                    if sel.any():
                        sigma[:, dst[sel]] += sg[sel] * W[u][:, src[sel] - lo]
                    sel = (dst >= lo) & (dst < hi)
                    if sel.any():
                        sigma[:, src[sel]] += sg[sel] * W[u][:, dst[sel] - lo]
        return sigma.ravel()


# ---- ground-state drivers ----

DEGENERACY_GAP = 1e-10


@dataclass
class GroundState:
    """Lowest eigenpair of a projected Hamiltonian plus derived occupations.

    coeffs follows the space's own ordering (sorted keys for explicit spaces,
    row-major with alpha outer for tensor spaces). occupations is the spin-
    orbital vector, alpha block then beta block, length 2 * norb. degenerate is
    set when the gap estimate to the next state falls under DEGENERACY_GAP; for
    Davidson solves the estimate comes from the final Ritz values.
    """

    energy: float
    coeffs: np.ndarray
    space: object
    occupations: np.ndarray
    degenerate: bool
    method: str
    matvecs: int
    residual: float


def _fix_sign(v: np.ndarray) -> np.ndarray:
    if v[int(np.argmax(np.abs(v)))] < 0:
        return -v
    return v


def _solve_matrix(
    H: sp.spmatrix | np.ndarray,
    tol: float,
    max_subspace: int,
    max_restarts: int,
    dense_cutoff: int,
) -> tuple[float, np.ndarray, str, int, float, float | None]:
    n = H.shape[0]
    if n == 0:
        raise EmptyError("cannot diagonalize an empty space")
    if n <= dense_cutoff:
        dense = H.toarray() if sp.issparse(H) else np.asarray(H, dtype=np.float64)
        evals, evecs = np.linalg.eigh(dense)
        gap = float(evals[1] - evals[0]) if n > 1 else None
        return float(evals[0]), _fix_sign(evecs[:, 0].copy()), "dense", 0, 0.0, gap
    r = lowest_eigenpair(
        lambda v: H @ v, H.diagonal(), tol=tol, max_subspace=max_subspace, max_restarts=max_restarts
    )
    return r.value, r.vector, "davidson", r.matvecs, r.residual, r.ritz_gap


def solve_ground(
    H: sp.spmatrix | np.ndarray,
    tol: float = 1e-9,
    max_subspace: int = 32,
    max_restarts: int = 40,
    dense_cutoff: int = DENSE_CUTOFF,
) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue and unit eigenvector of a symmetric matrix.

    Dense eigensolve up to dense_cutoff, Davidson beyond it. The eigenvector's
    largest-magnitude component is made positive.
    """
    energy, coeffs, _, _, _, _ = _solve_matrix(H, tol, max_subspace, max_restarts, dense_cutoff)
    return energy, coeffs


def dump_matrix(H: sp.spmatrix | np.ndarray, path) -> None:
    """Write the upper triangle, diagonal included, as '<i> <j> <value>' lines."""
    coo = sp.triu(sp.coo_matrix(H)).tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{i} {j} {v:.17g}\n")


def solve(
    space,
    table: IntegralTable,
    tol: float = 1e-9,
    max_subspace: int = 32,
    max_restarts: int = 40,
    dense_cutoff: int = DENSE_CUTOFF,
) -> GroundState:
    """Ground state of the Hamiltonian projected onto the space.

    Small spaces go through a dense eigensolve; larger ones through Davidson,
    matrix-free for tensor spaces.
    """
    if isinstance(space, TensorSpace) and space.size > dense_cutoff:
        op = TensorOperator(space, table)
        r = lowest_eigenpair(
            op.matvec, op.diagonal(), tol=tol, max_subspace=max_subspace, max_restarts=max_restarts
        )
        energy, coeffs, method, nmv, res, gap = (
            r.value, r.vector, "davidson", r.matvecs, r.residual, r.ritz_gap,
        )
    else:
        flat = space.to_determinant_space() if isinstance(space, TensorSpace) else space
        H = build_hamiltonian(flat, table)
        energy, coeffs, method, nmv, res, gap = _solve_matrix(
            H, tol, max_subspace, max_restarts, dense_cutoff
        )
    occ = occupations(space, coeffs)
    degenerate = gap is not None and gap < DEGENERACY_GAP
    return GroundState(energy, coeffs, space, occ, degenerate, method, nmv, res)


def fci_energy(table: IntegralTable, tol: float = 1e-9, cap: int = FCI_SPACE_CAP) -> GroundState:
    """Exact ground state over the complete sector fixed by the table's electron counts."""
    space = fci_space(table.norb, table.n_alpha, table.n_beta, cap=cap)
    return solve(space, table, tol=tol)


def occupations(space, coeffs: np.ndarray) -> np.ndarray:
    """Spin-orbital occupation vector under the state: alpha block then beta block."""
    w = np.asarray(coeffs, dtype=np.float64) ** 2
    if isinstance(space, TensorSpace):
        na, nb = space.shape
        Wab = w.reshape(na, nb)
        n_a = Wab.sum(axis=1) @ bits_matrix(space.astrings, space.norb)
        n_b = Wab.sum(axis=0) @ bits_matrix(space.bstrings, space.norb)
        return np.concatenate([n_a, n_b])
    n_a = w @ bits_matrix(space.amasks, space.norb)
    n_b = w @ bits_matrix(space.bmasks, space.norb)
    return np.concatenate([n_a, n_b])

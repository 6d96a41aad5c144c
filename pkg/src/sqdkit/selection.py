"""Iterative determinant selection with the importance criterion |H_ij c_i|.

Two drivers share one expansion loop. classical_hci proposes every single and
double excitation of the frontier over the full orbital space;
hci_select_from_samples proposes only combinations y (+) z of half
configurations drawn from a sampled pool, bucketed by excitation distance so
the pool's cross product is never materialized. Both start from the
Hartree-Fock determinant, accept candidates whose criterion value clears
epsilon1, re-diagonalize after each batch, and stop on size, energy
convergence, exhaustion, or the iteration cap.

The projected Hamiltonian grows incrementally: when a determinant joins, its
connections to the members present at that moment are appended to an
upper-triangle edge store. Every connected pair inside the final subspace is
captured exactly once, because the later-joining endpoint always sees the
earlier one as a member (same-batch duplicates are deduplicated per batch).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .bitops import bits_matrix, popcount, popcount_array, reversed_bits_array
from .davidson import lowest_eigenpair
from .determinants import Determinant, HalfConfiguration, hf_determinant
from .errors import LayoutError, RangeError, SectorError
from .excitations import ConnectionEngine, engine_for
from .integrals import IntegralTable
from .samples import SampleSet
from .subspace import (
    DEGENERACY_GAP,
    DENSE_CUTOFF,
    DeterminantSpace,
    GroundState,
    _fix_sign,
    det_keys,
    occupations,
)

STOP_REASONS = ("size", "converged", "exhausted", "max_iters")


@dataclass(frozen=True)
class SelectionConfig:
    """Knobs of the selection loop.

    epsilon1 is the acceptance threshold on the criterion value, target_size
    caps |S'|, energy_tol is the convergence threshold on the energy drop
    between consecutive iterations, min_new is the smallest accepted batch
    that keeps the loop going, and signed switches the criterion from
    |H_ij c_i| >= epsilon1 to the literal H_ij c_i >= epsilon1.
    """

    epsilon1: float = 1e-5
    target_size: int = 1_000_000
    energy_tol: float = 1e-8
    min_new: int = 1
    max_iters: int = 100
    signed: bool = False

    def __post_init__(self):
        if not self.epsilon1 > 0:
            raise RangeError(f"epsilon1 must be positive, got {self.epsilon1}")
        if self.target_size < 1:
            raise RangeError(f"target_size must be at least 1, got {self.target_size}")
        if not self.energy_tol > 0:
            raise RangeError(f"energy_tol must be positive, got {self.energy_tol}")
        if self.min_new < 0:
            raise RangeError(f"min_new must be nonnegative, got {self.min_new}")
        if self.max_iters < 1:
            raise RangeError(f"max_iters must be at least 1, got {self.max_iters}")


@dataclass(frozen=True)
class IterationRecord:
    """One expansion step. pairs counts every (y, z) proposal enumerated for
    the frontier and peak_pairs the largest such count for a single frontier
    determinant; candidates counts the distinct scored targets."""

    size: int
    energy: float
    candidates: int
    accepted: int
    pairs: int
    peak_pairs: int

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "energy": self.energy,
            "candidates": self.candidates,
            "accepted": self.accepted,
            "pairs": self.pairs,
            "peak_pairs": self.peak_pairs,
        }


@dataclass
class SelectionResult:
    subspace: DeterminantSpace
    ground: GroundState
    trace: list[IterationRecord]
    stop_reason: str

    @property
    def energies(self) -> list[float]:
        return [rec.energy for rec in self.trace]

    def to_dict(self) -> dict:
        return {
            "stop_reason": self.stop_reason,
            "energy": self.ground.energy,
            "size": self.subspace.size,
            "iterations": [rec.to_dict() for rec in self.trace],
            "subspace": [d.to_string() for d in self.subspace.determinants()],
        }


def hci_criterion(h_ij: float, c_i: float, epsilon1: float, signed: bool = False) -> bool:
    """Whether a candidate connected to a member with coefficient c_i passes."""
    if not epsilon1 > 0:
        raise RangeError(f"epsilon1 must be positive, got {epsilon1}")
    prod = h_ij * c_i
    return (prod if signed else abs(prod)) >= epsilon1


def _half_pool(S, norb: int) -> np.ndarray:
    """Unique half-register masks from a SampleSet or an iterable."""
    if isinstance(S, SampleSet):
        if S.width != norb:
            raise LayoutError(f"half pool width {S.width} does not match norb={norb}")
        masks, _ = S.to_masks()
    else:
        items = []
        for item in S:
            items.append(item.mask if isinstance(item, HalfConfiguration) else int(item))
        masks = np.asarray(items, dtype=np.int64)
    return np.unique(masks)


def _check_pool_sector(pool: np.ndarray, amask: int, bmask: int) -> None:
    if pool.size == 0:
        return
    counts = popcount_array(pool)
    lo, hi = int(counts.min()), int(counts.max())
    if lo != hi or lo != popcount(amask) or lo != popcount(bmask):
        raise SectorError(
            f"half pool occupations [{lo}, {hi}] do not match registers "
            f"({popcount(amask)}, {popcount(bmask)})"
        )


def _bucket_targets(amask: int, bmask: int, pool: np.ndarray):
    """(alpha, beta) target arrays for every pool pair at excitation degree 1-2.

    Pairs are enumerated by distance buckets relative to the two registers:
    (0,1), (1,0), (1,1), (0,2), (2,0). The zero-distance buckets require the
    matching register string to be present in the pool. Each entry carries a
    kind tag used to route the matrix-element evaluation.
    """
    da = popcount_array(pool ^ np.int64(amask)) >> 1
    db = popcount_array(pool ^ np.int64(bmask)) >> 1
    a1, a2 = pool[da == 1], pool[da == 2]
    b1, b2 = pool[db == 1], pool[db == 2]
    a_in = bool((da == 0).any())
    b_in = bool((db == 0).any())

    out = []
    if b_in and a1.size:
        out.append(("alpha_single", a1, np.full(a1.size, bmask, dtype=np.int64)))
    if a_in and b1.size:
        out.append(("beta_single", np.full(b1.size, amask, dtype=np.int64), b1))
    if a1.size and b1.size:
        ia = np.repeat(np.arange(a1.size), b1.size)
        ib = np.tile(np.arange(b1.size), a1.size)
        out.append(("mixed_double", a1[ia], b1[ib]))
    if b_in and a2.size:
        out.append(("alpha_double", a2, np.full(a2.size, bmask, dtype=np.int64)))
    if a_in and b2.size:
        out.append(("beta_double", np.full(b2.size, amask, dtype=np.int64), b2))
    return out


def generate_candidates(x_i: Determinant, S) -> set[Determinant]:
    """All determinants y (+) z with y, z in S at excitation degree 1-2 from x_i."""
    norb = x_i.norb
    pool = _half_pool(S, norb)
    _check_pool_sector(pool, x_i.alpha.mask, x_i.beta.mask)
    out: set[Determinant] = set()
    for _, ta, tb in _bucket_targets(x_i.alpha.mask, x_i.beta.mask, pool):
        for a, b in zip(ta.tolist(), tb.tolist()):
            out.add(Determinant.from_masks(a, b, norb))
    return out


def _pool_values(
    eng: ConnectionEngine, amask: int, bmask: int, pool: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Bucketed proposals of one frontier determinant with their H elements."""
    parts = _bucket_targets(amask, bmask, pool)
    if not parts:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z.astype(np.float64), 0
    oa = bits_matrix(np.array([amask], dtype=np.int64), eng.norb)[0]
    ob = bits_matrix(np.array([bmask], dtype=np.int64), eng.norb)[0]
    Ga = eng.single_matrix(oa, ob)
    Gb = eng.single_matrix(ob, oa)
    tas, tbs, tvs, n_pairs = [], [], [], 0
    for kind, ta, tb in parts:
        if kind == "alpha_single":
            tv = eng.pair_values_single(amask, ta, Ga)
        elif kind == "beta_single":
            tv = eng.pair_values_single(bmask, tb, Gb)
        elif kind == "mixed_double":
            tv = eng.pair_values_mixed(amask, bmask, ta, tb)
        elif kind == "alpha_double":
            tv = eng.pair_values_double_same(amask, ta)
        else:
            tv = eng.pair_values_double_same(bmask, tb)
        n_pairs += ta.size
        tas.append(ta)
        tbs.append(tb)
        tvs.append(tv)
    return np.concatenate(tas), np.concatenate(tbs), np.concatenate(tvs), n_pairs


class _Expansion:
    """Append-only member list with the accumulated Hamiltonian edge store."""

    def __init__(self, table: IntegralTable, amask: int, bmask: int):
        self.table = table
        self.eng = engine_for(table)
        self.norb = table.norb
        self.amasks = np.array([amask], dtype=np.int64)
        self.bmasks = np.array([bmask], dtype=np.int64)
        self.diag = self.eng.diagonal_batch(self.amasks, self.bmasks)
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []
        self._resort()

    def _resort(self) -> None:
        keys = det_keys(self.amasks, self.bmasks, self.norb)
        self.order = np.argsort(keys)
        self.sorted_keys = keys[self.order]

    @property
    def size(self) -> int:
        return int(self.amasks.size)

    def member_flags(self, keys: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self.sorted_keys, keys)
        pos = np.minimum(pos, self.sorted_keys.size - 1)
        return self.sorted_keys[pos] == keys

    def extend(self, new_a: np.ndarray, new_b: np.ndarray) -> np.ndarray:
        base = self.size
        self.amasks = np.concatenate([self.amasks, new_a])
        self.bmasks = np.concatenate([self.bmasks, new_b])
        self.diag = np.concatenate([self.diag, self.eng.diagonal_batch(new_a, new_b)])
        self._resort()
        return np.arange(base, self.size)

    def scan(self, batch: np.ndarray, keep_misses: bool, value_floor: float):
        """Connections of freshly added members.

        Edges to current members (the whole batch included) go to the store;
        with keep_misses the remaining targets come back as next-iteration
        proposals, pre-filtered to |H| >= value_floor since |c_i| <= 1 makes
        weaker elements unable to pass the criterion. Returns (src, keys,
        values, per-determinant connection counts).
        """
        n = self.size
        rows_b, cols_b, vals_b = [], [], []
        src_m, keys_m, vals_m = [], [], []
        counts = np.zeros(batch.size, dtype=np.int64)
        for k, j in enumerate(batch.tolist()):
            ta, tb, tv = self.eng.connections(int(self.amasks[j]), int(self.bmasks[j]))
            counts[k] = tv.size
            if not tv.size:
                continue
            keys = det_keys(ta, tb, self.norb)
            hit = self.member_flags(keys)
            midx = self.order[
                np.searchsorted(self.sorted_keys, keys[hit])
            ]
            if midx.size:
                rows_b.append(np.minimum(midx, j).astype(np.int32))
                cols_b.append(np.maximum(midx, j).astype(np.int32))
                vals_b.append(tv[hit])
            if keep_misses:
                miss = ~hit & (np.abs(tv) >= value_floor)
                if miss.any():
                    src_m.append(np.full(int(miss.sum()), j, dtype=np.int32))
                    keys_m.append(keys[miss])
                    vals_m.append(tv[miss])
        if rows_b:
            rows = np.concatenate(rows_b)
            cols = np.concatenate(cols_b)
            vals = np.concatenate(vals_b)
            # a pair accepted in one batch is scanned from both ends
            edge_key = rows.astype(np.int64) * n + cols
            _, first = np.unique(edge_key, return_index=True)
            self.rows.append(rows[first])
            self.cols.append(cols[first])
            self.vals.append(vals[first])
        if src_m:
            return (
                np.concatenate(src_m),
                np.concatenate(keys_m),
                np.concatenate(vals_m),
                counts,
            )
        z = np.zeros(0, dtype=np.int64)
        return z.astype(np.int32), z, z.astype(np.float64), counts

    def solve(self, v0: np.ndarray | None, tol: float = 1e-9):
        """Ground eigenpair of the accumulated subspace Hamiltonian."""
        n = self.size
        if n == 1:
            return float(self.diag[0]), np.ones(1), "dense", 0, 0.0, None
        if self.rows:
            rows = np.concatenate(self.rows)
            cols = np.concatenate(self.cols)
            vals = np.concatenate(self.vals)
        else:
            rows = cols = np.zeros(0, dtype=np.int32)
            vals = np.zeros(0)
        U = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        if n <= DENSE_CUTOFF:
            H = U.toarray()
            H = H + H.T
            H[np.arange(n), np.arange(n)] = self.diag
            evals, evecs = np.linalg.eigh(H)
            gap = float(evals[1] - evals[0])
            return float(evals[0]), _fix_sign(evecs[:, 0].copy()), "dense", 0, 0.0, gap
        Ut = U.T.tocsr()
        start = None
        if v0 is not None:
            start = np.zeros(n)
            start[: v0.size] = v0
        r = lowest_eigenpair(
            lambda v: U @ v + Ut @ v + self.diag * v,
            self.diag,
            tol=tol,
            v0=start,
        )
        return r.value, _fix_sign(r.vector), "davidson", r.matvecs, r.residual, r.ritz_gap


def _select_loop(
    table: IntegralTable, cfg: SelectionConfig, pool: np.ndarray | None
) -> SelectionResult:
    """Shared expansion loop; pool=None proposes over the full orbital space."""
    norb = table.norb
    hf = hf_determinant(table)
    a0, b0 = hf.alpha.mask, hf.beta.mask
    if pool is not None:
        _check_pool_sector(pool, a0, b0)
        pool = np.unique(np.concatenate([pool, [a0, b0]]))

    exp = _Expansion(table, a0, b0)
    energy = float(exp.diag[0])
    coeffs = np.ones(1)
    method, nmv, resid, gap = "dense", 0, 0.0, None
    frontier = np.array([0], dtype=np.int64)
    pending = None
    if pool is None:
        pending = exp.scan(frontier, keep_misses=True, value_floor=cfg.epsilon1)

    half_mask = (np.int64(1) << norb) - 1
    trace: list[IterationRecord] = []
    stop = None

    for it in range(1, cfg.max_iters + 1):
        if pool is None:
            src, keys, vals, counts = pending
        else:
            src_l, keys_l, vals_l = [], [], []
            counts = np.zeros(frontier.size, dtype=np.int64)
            for k, j in enumerate(frontier.tolist()):
                ta, tb, tv, npairs = _pool_values(
                    exp.eng, int(exp.amasks[j]), int(exp.bmasks[j]), pool
                )
                counts[k] = npairs
                keep = np.abs(tv) >= cfg.epsilon1
                if keep.any():
                    src_l.append(np.full(int(keep.sum()), j, dtype=np.int32))
                    keys_l.append(det_keys(ta[keep], tb[keep], norb))
                    vals_l.append(tv[keep])
            if src_l:
                src = np.concatenate(src_l)
                keys = np.concatenate(keys_l)
                vals = np.concatenate(vals_l)
            else:
                src = np.zeros(0, dtype=np.int32)
                keys = np.zeros(0, dtype=np.int64)
                vals = np.zeros(0)

        # best criterion value per distinct target, sources scored with the
        # coefficients of the latest diagonalization
        if keys.size:
            prod = vals * coeffs[src]
            score = prod if cfg.signed else np.abs(prod)
            uniq, inv = np.unique(keys, return_inverse=True)
            member = exp.member_flags(uniq)
            best = np.full(uniq.size, -np.inf)
            np.maximum.at(best, inv, score)
            uniq, best = uniq[~member], best[~member]
        else:
            uniq = np.zeros(0, dtype=np.int64)
            best = np.zeros(0)
        n_candidates = int(uniq.size)

        passing = best >= cfg.epsilon1
        cand_keys = uniq[passing]
        cand_score = best[passing]
        if cand_keys.size:
            lex = (
                reversed_bits_array(cand_keys >> norb, norb) << norb
            ) | reversed_bits_array(cand_keys & half_mask, norb)
            order = np.lexsort((lex, -cand_score))
            room = cfg.target_size - exp.size
            cand_keys = cand_keys[order[:room]]
        n_accept = int(cand_keys.size)

        if n_accept:
            new_a = cand_keys >> norb
            new_b = cand_keys & half_mask
            frontier = exp.extend(new_a, new_b)
            pending = exp.scan(
                frontier, keep_misses=pool is None, value_floor=cfg.epsilon1
            )
            prev_energy = energy
            energy, coeffs, method, nmv, resid, gap = exp.solve(coeffs)
        else:
            prev_energy = energy

        trace.append(
            IterationRecord(
                size=exp.size,
                energy=energy,
                candidates=n_candidates,
                accepted=n_accept,
                pairs=int(counts.sum()),
                peak_pairs=int(counts.max()) if counts.size else 0,
            )
        )

        if exp.size >= cfg.target_size:
            stop = "size"
        elif n_accept < cfg.min_new:
            stop = "exhausted"
        elif prev_energy - energy <= cfg.energy_tol:
            stop = "converged"
        elif it == cfg.max_iters:
            stop = "max_iters"
        if stop:
            break

    space = DeterminantSpace.from_masks(norb, exp.amasks, exp.bmasks)
    perm = np.argsort(det_keys(exp.amasks, exp.bmasks, norb))
    c_sorted = coeffs[perm]
    ground = GroundState(
        energy=energy,
        coeffs=c_sorted,
        space=space,
        occupations=occupations(space, c_sorted),
        degenerate=gap is not None and gap < DEGENERACY_GAP,
        method=method,
        matvecs=nmv,
        residual=resid,
    )
    return SelectionResult(space, ground, trace, stop)


def hci_select_from_samples(S, table: IntegralTable, cfg: SelectionConfig | None = None) -> SelectionResult:
    """Grow a subspace from sampled half configurations.

    S supplies the half-register pool (weights, if any, are ignored; only
    membership matters). The Hartree-Fock halves are unioned in so the loop
    always has a root.
    """
    cfg = cfg or SelectionConfig()
    return _select_loop(table, cfg, _half_pool(S, table.norb))


def classical_hci(table: IntegralTable, cfg: SelectionConfig | None = None) -> SelectionResult:
    """Selection over all single and double excitations of the frontier."""
    cfg = cfg or SelectionConfig()
    return _select_loop(table, cfg, None)

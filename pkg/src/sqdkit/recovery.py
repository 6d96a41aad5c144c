"""Noisy-sample partitioning, occupation-guided correction, and recovery loops.

Measured configurations either satisfy their particle-number sector or they do
not. Valid ones are kept as-is; invalid ones are repaired shot by shot, flipping
bits one at a time toward a reference occupation vector n: an over-occupied
register clears occupied orbital p with weight (1 - n_p) + delta, an
under-occupied one sets empty orbital p with weight n_p + delta, drawing
without replacement within one repair. The draws are realized as Gumbel
top-k selection, which reproduces the sequential weighted distribution exactly
while staying vectorized across shots.

Three recovery modes share this machinery. valid_occ_0C diagonalizes the
tensor space of valid halves once and never corrects anything. empirical_prob
corrects once, with the reference taken from valid-sample bit frequencies.
sccr iterates: correct, pool, subsample batches, diagonalize each batch, and
feed the mean batch occupations back in as the next reference.

Register layout follows the sample width: a set of half-configurations has
width norb, a set of full configurations has width 2 * norb with the alpha
register in characters [0, norb). Full-width samples are split into spin
halves before any pooling, so both layouts reach the same tensor-space path.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bitops import bits_matrix, popcount_array
from .errors import (
    CapacityError,
    ConvergenceError,
    EmptyError,
    LayoutError,
    RangeError,
    SectorError,
)
from .integrals import IntegralTable
from .samples import SampleSet
from .subspace import FCI_SPACE_CAP, GroundState, TensorSpace, solve

RECOVERY_MODES = ("valid_occ_0C", "sccr", "empirical_prob")


@dataclass
class RecoveryConfig:
    mode: str = "sccr"
    cycles: int = 10
    batches: int = 10
    batch_size: int = 500
    pool_size: int | None = None  # default: 4x batch_size
    seed: int = 0
    delta: float = 1e-3

    def __post_init__(self):
        if self.mode not in RECOVERY_MODES:
            raise RangeError(f"unknown recovery mode {self.mode!r}, expected one of {RECOVERY_MODES}")
        if self.cycles < 1:
            raise RangeError(f"cycles must be >= 1, got {self.cycles}")
        if self.batches < 1:
            raise RangeError(f"batches must be >= 1, got {self.batches}")
        if self.batch_size < 1:
            raise RangeError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 < self.delta < 1.0:
            raise RangeError(f"delta must lie in (0, 1), got {self.delta}")
        if self.pool_size is None:
            self.pool_size = 4 * self.batch_size
        if self.pool_size < 1:
            raise RangeError(f"pool_size must be >= 1, got {self.pool_size}")


@dataclass
class CycleRecord:
    energies: list[float]
    occupations: np.ndarray
    valid_fraction: float
    sizes: list[int]
    wallclock: float


@dataclass
class RecoveryTrace:
    mode: str
    cycles: list[CycleRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "cycles": [
                {
                    "energies": [float(e) for e in rec.energies],
                    "occupations": [float(v) for v in rec.occupations],
                    "valid_fraction": float(rec.valid_fraction),
                    "sizes": [int(s) for s in rec.sizes],
                    "wallclock": float(rec.wallclock),
                }
                for rec in self.cycles
            ],
        }


# ---- partitioning and occupations ----

def _register_split(masks: np.ndarray, width: int, targets) -> np.ndarray:
    """Validity flags for integer-encoded samples against per-register targets."""
    if isinstance(targets, (tuple, list)):
        if len(targets) != 2:
            raise LayoutError(f"expected one or two register targets, got {len(targets)}")
        if width % 2:
            raise LayoutError(f"width {width} cannot hold two equal registers")
        half = width // 2
        lo = masks & ((np.int64(1) << half) - 1)
        hi = masks >> half
        return (popcount_array(lo) == targets[0]) & (popcount_array(hi) == targets[1])
    return popcount_array(masks) == int(targets)


def partition_valid(samples: SampleSet, targets) -> tuple[SampleSet, SampleSet]:
    """Split into (valid, invalid) by register popcounts.

    targets is a single electron count for one-register samples or an
    (n_alpha, n_beta) pair for full-width samples, which are then read as two
    registers of width/2 qubits each, alpha first.
    """
    masks, counts = samples.to_masks()
    ok = _register_split(masks, samples.width, targets)
    valid = SampleSet.from_masks(masks[ok], samples.width, samples.seed, counts=counts[ok])
    invalid = SampleSet.from_masks(masks[~ok], samples.width, samples.seed, counts=counts[~ok])
    return valid, invalid


def split_halves(samples: SampleSet, norb: int) -> SampleSet:
    """Fold full-width samples into one multiset of spin halves (counts summed)."""
    if samples.width != 2 * norb:
        raise LayoutError(f"expected width {2 * norb}, got {samples.width}")
    masks, counts = samples.to_masks()
    lo = masks & ((np.int64(1) << norb) - 1)
    hi = masks >> norb
    return SampleSet.from_masks(
        np.concatenate([lo, hi]), norb, samples.seed, counts=np.concatenate([counts, counts])
    )


def empirical_occupations(samples: SampleSet) -> np.ndarray:
    """Per-bit frequency vector over all shots."""
    if samples.shots == 0:
        raise EmptyError("cannot take occupations of an empty sample set")
    masks, counts = samples.to_masks()
    occ = bits_matrix(masks, samples.width)
    return (counts @ occ) / counts.sum()


def tensor_subspace(halves, norb: int, cap: int = FCI_SPACE_CAP) -> TensorSpace:
    """Product space of a half-configuration set with itself."""
    halves = np.unique(np.asarray(halves, dtype=np.int64))
    if int(halves.size) ** 2 > cap:
        raise CapacityError(
            f"{halves.size} halves expand to {int(halves.size) ** 2} determinants, cap is {cap}"
        )
    return TensorSpace.from_strings(norb, halves, halves)


def _half_reference(occ: np.ndarray, norb: int) -> np.ndarray:
    """Collapse a spin-orbital occupation vector onto one register."""
    return 0.5 * (occ[:norb] + occ[norb:])


def valid_occupations(valid: SampleSet, table: IntegralTable, cap: int = FCI_SPACE_CAP) -> np.ndarray:
    """Reference occupations from one diagonalization over the valid halves.

    Returns a vector matching the sample width: one register for half-width
    input, alpha block then beta block for full-width input.
    """
    norb = table.norb
    halves = _as_halves(valid, norb)
    masks, _ = halves.to_masks()
    gs = solve(tensor_subspace(masks, norb, cap=cap), table)
    if valid.width == norb:
        return _half_reference(gs.occupations, norb)
    return gs.occupations


def _as_halves(samples: SampleSet, norb: int) -> SampleSet:
    if samples.width == norb:
        return samples
    if samples.width == 2 * norb:
        return split_halves(samples, norb)
    raise LayoutError(
        f"sample width {samples.width} matches neither {norb} nor {2 * norb}"
    )


# ---- configuration correction ----

def _gumbel_topk_flags(weights: np.ndarray, candidates: np.ndarray, k: np.ndarray,
                       rng: np.random.Generator) -> np.ndarray:
    """Per-row selection flags: k[i] draws without replacement, weight-proportional.

    weights is per-column, candidates a boolean (rows, cols) matrix, k the
    number of selections per row. Gumbel-perturbed log-weights ranked per row
    reproduce sequential renormalized draws exactly.
    """
    rows, cols = candidates.shape
    keys = np.log(weights)[None, :] + rng.gumbel(size=(rows, cols))
    keys = np.where(candidates, keys, -np.inf)
    ranks = np.argsort(np.argsort(-keys, axis=1, kind="stable"), axis=1, kind="stable")
    return ranks < k[:, None]


def correct_register_masks(masks: np.ndarray, n: np.ndarray, target: int,
                           rng: np.random.Generator, delta: float = 1e-3) -> np.ndarray:
    """Repair each register configuration to exactly `target` occupied orbitals."""
    n = np.asarray(n, dtype=np.float64)
    width = n.size
    if target > width:
        raise RangeError(f"target {target} exceeds register width {width}")
    masks = np.asarray(masks, dtype=np.int64)
    out = masks.copy()
    pc = popcount_array(masks)
    weights_bit = np.int64(1) << np.arange(width, dtype=np.int64)

    over = np.nonzero(pc > target)[0]
    if over.size:
        occ = bits_matrix(masks[over], width) > 0.5
        flags = _gumbel_topk_flags((1.0 - n) + delta, occ, pc[over] - target, rng)
        out[over] ^= flags.astype(np.int64) @ weights_bit
    under = np.nonzero(pc < target)[0]
    if under.size:
        emp = bits_matrix(masks[under], width) < 0.5
        flags = _gumbel_topk_flags(n + delta, emp, target - pc[under], rng)
        out[under] |= flags.astype(np.int64) @ weights_bit
    return out


def correct_configuration(x: str, n: np.ndarray, target: int,
                          rng: np.random.Generator, delta: float = 1e-3) -> str:
    """Repair one bitstring toward the reference occupations; valid input is returned as-is."""
    if len(x) != np.asarray(n).size:
        raise LayoutError(f"bitstring width {len(x)} does not match occupation vector")
    sample = SampleSet(len(x), {x: 1})
    masks, _ = sample.to_masks()
    fixed = correct_register_masks(masks, n, target, rng, delta=delta)
    out = SampleSet.from_masks(fixed, len(x))
    return next(iter(out.counts))


def correct_samples(invalid: SampleSet, n: np.ndarray, targets, rng: np.random.Generator,
                    delta: float = 1e-3) -> SampleSet:
    """Repair every shot of an invalid sample set, register by register.

    n follows the sample width (one register or alpha plus beta blocks);
    targets likewise is one count or an (n_alpha, n_beta) pair.
    """
    masks, counts = invalid.to_masks()
    shots = np.repeat(masks, counts)
    if isinstance(targets, (tuple, list)):
        if invalid.width % 2:
            raise LayoutError(f"width {invalid.width} cannot hold two registers")
        half = invalid.width // 2
        n = np.asarray(n, dtype=np.float64)
        if n.size != invalid.width:
            raise LayoutError("occupation vector does not match sample width")
        lo = correct_register_masks(shots & ((np.int64(1) << half) - 1), n[:half], targets[0], rng, delta)
        hi = correct_register_masks(shots >> half, n[half:], targets[1], rng, delta)
        fixed = lo | (hi << half)
    else:
        fixed = correct_register_masks(shots, n, int(targets), rng, delta)
    return SampleSet.from_masks(fixed, invalid.width, invalid.seed)


def corrected_pool(samples: SampleSet, table: IntegralTable, n: np.ndarray,
                   seed: int = 0, delta: float = 1e-3) -> SampleSet:
    """Every shot made sector-valid and merged into half-register counts.

    Valid shots pass through; invalid ones are corrected toward the occupation
    reference n (typically the final estimate of a recovery run). The result
    is the membership pool that selection consumes.
    """
    norb = table.norb
    targets = _targets_for(samples, table)
    valid, invalid = partition_valid(samples, targets)
    parts = []
    if valid.shots:
        parts.append(_as_halves(valid, norb))
    if invalid.shots:
        rng = np.random.default_rng((seed, 0))
        parts.append(_as_halves(correct_samples(invalid, n, targets, rng, delta), norb))
    if not parts:
        raise EmptyError("no shots to pool")
    masks = np.concatenate([p.to_masks()[0] for p in parts])
    counts = np.concatenate([p.to_masks()[1] for p in parts])
    return SampleSet.from_masks(masks, norb, samples.seed, counts=counts)


# ---- pooling and subsampling ----

def build_pool(valid: SampleSet, corrected: SampleSet, pool_size: int,
               rng: np.random.Generator) -> SampleSet:
    """Pool of unique configurations, valid entries first.

    When the valid set alone holds pool_size unique entries, the pool is the
    pool_size highest-count valid configurations (count ties broken by
    bitstring). Otherwise every valid entry enters and the remainder is drawn
    from the corrected set, count-weighted, without replacement.
    """
    if pool_size < 1:
        raise RangeError(f"pool_size must be >= 1, got {pool_size}")
    if valid.n_distinct >= pool_size:
        keep = sorted(valid.counts.items(), key=lambda kv: (-kv[1], kv[0]))[:pool_size]
        return SampleSet(valid.width, dict(keep), valid.seed)
    pool = dict(valid.counts)
    extras = {k: c for k, c in corrected.counts.items() if k not in pool}
    room = pool_size - len(pool)
    if extras and room > 0:
        keys = sorted(extras)
        cnts = np.array([extras[k] for k in keys], dtype=np.float64)
        take = min(room, len(keys))
        perturbed = np.log(cnts) + rng.gumbel(size=cnts.size)
        chosen = np.argsort(-perturbed, kind="stable")[:take]
        for i in chosen:
            pool[keys[i]] = extras[keys[i]]
    # corrected shots that landed on valid configurations reinforce them
    for k, c in corrected.counts.items():
        if k in pool and k not in extras:
            pool[k] += c
    return SampleSet(valid.width, pool, valid.seed)


def subsample_batch(pool: SampleSet, batch_size: int, rng: np.random.Generator) -> np.ndarray:
    """Count-weighted draw of up to batch_size unique configurations, as masks."""
    masks, counts = pool.to_masks()
    take = min(batch_size, masks.size)
    perturbed = np.log(counts.astype(np.float64)) + rng.gumbel(size=counts.size)
    chosen = np.argsort(-perturbed, kind="stable")[:take]
    return np.sort(masks[chosen])


# ---- recovery drivers ----

def _targets_for(samples: SampleSet, table: IntegralTable):
    norb = table.norb
    if samples.width == norb:
        if table.n_alpha != table.n_beta:
            raise SectorError("half-width samples need a closed-shell electron count")
        return table.n_alpha
    if samples.width == 2 * norb:
        return (table.n_alpha, table.n_beta)
    raise LayoutError(f"sample width {samples.width} matches neither {norb} nor {2 * norb}")


def _solve_halves(halves: np.ndarray, table: IntegralTable, cap: int) -> GroundState:
    return solve(tensor_subspace(halves, table.norb, cap=cap), table)


def recover(samples: SampleSet, table: IntegralTable, cfg: RecoveryConfig,
            cap: int = FCI_SPACE_CAP) -> tuple[np.ndarray, GroundState, RecoveryTrace]:
    """Run the configured recovery mode; returns (reference occupations, best state, trace).

    The reference vector follows the sample width. The best state is the
    lowest-energy ground state observed across every diagonalization the mode
    performed, each being a variational upper bound.
    """
    norb = table.norb
    targets = _targets_for(samples, table)
    valid, invalid = partition_valid(samples, targets)
    if valid.shots == 0:
        raise EmptyError("no valid samples to recover from")
    valid_fraction = valid.shots / samples.shots
    trace = RecoveryTrace(cfg.mode)

    if cfg.mode == "valid_occ_0C":
        t0 = time.perf_counter()
        halves, _ = _as_halves(valid, norb).to_masks()
        gs = _solve_halves(halves, table, cap)
        n = gs.occupations if samples.width == 2 * norb else _half_reference(gs.occupations, norb)
        trace.cycles.append(
            CycleRecord([gs.energy], n.copy(), valid_fraction, [gs.space.size], time.perf_counter() - t0)
        )
        return n, gs, trace

    # reference initialization, recorded as cycle 0
    t0 = time.perf_counter()
    init_energies: list[float] = []
    init_sizes: list[int] = []
    best: GroundState | None = None
    if cfg.mode == "empirical_prob":
        n = empirical_occupations(valid)
    else:
        try:
            halves, _ = _as_halves(valid, norb).to_masks()
            gs = _solve_halves(halves, table, cap)
            n = gs.occupations if samples.width == 2 * norb else _half_reference(gs.occupations, norb)
            best = gs
            init_energies = [gs.energy]
            init_sizes = [gs.space.size]
        except CapacityError:
            n = empirical_occupations(valid)
    trace.cycles.append(
        CycleRecord(init_energies, n.copy(), valid_fraction, init_sizes, time.perf_counter() - t0)
    )

    n_cycles = 1 if cfg.mode == "empirical_prob" else cfg.cycles
    valid_halves = _as_halves(valid, norb)
    for cycle in range(1, n_cycles + 1):
        t0 = time.perf_counter()
        rng_c = np.random.default_rng((cfg.seed, cycle))
        if invalid.shots:
            corrected = correct_samples(invalid, n, targets, rng_c, delta=cfg.delta)
            corrected_halves = _as_halves(corrected, norb)
        else:
            corrected_halves = SampleSet(valid_halves.width, {}, samples.seed)
        pool = build_pool(valid_halves, corrected_halves, cfg.pool_size, rng_c)
        energies: list[float] = []
        sizes: list[int] = []
        refs: list[np.ndarray] = []
        for batch in range(cfg.batches):
            rng_b = np.random.default_rng((cfg.seed, cycle, batch))
            drawn = subsample_batch(pool, cfg.batch_size, rng_b)
            try:
                gs = _solve_halves(drawn, table, cap)
            except (CapacityError, ConvergenceError) as err:
                raise type(err)(f"cycle {cycle} batch {batch}: {err}") from err
            energies.append(gs.energy)
            sizes.append(gs.space.size)
            refs.append(gs.occupations if samples.width == 2 * norb
                        else _half_reference(gs.occupations, norb))
            if best is None or gs.energy < best.energy:
                best = gs
        if cfg.mode == "sccr":
            n = np.mean(refs, axis=0)
        trace.cycles.append(
            CycleRecord(energies, n.copy(), valid_fraction, sizes, time.perf_counter() - t0)
        )
    assert best is not None
    return n, best, trace

"""Sample repair and recovery loops against counting and distribution oracles."""

import itertools

import numpy as np
import pytest

from sqdkit.bitops import popcount, sector_masks
from sqdkit.errors import (
    CapacityError,
    EmptyError,
    LayoutError,
    RangeError,
    SectorError,
)
from sqdkit.recovery import (
    RecoveryConfig,
    build_pool,
    correct_configuration,
    correct_register_masks,
    correct_samples,
    corrected_pool,
    empirical_occupations,
    partition_valid,
    recover,
    split_halves,
    tensor_subspace,
    valid_occupations,
)
from sqdkit.samples import SampleSet
from sqdkit.subspace import fci_energy, fci_space, solve
from tests.oracles import random_table


def test_partition_half_and_full_layouts():
    s = SampleSet(4, {"0110": 7, "0111": 3, "1100": 5})
    valid, invalid = partition_valid(s, 2)
    assert set(valid.counts) == {"0110", "1100"}
    assert set(invalid.counts) == {"0111"}
    assert valid.shots + invalid.shots == s.shots

    full = SampleSet(4, {"0110": 2, "1100": 1})
    v2, i2 = partition_valid(full, (1, 1))
    assert set(v2.counts) == {"0110"}  # alpha "01", beta "10"
    assert set(i2.counts) == {"1100"}  # alpha "11", beta "00"
    with pytest.raises(LayoutError):
        partition_valid(SampleSet(3, {"011": 1}), (1, 1))


def test_split_halves_sums_register_counts():
    s = SampleSet(4, {"0110": 2, "0101": 3})
    halves = split_halves(s, 2)
    # registers: 01/10 twice, 01/01 three times
    assert halves.counts == {"01": 8, "10": 2}
    assert halves.shots == 2 * s.shots
    with pytest.raises(LayoutError):
        split_halves(s, 3)


def test_empirical_occupations_counting():
    assert np.allclose(empirical_occupations(SampleSet(2, {"10": 9})), [1.0, 0.0])
    assert np.allclose(empirical_occupations(SampleSet(2, {"10": 4, "01": 4})), [0.5, 0.5])
    valid = SampleSet(4, {"0110": 3, "1100": 1, "1010": 2})
    n = empirical_occupations(valid)
    assert n.sum() == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(EmptyError):
        empirical_occupations(SampleSet(3, {}))


def test_tensor_subspace_cardinality_and_guards():
    assert tensor_subspace([0b01], 2).size == 1
    sp3 = tensor_subspace([0b0011, 0b0101, 0b1001], 4)
    assert sp3.size == 9
    full = tensor_subspace(sector_masks(4, 2), 4)
    ref = fci_space(4, 2, 2)
    assert np.array_equal(full.astrings, ref.astrings)
    assert np.array_equal(full.bstrings, ref.bstrings)
    with pytest.raises(SectorError):
        tensor_subspace([0b001, 0b011], 3)
    with pytest.raises(CapacityError):
        tensor_subspace(sector_masks(4, 2), 4, cap=8)


def test_valid_occupations_single_and_full_sector():
    table = random_table(2, 2, seed=3)
    n = valid_occupations(SampleSet(2, {"10": 5}), table)
    assert np.allclose(n, [1.0, 0.0])
    # all one-bit halves expand to the complete sector
    n_full = valid_occupations(SampleSet(2, {"10": 5, "01": 2}), table)
    res = fci_energy(table)
    assert np.allclose(n_full, 0.5 * (res.occupations[:2] + res.occupations[2:]), atol=1e-10)
    assert np.all((n_full >= -1e-12) & (n_full <= 1 + 1e-12))


def test_correct_configuration_identity_and_forced_limit():
    rng = np.random.default_rng(0)
    assert correct_configuration("0110", np.array([0.5, 0.5, 0.5, 0.5]), 2, rng) == "0110"
    n = np.array([1.0, 0.0])
    for _ in range(50):
        assert correct_configuration("11", n, 1, rng, delta=1e-12) == "10"
    under = np.array([0.0, 1.0, 0.0])
    for _ in range(50):
        assert correct_configuration("000", under, 1, rng, delta=1e-12) == "010"
    with pytest.raises(RangeError):
        correct_configuration("11", n, 3, rng)
    with pytest.raises(LayoutError):
        correct_configuration("111", n, 1, rng)


def test_correct_register_masks_distribution_even_weights():
    rng = np.random.default_rng(11)
    shots = 100_000
    masks = np.full(shots, 0b11, dtype=np.int64)
    out = correct_register_masks(masks, np.array([0.5, 0.5]), 1, rng)
    counts = {1: int((out == 1).sum()), 2: int((out == 2).sum())}
    assert counts[1] + counts[2] == shots
    sigma = np.sqrt(shots * 0.25)
    assert abs(counts[1] - shots / 2) < 5 * sigma


def test_gumbel_selection_matches_sequential_weighted_draws():
    # clearing 2 of 4 occupied bits: set probabilities must match the
    # one-at-a-time renormalized-weight process summed over orderings
    weights = np.array([0.8, 0.1, 0.4, 2.0])  # (1 - n_p) + delta, fixed
    delta = 0.0

    def sequential_prob(cleared):
        prob = 0.0
        for order in itertools.permutations(cleared):
            p, remaining = 1.0, list(range(4))
            for idx in order:
                w = weights[remaining]
                p *= weights[idx] / w.sum()
                remaining.remove(idx)
            prob += p
        return prob

    rng = np.random.default_rng(5)
    shots = 200_000
    n_ref = 1.0 - weights  # so (1 - n) + 0 reproduces `weights`
    out = correct_register_masks(
        np.full(shots, 0b1111, dtype=np.int64), n_ref, 2, rng, delta=delta
    )
    for pair in itertools.combinations(range(4), 2):
        kept = 0b1111 ^ sum(1 << b for b in pair)
        expect = sequential_prob(pair)
        got = (out == kept).sum() / shots
        sigma = np.sqrt(expect * (1 - expect) / shots)
        assert abs(got - expect) < 5 * sigma + 1e-12, (pair, got, expect)


def test_corrected_samples_always_sector_valid():
    rng = np.random.default_rng(2)
    # one register
    bad = SampleSet(5, {"11100": 3, "00001": 4, "11111": 2})
    n = np.array([0.9, 0.7, 0.2, 0.1, 0.1])
    fixed = correct_samples(bad, n, 2, rng)
    assert fixed.shots == bad.shots
    v, i = partition_valid(fixed, 2)
    assert i.shots == 0
    # two registers, independently repaired
    bad2 = SampleSet(4, {"1110": 2, "0000": 3})
    fixed2 = correct_samples(bad2, np.array([0.6, 0.4, 0.5, 0.5]), (1, 1), rng)
    v2, i2 = partition_valid(fixed2, (1, 1))
    assert i2.shots == 0 and v2.shots == bad2.shots


def test_build_pool_top_valid_and_backfill():
    rng = np.random.default_rng(7)
    valid = SampleSet(4, {"0011": 9, "0101": 7, "0110": 5, "1001": 3, "1010": 1})
    corrected = SampleSet(4, {"1100": 4})
    top = build_pool(valid, corrected, 3, rng)
    assert set(top.counts) == {"0011", "0101", "0110"}

    small = SampleSet(4, {"0011": 9, "0101": 1})
    big_corr = SampleSet(4, {format(m, "04b")[::-1]: c for m, c in
                             zip([3, 5, 6, 9, 10, 12], [1, 2, 3, 4, 5, 6])})
    pool = build_pool(small, big_corr, 5, rng)
    assert {"0011", "0101"} <= set(pool.counts)
    assert pool.n_distinct == 5
    # deterministic under a fresh generator with the same seed
    pool2 = build_pool(small, big_corr, 5, np.random.default_rng(7))
    assert pool.counts == pool2.counts
    # pool may come up short when there is nothing left to draw
    tiny = build_pool(small, SampleSet(4, {}), 5, rng)
    assert set(tiny.counts) == set(small.counts)


def test_recover_noiseless_degenerate_loop_equals_tensor_solve():
    table = random_table(4, 4, seed=31)
    halves = [0b0011, 0b0101, 0b1010]
    samples = SampleSet.from_masks(
        np.array(halves), 4, seed=1, counts=np.array([5, 3, 2])
    )
    ref = solve(tensor_subspace(halves, 4), table)
    cfg = RecoveryConfig(mode="sccr", cycles=1, batches=1, batch_size=10, seed=4)
    n, best, trace = recover(samples, table, cfg)
    assert best.energy == pytest.approx(ref.energy, abs=1e-12)
    assert len(trace.cycles) == 2  # init plus one correction cycle
    assert trace.cycles[1].valid_fraction == 1.0
    assert np.allclose(sum(n), 2.0)


def test_recover_modes_on_noisy_toy():
    table = random_table(2, 2, seed=41)
    noisy = SampleSet(2, {"10": 40, "01": 35, "11": 15, "00": 10})
    e_exact = fci_energy(table).energy
    for mode, cycles in [("valid_occ_0C", 1), ("empirical_prob", 3), ("sccr", 2)]:
        cfg = RecoveryConfig(mode=mode, cycles=cycles, batches=2, batch_size=4, seed=9)
        n, best, trace = recover(noisy, table, cfg)
        # valid halves already span the full sector here
        assert best.energy == pytest.approx(e_exact, abs=1e-10)
        assert n.size == 2
        assert trace.cycles[0].valid_fraction == 0.75
    assert len(recover(noisy, table, RecoveryConfig(mode="empirical_prob", cycles=5,
                                                    batches=1, batch_size=4, seed=9))[2].cycles) == 2


def test_recover_is_deterministic():
    table = random_table(3, 2, seed=51)
    noisy = SampleSet(3, {"100": 30, "010": 20, "110": 7, "000": 3})
    cfg = RecoveryConfig(mode="sccr", cycles=3, batches=3, batch_size=2, seed=13)
    n1, b1, t1 = recover(noisy, table, cfg)
    n2, b2, t2 = recover(noisy, table, cfg)
    assert np.array_equal(n1, n2)
    assert b1.energy == b2.energy
    assert [c.energies for c in t1.cycles] == [c.energies for c in t2.cycles]


def test_recover_error_carries_cycle_and_batch():
    table = random_table(3, 2, seed=51)
    noisy = SampleSet(3, {"100": 30, "010": 20, "110": 7})
    cfg = RecoveryConfig(mode="sccr", cycles=1, batches=1, batch_size=3, seed=1)
    with pytest.raises(CapacityError, match="cycle 1 batch 0"):
        recover(noisy, table, cfg, cap=1)


def test_recovery_config_guards():
    with pytest.raises(RangeError):
        RecoveryConfig(mode="magic")
    with pytest.raises(RangeError):
        RecoveryConfig(cycles=0)
    with pytest.raises(RangeError):
        RecoveryConfig(batch_size=0)
    with pytest.raises(RangeError):
        RecoveryConfig(delta=0.0)
    assert RecoveryConfig(batch_size=100).pool_size == 400


def test_recover_full_width_samples_split_before_pooling():
    table = random_table(3, 2, seed=61)
    # width 6 = two registers of 3; "100|010" and "010|100" valid, one broken
    full = SampleSet(6, {"100010": 12, "010100": 8, "110000": 5})
    cfg = RecoveryConfig(mode="sccr", cycles=2, batches=2, batch_size=4, seed=3)
    n, best, trace = recover(full, table, cfg)
    assert n.size == 6
    assert n[:3].sum() == pytest.approx(1.0, abs=1e-9)
    assert n[3:].sum() == pytest.approx(1.0, abs=1e-9)
    e_exact = fci_energy(table).energy
    assert best.energy >= e_exact - 1e-10


def test_corrected_pool_merges_valid_and_repaired_halves():
    table = random_table(3, 2, seed=61)
    full = SampleSet(6, {"100010": 12, "010100": 8, "110000": 5})
    cfg = RecoveryConfig(mode="sccr", cycles=2, batches=2, batch_size=4, seed=3)
    n, _, _ = recover(full, table, cfg)
    pool = corrected_pool(full, table, n, seed=cfg.seed)
    assert pool.width == 3
    # every full-width shot contributes both registers, repaired ones included
    assert pool.shots == 2 * full.shots
    assert all(popcount(int(k, 2)) for k in pool.counts)  # no empty register slips in
    assert all(k.count("1") == 1 for k in pool.counts)
    # the valid shots pass through untouched: 12+8 per register pattern
    assert pool.counts["100"] >= 20
    assert pool.counts["010"] >= 20
    again = corrected_pool(full, table, n, seed=cfg.seed)
    assert again.counts == pool.counts

    # half-register input keeps its shot count
    halves = SampleSet(3, {"100": 9, "011": 4})
    n3 = np.array([0.6, 0.3, 0.1])
    hpool = corrected_pool(halves, table, n3, seed=0)
    assert hpool.shots == halves.shots
    assert all(k.count("1") == 1 for k in hpool.counts)

    with pytest.raises(EmptyError):
        corrected_pool(SampleSet(3, {}), table, n3)

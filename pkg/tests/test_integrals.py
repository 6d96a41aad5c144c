from itertools import permutations
from pathlib import Path

import numpy as np
import pytest

from oracles import random_table
from sqdkit.errors import DuplicateError, ParseError, RangeError
from sqdkit.integrals import IntegralTable, canonical_h2_key, parse_fcidump, write_fcidump

FIXTURES = Path(__file__).parent / "fixtures"

HEADER = "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n"


def test_canonical_key_folds_all_eight_images():
    rng = np.random.default_rng(3)
    for _ in range(200):
        p, q, r, s = rng.integers(0, 6, size=4)
        key = canonical_h2_key(p, q, r, s)
        images = {(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                  (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)}
        assert {canonical_h2_key(*im) for im in images} == {key}
        assert key[0] >= key[1] and key[2] >= key[3]


def test_parse_basic_classification():
    text = HEADER + (
        " 0.5  0 0 0 0\n"
        " 1.25 1 2 0 0\n"
        " 0.75D-01 1 1 2 2\n"
    )
    t = parse_fcidump(text)
    assert (t.norb, t.nelec, t.ms2) == (2, 2, 0)
    assert t.e_core == 0.5
    assert t.get_h1(0, 1) == 1.25 and t.get_h1(1, 0) == 1.25
    assert t.get_h2(0, 0, 1, 1) == 0.075
    assert t.get_h2(1, 1, 0, 0) == 0.075
    assert t.get_h2(0, 1, 0, 1) == 0.0  # unstored reads as zero


def test_parse_header_variants():
    multi = "&FCI NORB= 3,NELEC=2,\n  MS2=0, ORBSYM=1,1,1,\n  ISYM=1,\n&END\n 1.0 1 1 0 0\n"
    t = parse_fcidump(multi)
    assert t.norb == 3 and t.orbsym == (1, 1, 1)
    slash = "&FCI NORB=2,NELEC=2,MS2=0 /\n 1.0 1 1 0 0\n"
    assert parse_fcidump(slash).get_h1(0, 0) == 1.0


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 3"):
        parse_fcidump(HEADER + " 1.0 1 1 0\n")
    with pytest.raises(ParseError, match="line 3"):
        parse_fcidump(HEADER + " oops 1 1 0 0\n")
    # a mixed zero pattern matches neither core, h1, nor h2
    with pytest.raises(ParseError, match="line 3"):
        parse_fcidump(HEADER + " 1.0 1 0 0 0\n")
    with pytest.raises(IndexError, match="line 3"):
        parse_fcidump(HEADER + " 1.0 1 3 0 0\n")
    with pytest.raises(ParseError):
        parse_fcidump("NORB=2\n&END\n")


def test_duplicates():
    same = HEADER + " 1.0 1 2 0 0\n 1.0 2 1 0 0\n"
    assert parse_fcidump(same).get_h1(0, 1) == 1.0
    clash = HEADER + " 1.0 1 2 0 0\n 2.0 2 1 0 0\n"
    with pytest.raises(DuplicateError):
        parse_fcidump(clash)
    with pytest.raises(DuplicateError):
        parse_fcidump(HEADER + " 1.0 1 2 1 1\n 2.0 2 1 1 1\n")


def test_get_bounds():
    t = parse_fcidump(HEADER + " 1.0 1 1 0 0\n")
    with pytest.raises(IndexError):
        t.get_h1(0, 2)
    with pytest.raises(IndexError):
        t.get_h2(0, 0, 0, -1)


def test_table_validation():
    with pytest.raises(RangeError):
        IntegralTable(norb=0, nelec=0)
    with pytest.raises(RangeError):
        IntegralTable(norb=2, nelec=5)
    with pytest.raises(RangeError):
        IntegralTable(norb=2, nelec=2, ms2=1)


def test_round_trip_is_identity():
    for seed in (0, 1):
        t = random_table(4, 4, seed=seed)
        back = parse_fcidump(write_fcidump(t))
        assert back.norb == t.norb and back.nelec == t.nelec and back.ms2 == t.ms2
        assert back.e_core == t.e_core
        assert back.h1 == t.h1
        assert back.h2 == t.h2
        # a second cycle is byte-identical
        assert write_fcidump(back) == write_fcidump(t)


def test_dense_views_fill_all_images():
    t = random_table(3, 2, seed=5)
    g = t.dense_h2
    for p, q, r, s in [(0, 1, 2, 0), (2, 2, 1, 0)]:
        v = g[p, q, r, s]
        for a, b in permutations((p, q)):
            for c, d in permutations((r, s)):
                assert g[a, b, c, d] == v
                assert g[c, d, a, b] == v
    assert not t.dense_h1.flags.writeable


def test_golden_file_stable(tmp_path):
    h1 = np.array([[-1.25, 0.1], [0.1, -0.4]])
    h2 = np.zeros((2, 2, 2, 2))
    h2[0, 0, 0, 0] = 0.675
    h2[1, 1, 1, 1] = 0.6985
    h2[0, 0, 1, 1] = h2[1, 1, 0, 0] = 0.6636
    h2[0, 1, 0, 1] = h2[1, 0, 0, 1] = h2[0, 1, 1, 0] = h2[1, 0, 1, 0] = 0.1813
    t = IntegralTable.from_arrays(h1, h2, e_core=0.7137, nelec=2)
    golden = FIXTURES / "golden_toy.fcidump"
    assert write_fcidump(t) == golden.read_text()
    out = tmp_path / "copy.fcidump"
    write_fcidump(t, out)
    assert out.read_text() == golden.read_text()

"""Bit-level helpers for orbital occupation masks.

A mask is a nonnegative int where bit p set means spatial orbital p is
occupied. Orbital 0 is the lowest orbital and maps to the leftmost character
of the text form, so ``mask_to_string(0b011, 4) == "1100"``.

Array variants operate on int64 numpy arrays of masks; widths up to 62 bits
are supported, which covers both single registers and combined alpha/beta
keys at the sizes this package targets.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import ParseError, RangeError


def popcount(mask: int) -> int:
    return int(mask).bit_count()


def popcount_array(masks: np.ndarray) -> np.ndarray:
    """Per-element popcount of an integer array."""
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(masks).astype(np.int64)
    # SWAR fallback for numpy < 2.0
    x = masks.astype(np.uint64)
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return ((x * np.uint64(0x0101010101010101)) >> np.uint64(56)).astype(np.int64)


def mask_from_occupied(indices) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def occupied_list(mask: int, norb: int | None = None) -> list[int]:
    """Indices of set bits, ascending."""
    out = []
    i = 0
    m = int(mask)
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return out


def empty_list(mask: int, norb: int) -> list[int]:
    return [i for i in range(norb) if not (mask >> i) & 1]


def bits_matrix(masks: np.ndarray, width: int) -> np.ndarray:
    """(N, width) float occupation matrix; column p is the bit-p occupation."""
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(width, dtype=np.int64)[None, :]) & 1).astype(np.float64)


def mask_to_string(mask: int, width: int) -> str:
    if mask < 0 or mask >> width:
        raise RangeError(f"mask {mask} does not fit in {width} bits")
    return "".join("1" if (mask >> i) & 1 else "0" for i in range(width))


def string_to_mask(bits: str) -> int:
    mask = 0
    for i, ch in enumerate(bits):
        if ch == "1":
            mask |= 1 << i
        elif ch != "0":
            raise ParseError(f"bitstring may contain only 0/1, got {bits!r}")
    return mask


@lru_cache(maxsize=None)
def between_table(width: int) -> np.ndarray:
    """between[i, j] = mask of bits strictly between i and j (symmetric)."""
    table = np.zeros((width, width), dtype=np.int64)
    for i in range(width):
        for j in range(width):
            lo, hi = (i, j) if i < j else (j, i)
            table[i, j] = ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
    return table


def between_mask(i: int, j: int) -> int:
    lo, hi = (i, j) if i < j else (j, i)
    return ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)


@lru_cache(maxsize=None)
def sector_masks(norb: int, nocc: int) -> np.ndarray:
    """All masks with nocc of norb bits set, ascending. Cached; treat as read-only."""
    if not 0 <= nocc <= norb:
        raise RangeError(f"cannot occupy {nocc} of {norb} orbitals")
    masks = np.fromiter(
        (mask_from_occupied(c) for c in combinations(range(norb), nocc)),
        dtype=np.int64,
        count=_binom(norb, nocc),
    )
    masks.sort()
    masks.setflags(write=False)
    return masks


def _binom(n: int, k: int) -> int:
    from math import comb

    return comb(n, k)


def reversed_bits_array(masks: np.ndarray, width: int) -> np.ndarray:
    """Integer whose binary digits are the text form read left to right.

    Sorting by this key is exactly lexicographic order on the bitstrings.
    """
    masks = np.asarray(masks, dtype=np.int64)
    out = np.zeros_like(masks)
    for i in range(width):
        out |= ((masks >> i) & 1) << (width - 1 - i)
    return out

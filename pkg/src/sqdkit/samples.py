"""Measurement outcome sets and their on-disk format.

A sample set is a multiset of fixed-width bitstrings. The text format is one
header line `width shots seed` (seed written as `-` when absent) followed by
`bitstring count` lines sorted by bitstring, so files are deterministic and
diff-friendly. Bitstring character k is qubit k, leftmost first, matching the
determinant text convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bitops import mask_to_string, string_to_mask
from .errors import EmptyError, ParseError, RangeError


@dataclass
class SampleSet:
    width: int
    counts: dict[str, int]
    seed: int | None = None

    def __post_init__(self):
        if self.width <= 0:
            raise RangeError(f"width must be positive, got {self.width}")
        for key, cnt in self.counts.items():
            if len(key) != self.width or set(key) - {"0", "1"}:
                raise RangeError(f"bad bitstring {key!r} for width {self.width}")
            if cnt <= 0:
                raise RangeError(f"count for {key} must be positive, got {cnt}")

    @property
    def shots(self) -> int:
        return sum(self.counts.values())

    @property
    def n_distinct(self) -> int:
        return len(self.counts)

    @classmethod
    def from_masks(
        cls, masks: np.ndarray, width: int, seed: int | None = None, counts: np.ndarray | None = None
    ) -> "SampleSet":
        """Build from integer-encoded configurations (bit k = qubit k).

        With counts given, masks are treated as distinct entries; otherwise
        repeated masks are tallied.
        """
        masks = np.asarray(masks, dtype=np.int64)
        if counts is None:
            masks, counts = np.unique(masks, return_counts=True)
        out = {}
        for m, c in zip(masks.tolist(), counts.tolist()):
            key = mask_to_string(m, width)
            out[key] = out.get(key, 0) + int(c)
        return cls(width, out, seed)

    def to_masks(self) -> tuple[np.ndarray, np.ndarray]:
        """(masks, counts) sorted by mask value."""
        masks = np.array([string_to_mask(k) for k in self.counts], dtype=np.int64)
        cnts = np.array(list(self.counts.values()), dtype=np.int64)
        order = np.argsort(masks, kind="stable")
        return masks[order], cnts[order]

    def save(self, path) -> None:
        seed = "-" if self.seed is None else str(self.seed)
        lines = [f"{self.width} {self.shots} {seed}"]
        for key in sorted(self.counts):
            lines.append(f"{key} {self.counts[key]}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "SampleSet":
        with open(path) as fh:
            text = fh.read()
        lines = text.splitlines()
        if not lines or not lines[0].strip():
            raise ParseError("missing header line", line=1)
        head = lines[0].split()
        if len(head) != 3:
            raise ParseError(f"header needs `width shots seed`, got {lines[0]!r}", line=1)
        try:
            width, shots = int(head[0]), int(head[1])
        except ValueError:
            raise ParseError(f"bad header numbers in {lines[0]!r}", line=1) from None
        seed = None if head[2] == "-" else int(head[2])
        counts: dict[str, int] = {}
        for lineno, raw in enumerate(lines[1:], start=2):
            if not raw.strip():
                continue
            parts = raw.split()
            if len(parts) != 2:
                raise ParseError(f"expected `bitstring count`, got {raw!r}", line=lineno)
            key, cnt = parts
            if key in counts:
                raise ParseError(f"repeated bitstring {key}", line=lineno)
            try:
                counts[key] = int(cnt)
            except ValueError:
                raise ParseError(f"bad count {cnt!r}", line=lineno) from None
        if not counts:
            raise EmptyError(f"no samples in {path}")
        total = sum(counts.values())
        if total != shots:
            raise ParseError(f"header says {shots} shots, lines sum to {total}", line=1)
        return cls(width, counts, seed)

"""Molecular integral tables and FCIDUMP-format text I/O.

Two-electron integrals are stored in chemist notation, (pq|rs) being the
Coulomb element between charge densities p q and r s, folded onto a canonical
representative of the 8-fold permutation symmetry

    (pq|rs) = (qp|rs) = (pq|sr) = (qp|sr) = (rs|pq) = (sr|pq) = (rs|qp) = (sr|qp).

Indices are 0-based in memory and 1-based in the text format. Unstored
integrals read as exactly zero. Tables are treated as immutable once built.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DuplicateError, ParseError, RangeError


def canonical_h2_key(p: int, q: int, r: int, s: int) -> tuple[int, int, int, int]:
    """Fold a chemist-notation index quadruple onto its canonical representative.

    Within each pair the larger index comes first, and the pair with the larger
    composite triangular index comes first.
    """
    if p < q:
        p, q = q, p
    if r < s:
        r, s = s, r
    if p * (p + 1) // 2 + q < r * (r + 1) // 2 + s:
        p, q, r, s = r, s, p, q
    return p, q, r, s


@dataclass(frozen=True)
class IntegralTable:
    """Active-space Hamiltonian data: sizes, core energy, h1 and h2 maps."""

    norb: int
    nelec: int
    ms2: int = 0
    e_core: float = 0.0
    h1: dict = field(default_factory=dict, repr=False)  # (p, q) with p >= q -> value
    h2: dict = field(default_factory=dict, repr=False)  # canonical (p, q, r, s) -> value
    orbsym: tuple = ()  # stored for round-trips, not consumed

    def __post_init__(self):
        if self.norb <= 0:
            raise RangeError(f"norb must be positive, got {self.norb}")
        if not 0 <= self.nelec <= 2 * self.norb:
            raise RangeError(f"nelec {self.nelec} impossible with norb {self.norb}")
        if (self.nelec + self.ms2) % 2 or abs(self.ms2) > self.nelec:
            raise RangeError(f"ms2 {self.ms2} incompatible with nelec {self.nelec}")

    @property
    def n_alpha(self) -> int:
        return (self.nelec + self.ms2) // 2

    @property
    def n_beta(self) -> int:
        return (self.nelec - self.ms2) // 2

    def _check(self, *indices: int) -> None:
        for i in indices:
            if not 0 <= i < self.norb:
                raise IndexError(f"orbital index {i} outside 0..{self.norb - 1}")

    def get_h1(self, p: int, q: int) -> float:
        self._check(p, q)
        if p < q:
            p, q = q, p
        return self.h1.get((p, q), 0.0)

    def get_h2(self, p: int, q: int, r: int, s: int) -> float:
        self._check(p, q, r, s)
        return self.h2.get(canonical_h2_key(p, q, r, s), 0.0)

    @classmethod
    def from_arrays(
        cls,
        h1: np.ndarray,
        h2: np.ndarray,
        e_core: float = 0.0,
        *,
        nelec: int,
        ms2: int = 0,
        orbsym: tuple = (),
        drop_below: float = 0.0,
    ) -> "IntegralTable":
        """Build a table from dense arrays; h2 is chemist (pq|rs).

        Entries with magnitude <= drop_below are not stored. Symmetry of the
        inputs is assumed, the canonical entry is read off directly.
        """
        h1 = np.asarray(h1, dtype=float)
        h2 = np.asarray(h2, dtype=float)
        n = h1.shape[0]
        if h1.shape != (n, n) or h2.shape != (n, n, n, n):
            raise RangeError("h1 must be (n,n) and h2 (n,n,n,n)")
        d1 = {}
        for p in range(n):
            for q in range(p + 1):
                v = float(h1[p, q])
                if abs(v) > drop_below:
                    d1[(p, q)] = v
        d2 = {}
        for p in range(n):
            for q in range(p + 1):
                pq = p * (p + 1) // 2 + q
                for r in range(p + 1):
                    for s in range(r + 1):
                        if r * (r + 1) // 2 + s > pq:
                            continue
                        v = float(h2[p, q, r, s])
                        if abs(v) > drop_below:
                            d2[(p, q, r, s)] = v
        return cls(norb=n, nelec=nelec, ms2=ms2, e_core=float(e_core), h1=d1, h2=d2, orbsym=tuple(orbsym))

    @cached_property
    def dense_h1(self) -> np.ndarray:
        out = np.zeros((self.norb, self.norb))
        for (p, q), v in self.h1.items():
            out[p, q] = v
            out[q, p] = v
        out.setflags(write=False)
        return out

    @cached_property
    def dense_h2(self) -> np.ndarray:
        out = np.zeros((self.norb,) * 4)
        for (p, q, r, s), v in self.h2.items():
            for a, b in ((p, q), (q, p)):
                for c, d in ((r, s), (s, r)):
                    out[a, b, c, d] = v
                    out[c, d, a, b] = v
        out.setflags(write=False)
        return out


_NAMELIST_INT = re.compile(r"^[+-]?\d+$")


def _parse_header(tokens: list[tuple[int, str]]) -> dict:
    """Parse KEY=VALUE[,VALUE...] pairs from the namelist token stream."""
    text = " ".join(t for _, t in tokens)
    fields: dict[str, list[str]] = {}
    key = None
    for piece in re.split(r"[,\s]+", text.replace("=", " = ")):
        if not piece:
            continue
        if piece == "=":
            continue
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", piece):
            key = piece.upper()
            fields[key] = []
        elif key is not None:
            fields[key].append(piece)
    return fields


def parse_fcidump(source: str | Path) -> IntegralTable:
    """Parse FCIDUMP text (a path or the literal text) into an IntegralTable.

    The namelist header must define NORB and NELEC and ends at &END or a bare
    slash. Body lines are ``value i j k l`` with 1-based indices: all-zero
    indices give the core energy, k = l = 0 gives h1(i, j), fully nonzero
    indices give the chemist integral (ij|kl). Any other zero pattern is
    rejected. A repeated canonical entry must repeat the same value.
    """
    path = Path(source) if not (isinstance(source, str) and "\n" in source) else None
    text = path.read_text() if path is not None else str(source)
    lines = text.splitlines()

    header_tokens: list[tuple[int, str]] = []
    body_start = None
    for lineno, raw in enumerate(lines, start=1):
        if body_start is not None:
            break
        stripped = raw.strip()
        if not stripped:
            continue
        if not header_tokens and not stripped.upper().startswith("&FCI"):
            raise ParseError("header must start with &FCI", line=lineno)
        m = re.search(r"(&END|/)", stripped, flags=re.IGNORECASE)
        if m:
            header_tokens.append((lineno, stripped[: m.start()]))
            body_start = lineno
        else:
            header_tokens.append((lineno, stripped))

    if body_start is None or not header_tokens:
        raise ParseError("header terminator (&END or /) not found", line=len(lines))

    first_line, first_text = header_tokens[0]
    header_tokens[0] = (first_line, re.sub(r"^&FCI", "", first_text, flags=re.IGNORECASE))
    fields = _parse_header(header_tokens)

    def int_field(name: str, default: int | None = None) -> int:
        vals = fields.get(name)
        if not vals:
            if default is None:
                raise ParseError(f"header is missing {name}", line=first_line)
            return default
        if not _NAMELIST_INT.match(vals[0]):
            raise ParseError(f"header field {name} is not an integer: {vals[0]!r}", line=first_line)
        return int(vals[0])

    norb = int_field("NORB")
    nelec = int_field("NELEC")
    ms2 = int_field("MS2", 0)
    orbsym = tuple(int(v) for v in fields.get("ORBSYM", []) if _NAMELIST_INT.match(v))

    h1: dict = {}
    h2: dict = {}
    e_core = 0.0
    saw_core = False

    def store(d: dict, key, value: float, lineno: int) -> None:
        old = d.get(key)
        if old is not None and old != value:
            raise DuplicateError(f"line {lineno}: conflicting duplicate for {key}: {old!r} vs {value!r}")
        d[key] = value

    for lineno, raw in enumerate(lines, start=1):
        if lineno <= body_start:
            continue
        stripped = raw.strip()
        if not stripped:
            continue
        parts = stripped.split()
        if len(parts) != 5:
            raise ParseError(f"expected 'value i j k l', got {len(parts)} fields", line=lineno)
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
        except ValueError:
            raise ParseError(f"bad value field {parts[0]!r}", line=lineno) from None
        try:
            i, j, k, l = (int(t) for t in parts[1:])
        except ValueError:
            raise ParseError(f"bad index field in {stripped!r}", line=lineno) from None
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise IndexError(f"line {lineno}: index {idx} outside 0..{norb}")
        zeros = (i == 0, j == 0, k == 0, l == 0)
        if all(zeros):
            if saw_core and e_core != value:
                raise DuplicateError(f"line {lineno}: conflicting core energy {e_core!r} vs {value!r}")
            e_core = value
            saw_core = True
        elif not zeros[0] and not zeros[1] and zeros[2] and zeros[3]:
            p, q = i - 1, j - 1
            store(h1, (p, q) if p >= q else (q, p), value, lineno)
        elif not any(zeros):
            store(h2, canonical_h2_key(i - 1, j - 1, k - 1, l - 1), value, lineno)
        else:
            raise ParseError(f"unrecognized index pattern {i} {j} {k} {l}", line=lineno)

    return IntegralTable(norb=norb, nelec=nelec, ms2=ms2, e_core=e_core, h1=h1, h2=h2, orbsym=orbsym)


def write_fcidump(table: IntegralTable, path: str | Path | None = None) -> str:
    """Serialize a table to FCIDUMP text, deterministically ordered.

    Two-electron entries come first in sorted canonical order, then h1, then
    the core energy. Values are written with 17 significant digits so a
    parse/write cycle is an exact identity.
    """
    orbsym = table.orbsym if table.orbsym else (1,) * table.norb
    out = [
        f"&FCI NORB={table.norb:4d},NELEC={table.nelec:3d},MS2={table.ms2:2d},",
        "  ORBSYM=" + ",".join(str(s) for s in orbsym) + ",",
        "  ISYM=1,",
        "&END",
    ]

    def line(v: float, i: int, j: int, k: int, l: int) -> str:
        return f"{v: .16E} {i:4d} {j:4d} {k:4d} {l:4d}"

    for (p, q, r, s) in sorted(table.h2):
        out.append(line(table.h2[(p, q, r, s)], p + 1, q + 1, r + 1, s + 1))
    for (p, q) in sorted(table.h1):
        out.append(line(table.h1[(p, q)], p + 1, q + 1, 0, 0))
    out.append(line(table.e_core, 0, 0, 0, 0))
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text

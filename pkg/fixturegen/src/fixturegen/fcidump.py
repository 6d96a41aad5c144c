"""FCIDUMP and metadata serialization.

The FCIDUMP layout is deterministic and canonical: a fixed namelist header,
two-electron entries in sorted canonical order (within each pair the larger
index first, the pair with the larger triangular composite first), then
one-electron entries, then the core energy. Values carry 17 significant
digits and 1-based indices; entries at or below the drop threshold are
omitted. Regenerating from identical inputs reproduces the file byte for
byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

DROP_BELOW = 1e-12


def canonical_key(p: int, q: int, r: int, s: int):
    if p < q:
        p, q = q, p
    if r < s:
        r, s = s, r
    if p * (p + 1) // 2 + q < r * (r + 1) // 2 + s:
        p, q, r, s = r, s, p, q
    return p, q, r, s


def fcidump_text(h1: np.ndarray, h2: np.ndarray, e_core: float, nelec: int,
                 ms2: int = 0, drop_below: float = DROP_BELOW) -> str:
    norb = h1.shape[0]
    out = [
        f"&FCI NORB={norb:4d},NELEC={nelec:3d},MS2={ms2:2d},",
        "  ORBSYM=" + ",".join("1" for _ in range(norb)) + ",",
        "  ISYM=1,",
        "&END",
    ]

    def line(v: float, i: int, j: int, k: int, l: int) -> str:
        return f"{v: .16E} {i:4d} {j:4d} {k:4d} {l:4d}"

    entries = {}
    for p in range(norb):
        for q in range(p + 1):
            pq = p * (p + 1) // 2 + q
            for r in range(p + 1):
                for s in range(r + 1):
                    if r * (r + 1) // 2 + s > pq:
                        continue
                    v = float(h2[p, q, r, s])
                    if abs(v) > drop_below:
                        entries[(p, q, r, s)] = v
    for key in sorted(entries):
        p, q, r, s = key
        out.append(line(entries[key], p + 1, q + 1, r + 1, s + 1))
    for p in range(norb):
        for q in range(p + 1):
            v = float(h1[p, q])
            if abs(v) > drop_below:
                out.append(line(v, p + 1, q + 1, 0, 0))
    out.append(line(float(e_core), 0, 0, 0, 0))
    return "\n".join(out) + "\n"


def write_fcidump(path, h1, h2, e_core, nelec, ms2: int = 0) -> None:
    Path(path).write_text(fcidump_text(h1, h2, e_core, nelec, ms2))


def metadata_dict(*, molecule: str, basis: str, ne_active: int, no_active: int,
                  e_hf: float, e_ccsd: float | None, e_fci: float | None,
                  geometry, bond_label: str) -> dict:
    return {
        "molecule": molecule,
        "basis": basis,
        "active_space": [int(ne_active), int(no_active)],
        "e_hf": float(e_hf),
        "e_ccsd": None if e_ccsd is None else float(e_ccsd),
        "e_fci": None if e_fci is None else float(e_fci),
        "geometry": [[sym, float(x), float(y), float(z)] for sym, x, y, z in geometry],
        "bond_label": bond_label,
    }


def write_metadata(path, **kwargs) -> None:
    Path(path).write_text(json.dumps(metadata_dict(**kwargs), indent=2, sort_keys=True) + "\n")


def read_metadata(path) -> dict:
    with open(path) as fh:
        return json.load(fh)

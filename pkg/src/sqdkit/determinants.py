"""Determinants as per-spin occupation masks, and Slater-Condon matrix elements.

Alpha and beta registers are stored separately, so fermionic phases are
evaluated within each spin sector and the cross term of an opposite-spin
double factorizes into the product of the two sector phases. The text form
of a determinant is the alpha register followed by the beta register, with
the leftmost character of each register being orbital 0.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bitops import between_mask, mask_to_string, popcount, string_to_mask
from .errors import RangeError, SectorError, ShapeError
from .integrals import IntegralTable


@dataclass(frozen=True, order=True)
class HalfConfiguration:
    """Occupation of one spin register: bit p set means orbital p occupied."""

    mask: int
    norb: int

    def __post_init__(self):
        if self.norb <= 0:
            raise RangeError(f"norb must be positive, got {self.norb}")
        if self.mask < 0 or self.mask >> self.norb:
            raise RangeError(f"mask {self.mask:#x} does not fit in {self.norb} orbitals")

    @property
    def popcount(self) -> int:
        return popcount(self.mask)

    def to_string(self) -> str:
        return mask_to_string(self.mask, self.norb)

    @classmethod
    def from_string(cls, bits: str) -> "HalfConfiguration":
        return cls(mask=string_to_mask(bits), norb=len(bits))


@dataclass(frozen=True, order=True)
class Determinant:
    alpha: HalfConfiguration
    beta: HalfConfiguration

    def __post_init__(self):
        if self.alpha.norb != self.beta.norb:
            raise ShapeError(
                f"register widths differ: {self.alpha.norb} vs {self.beta.norb}"
            )

    @property
    def norb(self) -> int:
        return self.alpha.norb

    def to_string(self) -> str:
        return self.alpha.to_string() + self.beta.to_string()

    @classmethod
    def from_string(cls, bits: str) -> "Determinant":
        if len(bits) % 2:
            raise ShapeError(f"determinant string length {len(bits)} is odd")
        half = len(bits) // 2
        return cls(
            alpha=HalfConfiguration.from_string(bits[:half]),
            beta=HalfConfiguration.from_string(bits[half:]),
        )

    @classmethod
    def from_masks(cls, alpha: int, beta: int, norb: int) -> "Determinant":
        return cls(HalfConfiguration(alpha, norb), HalfConfiguration(beta, norb))


@dataclass(frozen=True)
class ExcitationInfo:
    """How two determinants differ: per-spin holes, particles, and the phase.

    Holes are orbitals occupied in the first determinant only, particles in
    the second only, both ascending. The phase is the fermionic sign of
    aligning the two determinants by moving each hole to its rank-matched
    particle, one spin register at a time.
    """

    degree: int
    alpha_holes: tuple
    alpha_particles: tuple
    beta_holes: tuple
    beta_particles: tuple
    phase: int


def combine(alpha: HalfConfiguration, beta: HalfConfiguration) -> Determinant:
    return Determinant(alpha=alpha, beta=beta)


def hf_halves(table: IntegralTable) -> tuple[HalfConfiguration, HalfConfiguration]:
    """Aufbau reference: the lowest orbitals of each register occupied."""
    return (
        HalfConfiguration((1 << table.n_alpha) - 1, table.norb),
        HalfConfiguration((1 << table.n_beta) - 1, table.norb),
    )


def hf_determinant(table: IntegralTable) -> Determinant:
    a, b = hf_halves(table)
    return Determinant(a, b)


def half_excitation_degree(m1: int, m2: int) -> int:
    """Number of moved particles between two masks; ceil when counts differ."""
    return (popcount(m1 ^ m2) + 1) // 2


def excitation_degree(d1, d2) -> int:
    """Excitation degree between two halves or two determinants."""
    if isinstance(d1, Determinant):
        return half_excitation_degree(d1.alpha.mask, d2.alpha.mask) + half_excitation_degree(
            d1.beta.mask, d2.beta.mask
        )
    return half_excitation_degree(d1.mask, d2.mask)


def same_sector(d1: Determinant, d2: Determinant) -> bool:
    return (
        d1.norb == d2.norb
        and d1.alpha.popcount == d2.alpha.popcount
        and d1.beta.popcount == d2.beta.popcount
    )


def _spin_alignment(m1: int, m2: int) -> tuple[tuple, tuple, int]:
    """Holes, particles, and alignment sign for one spin register."""
    diff = m1 ^ m2
    holes = []
    particles = []
    i = 0
    while diff:
        if diff & 1:
            if (m1 >> i) & 1:
                holes.append(i)
            else:
                particles.append(i)
        diff >>= 1
        i += 1
    sign = 1
    m = m1
    for h, p in zip(holes, particles):
        if popcount(m & between_mask(h, p)) & 1:
            sign = -sign
        m ^= (1 << h) | (1 << p)
    return tuple(holes), tuple(particles), sign


def excitation_info(d1: Determinant, d2: Determinant) -> ExcitationInfo:
    if not same_sector(d1, d2):
        raise SectorError(
            f"sector mismatch: {d1.to_string()} vs {d2.to_string()}"
        )
    ah, ap, asign = _spin_alignment(d1.alpha.mask, d2.alpha.mask)
    bh, bp, bsign = _spin_alignment(d1.beta.mask, d2.beta.mask)
    return ExcitationInfo(
        degree=len(ah) + len(bh),
        alpha_holes=ah,
        alpha_particles=ap,
        beta_holes=bh,
        beta_particles=bp,
        phase=asign * bsign,
    )


def slater_condon(d1: Determinant, d2: Determinant, table: IntegralTable) -> float:
    """Hamiltonian matrix element between two same-sector determinants.

    Diagonal elements include the core energy. Elements between determinants
    differing by more than a double excitation are exactly zero.
    """
    if d1.norb != table.norb:
        raise ShapeError(f"determinant width {d1.norb} does not match norb {table.norb}")
    info = excitation_info(d1, d2)
    if info.degree > 2:
        return 0.0

    h1 = table.dense_h1
    eri = table.dense_h2
    occ_a = _occ(d1.alpha.mask)
    occ_b = _occ(d1.beta.mask)

    if info.degree == 0:
        e = table.e_core
        for i in occ_a:
            e += h1[i, i]
        for i in occ_b:
            e += h1[i, i]
        for i in occ_a:
            for j in occ_a:
                e += 0.5 * (eri[i, i, j, j] - eri[i, j, j, i])
        for i in occ_b:
            for j in occ_b:
                e += 0.5 * (eri[i, i, j, j] - eri[i, j, j, i])
        for i in occ_a:
            for j in occ_b:
                e += eri[i, i, j, j]
        return float(e)

    if info.degree == 1:
        if info.alpha_holes:
            h, p = info.alpha_holes[0], info.alpha_particles[0]
            same, other = occ_a, occ_b
        else:
            h, p = info.beta_holes[0], info.beta_particles[0]
            same, other = occ_b, occ_a
        e = h1[p, h]
        for j in same:
            if j != h:
                e += eri[p, h, j, j] - eri[p, j, j, h]
        for j in other:
            e += eri[p, h, j, j]
        return float(info.phase * e)

    # degree 2
    if info.alpha_holes and info.beta_holes:
        ha, pa = info.alpha_holes[0], info.alpha_particles[0]
        hb, pb = info.beta_holes[0], info.beta_particles[0]
        return float(info.phase * eri[pa, ha, pb, hb])
    if info.alpha_holes:
        h1_, h2_ = info.alpha_holes
        p1_, p2_ = info.alpha_particles
    else:
        h1_, h2_ = info.beta_holes
        p1_, p2_ = info.beta_particles
    return float(info.phase * (eri[p1_, h1_, p2_, h2_] - eri[p1_, h2_, p2_, h1_]))


def _occ(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out

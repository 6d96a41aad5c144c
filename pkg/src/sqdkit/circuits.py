"""Particle-conserving gate set, simulators, and measurement sampling.

Gate semantics on qubits (i, j), writing basis kets as |x_i x_j>:

  givens(i, j, theta, phi):  |01> -> cos(theta)|01> + e^{i phi} sin(theta)|10>
                             |10> -> -e^{-i phi} sin(theta)|01> + cos(theta)|10>
  phase(q, gamma):           |1>  -> e^{i gamma}|1>
  cphase(i, j, gamma):       |11> -> e^{i gamma}|11>

On adjacent qubits under the usual fermion-to-qubit ordering, givens with
phi = 0 is exactly exp[theta (a+_i a_j - a+_j a_i)], so products of adjacent
givens gates realize one-body rotations; the tests pin this against a dense
many-body matrix exponential.

Two simulators: a dense statevector path over all 2^n amplitudes for
cross-checks and small circuits, and a sector path that stores only the
fixed-particle-number amplitudes (one register, or an alpha/beta coefficient
matrix), which every gate here conserves.
"""

from __future__ import annotations

import cmath
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .bitops import mask_to_string, sector_masks, string_to_mask
from .errors import CapacityError, LayoutError, RangeError
from .samples import SampleSet

STATEVECTOR_CAP = 1 << 26


@dataclass(frozen=True)
class Givens:
    i: int
    j: int
    theta: float
    phi: float = 0.0

    name = "givens"

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.i, self.j)


@dataclass(frozen=True)
class Phase:
    q: int
    angle: float

    name = "phase"

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.q,)


@dataclass(frozen=True)
class CPhase:
    i: int
    j: int
    angle: float

    name = "cphase"

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.i, self.j)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple

    def __post_init__(self):
        for g in self.gates:
            qs = g.qubits
            if len(set(qs)) != len(qs):
                raise LayoutError(f"gate touches a qubit twice: {g}")
            if min(qs) < 0 or max(qs) >= self.n_qubits:
                raise LayoutError(f"gate off the register: {g}")


@dataclass(frozen=True)
class GateStats:
    n_qubits: int
    counts: dict
    one_qubit: int
    two_qubit: int
    depth: int


def gate_stats(circuit: Circuit) -> GateStats:
    """Gate counts by kind plus circuit depth (greedy qubit scheduling)."""
    counts = Counter(g.name for g in circuit.gates)
    one_q = sum(1 for g in circuit.gates if len(g.qubits) == 1)
    two_q = sum(1 for g in circuit.gates if len(g.qubits) == 2)
    level = np.zeros(circuit.n_qubits, dtype=np.int64)
    for g in circuit.gates:
        qs = list(g.qubits)
        t = level[qs].max() + 1
        level[qs] = t
    return GateStats(circuit.n_qubits, dict(counts), one_q, two_q, int(level.max(initial=0)))


# ---- dense statevector path ----

def simulate_statevector(circuit: Circuit, initial: str, cap: int = STATEVECTOR_CAP) -> np.ndarray:
    """All 2^n amplitudes; index bit k (most significant first) is qubit k.

    initial is a bitstring, leftmost character = qubit 0. Flat index of a
    basis state is int(bitstring, 2).
    """
    n = circuit.n_qubits
    if (1 << n) > cap:
        raise CapacityError(f"statevector of {n} qubits exceeds cap {cap}")
    if len(initial) != n or set(initial) - {"0", "1"}:
        raise RangeError(f"initial state {initial!r} does not fit {n} qubits")
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[int(initial, 2)] = 1.0
    view = psi.reshape((2,) * n)
    for g in circuit.gates:
        if isinstance(g, Phase):
            sl = [slice(None)] * n
            sl[g.q] = 1
            view[tuple(sl)] *= cmath.exp(1j * g.angle)
        elif isinstance(g, CPhase):
            sl = [slice(None)] * n
            sl[g.i] = 1
            sl[g.j] = 1
            view[tuple(sl)] *= cmath.exp(1j * g.angle)
        elif isinstance(g, Givens):
            s01 = [slice(None)] * n
            s01[g.i] = 0
            s01[g.j] = 1
            s10 = [slice(None)] * n
            s10[g.i] = 1
            s10[g.j] = 0
            a = view[tuple(s01)].copy()
            b = view[tuple(s10)]
            c, s = np.cos(g.theta), np.sin(g.theta)
            ph = cmath.exp(1j * g.phi)
            view[tuple(s01)] = c * a - s / ph * b
            view[tuple(s10)] = s * ph * a + c * b
        else:
            raise LayoutError(f"unknown gate {g!r}")
    drift = abs(np.linalg.norm(psi) - 1.0)
    assert drift < 1e-10, f"norm drifted by {drift:.2e}"
    return psi


# ---- sector path ----

@dataclass
class SectorState:
    """Amplitudes over one or two fixed-particle-number registers.

    One register: coefficients has shape (len(astrings),). Two registers:
    shape (len(astrings), len(bstrings)), alpha indexing rows. String arrays
    are the full sector, ascending.
    """

    norb: int
    astrings: np.ndarray
    bstrings: np.ndarray | None
    coefficients: np.ndarray

    @property
    def two_register(self) -> bool:
        return self.bstrings is not None

    def probabilities(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def configuration_masks(self) -> np.ndarray:
        """Integer configurations aligned with flattened coefficients.

        Two-register states pack the beta string above the alpha register, so
        the mask reads back as the alpha bitstring followed by the beta one.
        """
        if not self.two_register:
            return self.astrings
        nb = self.bstrings.size
        a = np.repeat(self.astrings, nb)
        b = np.tile(self.bstrings, self.astrings.size)
        return a | (b << self.norb)


def _register_gate_indices(strings: np.ndarray, i: int, j: int):
    """Index pairs (01 -> has j only, 10 -> has i only) plus both-occupied set."""
    has_i = (strings >> i) & 1
    has_j = (strings >> j) & 1
    only_j = np.nonzero((has_i == 0) & (has_j == 1))[0]
    flipped = strings[only_j] ^ ((np.int64(1) << i) | (np.int64(1) << j))
    partner = np.searchsorted(strings, flipped)
    both = np.nonzero((has_i == 1) & (has_j == 1))[0]
    return only_j, partner, both


def sector_statevector(
    circuit: Circuit, norb: int, init_alpha: int, init_beta: int | None = None
) -> SectorState:
    """Exact circuit state within the particle-number sector of the start state.

    Qubits [0, norb) form the alpha register. With init_beta given the circuit
    must span 2*norb qubits and [norb, 2*norb) form the beta register. Givens
    gates may not cross registers.
    """
    two = init_beta is not None
    want = 2 * norb if two else norb
    if circuit.n_qubits != want:
        raise LayoutError(f"circuit has {circuit.n_qubits} qubits, register layout wants {want}")

    astrings = sector_masks(norb, int(bin(init_alpha).count("1")))
    ia = int(np.searchsorted(astrings, init_alpha))
    if two:
        bstrings = sector_masks(norb, int(bin(init_beta).count("1")))
        ib = int(np.searchsorted(bstrings, init_beta))
        C = np.zeros((astrings.size, bstrings.size), dtype=np.complex128)
        C[ia, ib] = 1.0
    else:
        bstrings = None
        C = np.zeros(astrings.size, dtype=np.complex128)
        C[ia] = 1.0

    def reg(q: int) -> tuple[int, int]:
        return (0, q) if q < norb else (1, q - norb)

    for g in circuit.gates:
        if isinstance(g, Phase):
            r, q = reg(g.q)
            ph = cmath.exp(1j * g.angle)
            if r == 0:
                rows = np.nonzero((astrings >> q) & 1)[0]
                C[rows] *= ph
            else:
                cols = np.nonzero((bstrings >> q) & 1)[0]
                C[:, cols] *= ph
        elif isinstance(g, CPhase):
            (ri, qi), (rj, qj) = reg(g.i), reg(g.j)
            ph = cmath.exp(1j * g.angle)
            if ri == rj == 0:
                rows = np.nonzero(((astrings >> qi) & 1) & ((astrings >> qj) & 1))[0]
                C[rows] *= ph
            elif ri == rj == 1:
                cols = np.nonzero(((bstrings >> qi) & 1) & ((bstrings >> qj) & 1))[0]
                C[:, cols] *= ph
            else:
                aq, bq = (qi, qj) if ri == 0 else (qj, qi)
                rows = np.nonzero((astrings >> aq) & 1)[0]
                cols = np.nonzero((bstrings >> bq) & 1)[0]
                C[np.ix_(rows, cols)] *= ph
        elif isinstance(g, Givens):
            (ri, qi), (rj, qj) = reg(g.i), reg(g.j)
            if ri != rj:
                raise LayoutError(f"givens gate crosses registers: {g}")
            strings = astrings if ri == 0 else bstrings
            idx01, idx10, _ = _register_gate_indices(strings, qi, qj)
            c, s = np.cos(g.theta), np.sin(g.theta)
            ph = cmath.exp(1j * g.phi)
            if ri == 0:
                a = C[idx01].copy()
                b = C[idx10]
                C[idx01] = c * a - s / ph * b
                C[idx10] = s * ph * a + c * b
            else:
                a = C[:, idx01].copy()
                b = C[:, idx10]
                C[:, idx01] = c * a - s / ph * b
                C[:, idx10] = s * ph * a + c * b
        else:
            raise LayoutError(f"unknown gate {g!r}")
    return SectorState(norb, astrings, bstrings, C)


# ---- sampling and readout noise ----

def sample_state(state: SectorState, shots: int, seed: int) -> SampleSet:
    """Multinomial draw from the state's configuration distribution."""
    if shots <= 0:
        raise RangeError(f"shots must be positive, got {shots}")
    p = state.probabilities().ravel()
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, p)
    nz = np.nonzero(draws)[0]
    masks = state.configuration_masks()[nz]
    width = 2 * state.norb if state.two_register else state.norb
    return SampleSet.from_masks(masks, width, seed=seed, counts=draws[nz])


def apply_readout_noise(samples: SampleSet, p_flip: float, seed: int) -> SampleSet:
    """Flip each measured bit independently with probability p_flip."""
    if not 0.0 <= p_flip <= 1.0:
        raise RangeError(f"p_flip must sit in [0, 1], got {p_flip}")
    if p_flip == 0.0:
        return SampleSet(samples.width, dict(samples.counts), samples.seed)
    masks, counts = samples.to_masks()
    shot_masks = np.repeat(masks, counts)
    rng = np.random.default_rng(seed)
    flips = rng.random((shot_masks.size, samples.width)) < p_flip
    packed = (flips.astype(np.int64) << np.arange(samples.width, dtype=np.int64)).sum(axis=1)
    return SampleSet.from_masks(shot_masks ^ packed, samples.width, seed=samples.seed)

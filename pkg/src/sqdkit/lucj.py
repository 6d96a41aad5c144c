"""Unitary cluster Jastrow circuits on full and half qubit layouts.

A parameter set holds, per layer, an orbital-rotation generator K (real
antisymmetric) and density-density couplings J_aa, J_bb (symmetric) and J_ab,
plus a final rotation generator K2. Each layer executes as

    exp(-Khat)  then  exp(i Jhat)  then  exp(+Khat)

with exp(-Khat2) appended after the last layer. Orbital rotations compile to
nearest-neighbor givens gates via an adjacent-pair elimination of the matrix
exponential, so the qubit gates realize the fermionic one-body rotation
exactly; the tests pin the whole chain against a dense many-body exponential.

The full layout uses 2n qubits, alpha register first. The half layout keeps
one register of n qubits: same-register couplings come from J_aa, and each
opposite-register coupling J_ab collapses onto the register pair (i, j) as the
collision sum J_ab[i, j] + J_ab[j, i], its diagonal as a plain phase. J_bb has
no image on the half layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .circuits import Circuit, CPhase, Givens, Phase, SectorState, sector_statevector
from .errors import LayoutError, RangeError, ShapeError
from .subspace import TensorOperator, TensorSpace

_SYM_TOL = 1e-12

COUPLING_MAPS = ("all_to_all", "linear")


def _check_coupling(coupling: str) -> None:
    if coupling not in COUPLING_MAPS:
        raise RangeError(f"unknown coupling map {coupling!r}, expected one of {COUPLING_MAPS}")


def _check_square(M: np.ndarray, n: int, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.shape != (n, n):
        raise ShapeError(f"{name} must be {n}x{n}, got {M.shape}")
    return M


def _check_antisymmetric(M: np.ndarray, n: int, name: str) -> np.ndarray:
    M = _check_square(M, n, name)
    if np.abs(M + M.T).max(initial=0.0) > _SYM_TOL:
        raise ShapeError(f"{name} must be antisymmetric")
    return M


def _check_symmetric(M: np.ndarray, n: int, name: str) -> np.ndarray:
    M = _check_square(M, n, name)
    if np.abs(M - M.T).max(initial=0.0) > _SYM_TOL:
        raise ShapeError(f"{name} must be symmetric")
    return M


@dataclass(frozen=True)
class LucjLayer:
    K: np.ndarray
    J_aa: np.ndarray
    J_bb: np.ndarray
    J_ab: np.ndarray

    @classmethod
    def zeros(cls, norb: int) -> "LucjLayer":
        z = np.zeros((norb, norb))
        return cls(z.copy(), z.copy(), z.copy(), z.copy())


@dataclass(frozen=True)
class LucjParameters:
    norb: int
    layers: tuple
    K2: np.ndarray

    def __post_init__(self):
        n = self.norb
        for idx, layer in enumerate(self.layers):
            _check_antisymmetric(layer.K, n, f"layers[{idx}].K")
            _check_symmetric(layer.J_aa, n, f"layers[{idx}].J_aa")
            _check_symmetric(layer.J_bb, n, f"layers[{idx}].J_bb")
            _check_square(layer.J_ab, n, f"layers[{idx}].J_ab")
        _check_antisymmetric(self.K2, n, "K2")

    @classmethod
    def zeros(cls, norb: int, n_layers: int = 1) -> "LucjParameters":
        return cls(norb, tuple(LucjLayer.zeros(norb) for _ in range(n_layers)), np.zeros((norb, norb)))


def _block(d: dict, key: str, n: int, alias: str | None = None) -> np.ndarray:
    for k in (key, alias) if alias else (key,):
        if k is not None and k in d and d[k] is not None:
            return np.asarray(d[k], dtype=np.float64)
    return np.zeros((n, n))


def parameters_from_dict(data: dict) -> LucjParameters:
    """Accepts either an explicit `layers` list or flat single-layer keys.

    The rotation generator may be spelled K or K1 in either form. Missing
    blocks are zero everywhere.
    """
    norb = int(data["norb"])
    if "layers" in data and data["layers"] is not None:
        layer_dicts = data["layers"]
    else:
        layer_dicts = [data]
    layers = tuple(
        LucjLayer(
            _block(ld, "K", norb, alias="K1"),
            _block(ld, "J_aa", norb),
            _block(ld, "J_bb", norb),
            _block(ld, "J_ab", norb),
        )
        for ld in layer_dicts
    )
    return LucjParameters(norb, layers, _block(data, "K2", norb))


def parameters_to_dict(params: LucjParameters) -> dict:
    return {
        "norb": params.norb,
        "layers": [
            {
                "K": layer.K.tolist(),
                "J_aa": layer.J_aa.tolist(),
                "J_bb": layer.J_bb.tolist(),
                "J_ab": layer.J_ab.tolist(),
            }
            for layer in params.layers
        ],
        "K2": params.K2.tolist(),
    }


def load_parameters(path) -> LucjParameters:
    with open(path) as fh:
        return parameters_from_dict(json.load(fh))


def save_parameters(params: LucjParameters, path) -> None:
    with open(path, "w") as fh:
        json.dump(parameters_to_dict(params), fh, indent=1)
        fh.write("\n")


# ---- adjacent-pair rotation compilation ----

def givens_decomposition(Q: np.ndarray) -> list[tuple[int, float]]:
    """Adjacent-row elimination of a special orthogonal matrix.

    Returns rotations (i, theta), each mixing rows (i, i+1), whose product
    applied in list order reduces Q to the identity. Column by column, below-
    diagonal entries are zeroed bottom-up.
    """
    Q = np.array(Q, dtype=np.float64)
    n = Q.shape[0]
    rots: list[tuple[int, float]] = []
    for col in range(n - 1):
        for row in range(n - 1, col, -1):
            a, b = Q[row - 1, col], Q[row, col]
            r = np.hypot(a, b)
            if r < 1e-15:
                continue
            theta = float(np.arctan2(b, a))
            if theta == 0.0:
                continue
            c, s = a / r, b / r
            Q[[row - 1, row], :] = np.array([[c, s], [-s, c]]) @ Q[[row - 1, row], :]
            rots.append((row - 1, theta))
    if not np.allclose(Q, np.eye(n), atol=1e-10):
        raise ShapeError("matrix is not special orthogonal")
    return rots


def _rotation_gates(K: np.ndarray, offset: int, invert: bool = False) -> list[Givens]:
    """Gates realizing exp(-Khat) for the one-body generator K (exp(+Khat) with invert)."""
    Q = scipy.linalg.expm(-K)
    rots = givens_decomposition(Q)
    if invert:
        return [Givens(offset + i, offset + i + 1, th) for i, th in rots if th != 0.0]
    return [Givens(offset + i, offset + i + 1, -th) for i, th in reversed(rots) if th != 0.0]


def _same_register_jastrow(J: np.ndarray, offset: int, linear: bool) -> list:
    n = J.shape[0]
    gates: list = []
    for p in range(n):
        if J[p, p] != 0.0:
            gates.append(Phase(offset + p, float(J[p, p])))
    for p in range(n):
        for r in range(p + 1, n):
            if linear and r != p + 1:
                continue
            if J[p, r] != 0.0:
                gates.append(CPhase(offset + p, offset + r, 2.0 * float(J[p, r])))
    return gates


def build_full_circuit(params: LucjParameters, coupling: str = "all_to_all") -> Circuit:
    """Two-register circuit on 2*norb qubits, alpha register first.

    coupling="linear" keeps only adjacent same-register couplings and the
    aligned (p, p) opposite-register couplings; anything outside the map is
    dropped from the circuit.
    """
    _check_coupling(coupling)
    linear = coupling == "linear"
    n = params.norb
    gates: list = []
    for layer in params.layers:
        gates += _rotation_gates(layer.K, 0)
        gates += _rotation_gates(layer.K, n)
        gates += _same_register_jastrow(layer.J_aa, 0, linear)
        gates += _same_register_jastrow(layer.J_bb, n, linear)
        for p in range(n):
            for r in range(n):
                if linear and r != p:
                    continue
                if layer.J_ab[p, r] != 0.0:
                    gates.append(CPhase(p, n + r, float(layer.J_ab[p, r])))
        gates += _rotation_gates(layer.K, 0, invert=True)
        gates += _rotation_gates(layer.K, n, invert=True)
    gates += _rotation_gates(params.K2, 0)
    gates += _rotation_gates(params.K2, n)
    return Circuit(2 * n, tuple(gates))


def build_half_circuit(params: LucjParameters, coupling: str = "all_to_all") -> Circuit:
    """One-register circuit on norb qubits with opposite-register couplings folded in."""
    _check_coupling(coupling)
    linear = coupling == "linear"
    n = params.norb
    gates: list = []
    for layer in params.layers:
        gates += _rotation_gates(layer.K, 0)
        gates += _same_register_jastrow(layer.J_aa, 0, linear)
        for p in range(n):
            if layer.J_ab[p, p] != 0.0:
                gates.append(Phase(p, float(layer.J_ab[p, p])))
        if not linear:
            for p in range(n):
                for r in range(p + 1, n):
                    angle = float(layer.J_ab[p, r] + layer.J_ab[r, p])
                    if angle != 0.0:
                        gates.append(CPhase(p, r, angle))
        gates += _rotation_gates(layer.K, 0, invert=True)
    gates += _rotation_gates(params.K2, 0)
    return Circuit(n, tuple(gates))


# ---- state preparation and energy ----

def hf_mask(n_occupied: int) -> int:
    return (1 << n_occupied) - 1


def simulate_full_state(params: LucjParameters, n_alpha: int, n_beta: int) -> SectorState:
    circuit = build_full_circuit(params)
    return sector_statevector(circuit, params.norb, hf_mask(n_alpha), hf_mask(n_beta))


def simulate_half_state(params: LucjParameters, n_occupied: int) -> SectorState:
    circuit = build_half_circuit(params)
    return sector_statevector(circuit, params.norb, hf_mask(n_occupied))


def energy_expectation(state: SectorState, table) -> float:
    """Rayleigh quotient of a two-register sector state under the table's Hamiltonian."""
    if state.bstrings is None:
        raise LayoutError("energy expectation needs a two-register state")
    space = TensorSpace.from_strings(state.norb, state.astrings, state.bstrings)
    op = TensorOperator(space, table)
    v = state.coefficients.ravel()
    return float(v.real @ op.matvec(v.real) + v.imag @ op.matvec(v.imag))


def lucj_energy(params: LucjParameters, table) -> float:
    """Energy of the full-layout circuit applied to the table's HF reference."""
    return energy_expectation(simulate_full_state(params, table.n_alpha, table.n_beta), table)


# ---- parameter packing and derivative-free refinement ----

def _pack(params: LucjParameters) -> np.ndarray:
    n = params.norb
    il = np.tril_indices(n, -1)
    iu = np.triu_indices(n)
    parts = []
    for layer in params.layers:
        parts += [layer.K[il], layer.J_aa[iu], layer.J_bb[iu], layer.J_ab.ravel()]
    parts.append(params.K2[il])
    return np.concatenate(parts)


def _unpack(x: np.ndarray, norb: int, n_layers: int) -> LucjParameters:
    n = norb
    il = np.tril_indices(n, -1)
    iu = np.triu_indices(n)
    ntri = il[0].size
    nsym = iu[0].size
    pos = 0

    def take(k):
        nonlocal pos
        out = x[pos : pos + k]
        pos += k
        return out

    layers = []
    for _ in range(n_layers):
        K = np.zeros((n, n))
        K[il] = take(ntri)
        K = K - K.T
        J_aa = np.zeros((n, n))
        J_aa[iu] = take(nsym)
        J_aa = J_aa + J_aa.T - np.diag(np.diag(J_aa))
        J_bb = np.zeros((n, n))
        J_bb[iu] = take(nsym)
        J_bb = J_bb + J_bb.T - np.diag(np.diag(J_bb))
        J_ab = take(n * n).reshape(n, n).copy()
        layers.append(LucjLayer(K, J_aa, J_bb, J_ab))
    K2 = np.zeros((n, n))
    K2[il] = take(ntri)
    return LucjParameters(norb, tuple(layers), K2 - K2.T)


def optimize_parameters(
    params: LucjParameters, table, max_evals: int = 200
) -> tuple[LucjParameters, list[float]]:
    """Derivative-free energy refinement; returns parameters plus the
    best-so-far energy trace (non-increasing by construction)."""
    import scipy.optimize

    n_layers = len(params.layers)
    trace: list[float] = []

    def objective(x):
        e = lucj_energy(_unpack(x, params.norb, n_layers), table)
        trace.append(min(e, trace[-1]) if trace else e)
        return e

    res = scipy.optimize.minimize(
        objective,
        _pack(params),
        method="Nelder-Mead",
        options={"maxfev": max_evals, "xatol": 1e-6, "fatol": 1e-10},
    )
    if trace and res.fun > trace[0]:
        return params, trace
    return _unpack(res.x, params.norb, n_layers), trace

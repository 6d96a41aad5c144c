"""Integral engine against independent oracles.

Three oracle families: closed forms for pure s-functions, midpoint quadrature
on a cube for one-electron integrals, and the center-derivative identity
(x - Ax) g_s(r; a, A) = (1/2a) d/dAx g_s(r; a, A), which turns every p-type
integral into a finite difference of the s-only engine.
"""

import numpy as np
import pytest
from scipy.special import erf

from fixturegen.basis import build_molecule
from fixturegen.integrals import (
    boys,
    eri_contracted,
    eri_prim,
    eri_tensor,
    hermite_coefs,
    kinetic_prim,
    nuclear_prim,
    overlap_matrix,
    overlap_prim,
)

S = (0, 0, 0)
PX, PY, PZ = (1, 0, 0), (0, 1, 0), (0, 0, 1)


def _grid(L=7.5, n=101):
    # midpoint rule; nodes avoid every lattice-friendly special point
    x = np.linspace(-L, L, n) + 0.0171
    h = x[1] - x[0]
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij", sparse=True)
    return X, Y, Z, h**3


def _gauss(X, Y, Z, pw, A, a):
    r2 = (X - A[0]) ** 2 + (Y - A[1]) ** 2 + (Z - A[2]) ** 2
    return (X - A[0]) ** pw[0] * (Y - A[1]) ** pw[1] * (Z - A[2]) ** pw[2] * np.exp(-a * r2)


def test_boys_closed_form_and_limits():
    x = np.array([0.0, 1e-14, 0.3, 1.7, 9.0, 40.0])
    F = boys(3, x)
    with np.errstate(invalid="ignore", divide="ignore"):
        f0 = np.where(x > 1e-13, 0.5 * np.sqrt(np.pi / np.maximum(x, 1e-300)) * erf(np.sqrt(x)), 1.0)
    assert np.allclose(F[0], f0, rtol=1e-12, atol=1e-12)
    assert np.allclose(boys(4, 0.0)[:, 0], [1 / (2 * m + 1) for m in range(5)], atol=1e-12)
    # dF_m/dx = -F_{m+1}
    eps = 1e-6
    lo, hi = boys(3, 2.0 - eps), boys(3, 2.0 + eps)
    deriv = (hi[:3, 0] - lo[:3, 0]) / (2 * eps)
    assert np.allclose(deriv, -boys(3, 2.0)[1:, 0], atol=1e-8)


def test_hermite_zeroth_matches_gaussian_product_rule():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b = rng.uniform(0.2, 3.0, 2)
        Q = rng.uniform(-2, 2)
        assert np.isclose(hermite_coefs(0, 0, a, b, Q)[0], np.exp(-a * b / (a + b) * Q * Q))


def test_ss_overlap_closed_form():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a, b = rng.uniform(0.2, 3.0, 2)
        A, B = rng.uniform(-1.5, 1.5, (2, 3))
        d2 = float(np.sum((A - B) ** 2))
        ref = (np.pi / (a + b)) ** 1.5 * np.exp(-a * b / (a + b) * d2)
        assert np.isclose(overlap_prim(S, A, a, S, B, b), ref, rtol=1e-13)


def test_one_electron_integrals_match_quadrature():
    X, Y, Z, w = _grid()
    rng = np.random.default_rng(3)
    C = np.array([0.3111, -0.2222, 0.1533])
    for pw1, pw2 in [(S, S), (PX, S), (PX, PY), (PZ, PZ)]:
        a, b = rng.uniform(0.3, 1.8, 2)
        A, B = rng.uniform(-0.8, 0.8, (2, 3))
        g1, g2 = _gauss(X, Y, Z, pw1, A, a), _gauss(X, Y, Z, pw2, B, b)
        assert np.isclose(overlap_prim(pw1, A, a, pw2, B, b), np.sum(g1 * g2) * w, rtol=1e-8)
        # kinetic: -(1/2) grad^2 of the ket, Laplacian taken analytically
        i, j, k = pw2
        lap = 0.0
        for pw_d, comp, Bc in (((1, 0, 0), i, B[0]), ((0, 1, 0), j, B[1]), ((0, 0, 1), k, B[2])):
            down = np.array(pw2) - 2 * np.array(pw_d)
            if comp >= 2:
                lap = lap + comp * (comp - 1) * _gauss(X, Y, Z, tuple(down), B, b)
            lap = lap - 2 * b * (2 * comp + 1) * g2
            up = tuple(np.array(pw2) + 2 * np.array(pw_d))
            lap = lap + 4 * b * b * _gauss(X, Y, Z, up, B, b)
        assert np.isclose(kinetic_prim(pw1, A, a, pw2, B, b), -0.5 * np.sum(g1 * lap) * w, rtol=1e-7)
        rC = np.sqrt((X - C[0]) ** 2 + (Y - C[1]) ** 2 + (Z - C[2]) ** 2)
        ref_v = np.sum(g1 * g2 / rC) * w
        assert np.isclose(nuclear_prim(pw1, A, a, pw2, B, b, C), ref_v, rtol=2e-3)


def test_p_integrals_are_center_derivatives_of_s():
    rng = np.random.default_rng(4)
    a, b = 0.9, 1.3
    A, B = rng.uniform(-0.9, 0.9, (2, 3))
    C = np.array([0.25, -0.4, 0.1])
    h = 2e-4

    def dA(f, axis):
        e = np.zeros(3)
        e[axis] = h
        return (f(A + e) - f(A - e)) / (2 * h) / (2 * a)

    assert np.isclose(
        overlap_prim(PX, A, a, S, B, b),
        dA(lambda Ax: overlap_prim(S, Ax, a, S, B, b), 0), rtol=1e-6)
    assert np.isclose(
        nuclear_prim(PY, A, a, S, B, b, C),
        dA(lambda Ax: nuclear_prim(S, Ax, a, S, B, b, C), 1), rtol=1e-6)
    assert np.isclose(
        kinetic_prim(PZ, A, a, S, B, b),
        dA(lambda Ax: kinetic_prim(S, Ax, a, S, B, b), 2), rtol=1e-6)
    # both centers promoted: mixed second derivative
    def ss(Ax, Bx):
        return overlap_prim(S, Ax, a, S, Bx, b)

    ex, ey = np.eye(3)[0] * h, np.eye(3)[1] * h
    mixed = (ss(A + ex, B + ey) - ss(A + ex, B - ey) - ss(A - ex, B + ey) + ss(A - ex, B - ey)) / (4 * h * h)
    assert np.isclose(overlap_prim(PX, A, a, PY, B, b), mixed / (4 * a * b), rtol=1e-5)


def test_ssss_eri_closed_form():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a, b, c, d = rng.uniform(0.3, 2.5, 4)
        A, B, C, D = rng.uniform(-1.2, 1.2, (4, 3))
        p, q = a + b, c + d
        P = (a * A + b * B) / p
        Q = (c * C + d * D) / q
        x = p * q / (p + q) * float(np.sum((P - Q) ** 2))
        pref = 2 * np.pi**2.5 / (p * q * np.sqrt(p + q))
        gab = np.exp(-a * b / p * np.sum((A - B) ** 2))
        gcd = np.exp(-c * d / q * np.sum((C - D) ** 2))
        f0 = 1.0 if x < 1e-13 else 0.5 * np.sqrt(np.pi / x) * erf(np.sqrt(x))
        ref = pref * gab * gcd * f0
        assert np.isclose(eri_prim(S, A, a, S, B, b, S, C, c, S, D, d), ref, rtol=1e-12)


def test_p_eri_is_center_derivative_of_s_eri():
    rng = np.random.default_rng(6)
    a, b, c, d = 1.1, 0.7, 0.5, 1.6
    A, B, C, D = rng.uniform(-0.8, 0.8, (4, 3))
    h = 2e-4
    for axis, pw in ((0, PX), (2, PZ)):
        e = np.zeros(3)
        e[axis] = h
        fd = (eri_prim(S, A + e, a, S, B, b, S, C, c, S, D, d)
              - eri_prim(S, A - e, a, S, B, b, S, C, c, S, D, d)) / (2 * h) / (2 * a)
        assert np.isclose(eri_prim(pw, A, a, S, B, b, S, C, c, S, D, d), fd, rtol=1e-6)
    # derivative on the ket side
    e = np.array([0.0, h, 0.0])
    fd = (eri_prim(S, A, a, S, B, b, PY, C + 0, c, S, D + e, d)
          - eri_prim(S, A, a, S, B, b, PY, C, c, S, D - e, d)) / (2 * h) / (2 * d)
    assert np.isclose(eri_prim(S, A, a, S, B, b, PY, C, c, PY, D, d), fd, rtol=1e-5)


def test_eri_tensor_matches_scalar_path_and_symmetry():
    mol = build_molecule([["Li", 0.0, 0.0, 0.0], ["H", 0.0, 0.0, 1.6]], "sto-3g")
    eri = eri_tensor(mol)
    rng = np.random.default_rng(7)
    for _ in range(12):
        i, j, k, l = rng.integers(0, mol.n_ao, 4)
        direct = eri_contracted(mol.aos[i], mol.aos[j], mol.aos[k], mol.aos[l])
        assert np.isclose(eri[i, j, k, l], direct, rtol=1e-11, atol=1e-13)
    assert np.allclose(eri, eri.transpose(1, 0, 2, 3), atol=1e-12)
    assert np.allclose(eri, eri.transpose(0, 1, 3, 2), atol=1e-12)
    assert np.allclose(eri, eri.transpose(2, 3, 0, 1), atol=1e-12)


def test_contracted_functions_are_unit_normalized():
    mol = build_molecule([["N", 0.0, 0.0, 0.0], ["N", 0.0, 0.0, 1.1]], "6-31g")
    assert mol.n_ao == 18
    s = overlap_matrix(mol)
    assert np.allclose(np.diag(s), 1.0, atol=1e-12)
    w = np.linalg.eigvalsh(s)
    assert w.min() > 1e-4  # linearly independent basis


def test_hydrogen_atom_ground_state_pin():
    # one electron: lowest generalized eigenvalue of (h_core, S); the STO-3G
    # value is a standard reference number
    import scipy.linalg

    from fixturegen.integrals import core_hamiltonian

    mol = build_molecule([["H", 0.0, 0.0, 0.0]], "sto-3g")
    h = core_hamiltonian(mol)
    s = overlap_matrix(mol)
    e0 = scipy.linalg.eigh(h, s, eigvals_only=True)[0]
    assert np.isclose(e0, -0.466582, atol=5e-5)

"""LUCJ seed construction: orthogonal logs and amplitude reconstruction."""

import json

import numpy as np
import pytest
import scipy.linalg

from fixturegen.lucj_seed import (SeedError, _real_log_special_orthogonal,
                                  seed_layers, write_seed)


def _random_so(n, seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


@pytest.mark.parametrize("n,seed", [(2, 0), (3, 1), (5, 2), (8, 3)])
def test_log_inverts_expm_on_random_rotations(n, seed):
    V = _random_so(n, seed)
    K = _real_log_special_orthogonal(V)
    assert np.allclose(K, -K.T, atol=1e-12)
    assert np.allclose(scipy.linalg.expm(K), V, atol=1e-10)


def test_log_handles_paired_reflections():
    V = np.diag([-1.0, -1.0, 1.0])
    K = _real_log_special_orthogonal(V)
    assert np.allclose(scipy.linalg.expm(K), V, atol=1e-10)


def test_log_of_identity_is_zero():
    assert np.allclose(_real_log_special_orthogonal(np.eye(4)), 0.0)


def _random_t2(no, nv, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(no * nv, no * nv)) * 0.05
    M = 0.5 * (M + M.T)
    return M.reshape(no, nv, no, nv)


def _reconstruct(params, no, nv):
    """scale * t2 implied by the layers: sum_k theta_k A_k[v,o] x A_k[v,o]."""
    norb = params["norb"]
    total = np.zeros((no, nv, no, nv))
    for layer in params["layers"]:
        V = scipy.linalg.expm(np.array(layer["K"]))
        W = -0.5 * np.array(layer["J_ab"])  # theta * d d^T
        thetaA = np.einsum("pu,qu,uv,rv,sv->pqrs", V, V, W, V, V)[no:, :no, no:, :no]
        total += thetaA.transpose(1, 0, 3, 2)
    assert norb == no + nv
    return total


@pytest.mark.parametrize("no,nv,seed", [(2, 2, 4), (2, 3, 5), (3, 2, 6)])
def test_full_layer_set_reconstructs_the_amplitudes(no, nv, seed):
    t2 = _random_t2(no, nv, seed)
    params = seed_layers(t2, no + nv, no, scale=0.7,
                         max_layers=no * nv, rel_tol=0.0)
    recon = _reconstruct(params, no, nv)
    assert np.allclose(recon, 0.7 * t2, atol=1e-10)


def test_truncation_keeps_the_dominant_directions():
    t2 = _random_t2(2, 2, 9)
    full = seed_layers(t2, 4, 2, max_layers=4, rel_tol=0.0)
    one = seed_layers(t2, 4, 2, max_layers=1, rel_tol=0.0)
    assert len(one["layers"]) == 1
    M = t2.reshape(4, 4)
    lam = np.linalg.eigvalsh(M)
    top = lam[np.argmax(np.abs(lam))]
    recon = _reconstruct(one, 2, 2).reshape(4, 4)
    # the single kept layer is the best rank-1 approximation of M
    assert np.allclose(np.linalg.eigvalsh(recon),
                       sorted([0, 0, 0, top]), atol=1e-10)
    assert len(full["layers"]) == 4


def test_layer_blocks_have_the_expected_structure():
    t2 = _random_t2(2, 2, 11)
    params = seed_layers(t2, 4, 2)
    assert set(params) == {"norb", "layers", "K2"}
    assert params["norb"] == 4
    K2 = np.array(params["K2"])
    assert np.allclose(K2, -K2.T, atol=1e-12) and np.abs(K2).max() > 0
    for layer in params["layers"]:
        K = np.array(layer["K"])
        J_aa = np.array(layer["J_aa"])
        assert np.allclose(K, -K.T, atol=1e-12)
        assert np.allclose(J_aa, J_aa.T, atol=1e-12)
        assert np.allclose(layer["J_bb"], J_aa)
        assert np.allclose(layer["J_ab"], 2.0 * J_aa)
        # J = -theta d d^T is rank one
        w = np.linalg.eigvalsh(J_aa)
        assert np.sum(np.abs(w) > 1e-12 * max(np.abs(w).max(), 1e-300)) <= 1


def test_k2_sums_sqrt_weighted_rotation_generators():
    no, nv = 2, 2
    t2 = _random_t2(no, nv, 17)
    scale, mix = 0.8, 0.26
    params = seed_layers(t2, no + nv, no, scale=scale, k2_mix=mix)
    lam, vecs = np.linalg.eigh(t2.reshape(no * nv, no * nv))
    expect = np.zeros((no + nv, no + nv))
    for k in range(no * nv):
        m = vecs[:, k].reshape(no, nv)
        C = np.zeros((no + nv, no + nv))
        C[no:, :no] = m.T
        expect += mix * np.sqrt(abs(scale * lam[k])) * (C - C.T)
    assert np.allclose(params["K2"], expect, atol=1e-12)


def test_k2_covers_directions_beyond_the_layer_cut():
    t2 = _random_t2(2, 2, 19)
    one = seed_layers(t2, 4, 2, max_layers=1, rel_tol=0.0)
    full = seed_layers(t2, 4, 2, max_layers=4, rel_tol=0.0)
    assert len(one["layers"]) == 1 and len(full["layers"]) == 4
    assert np.allclose(one["K2"], full["K2"], atol=1e-12)


def test_k2_mix_zero_disables_the_final_rotation():
    t2 = _random_t2(2, 2, 23)
    params = seed_layers(t2, 4, 2, k2_mix=0.0)
    assert np.allclose(params["K2"], 0.0)


def test_asymmetric_amplitudes_are_rejected():
    t2 = np.zeros((2, 2, 2, 2))
    t2[0, 0, 1, 1] = 0.1  # no matching [1,1,0,0]
    with pytest.raises(SeedError, match="symmetric"):
        seed_layers(t2, 4, 2)


def test_zero_amplitudes_are_rejected():
    with pytest.raises(SeedError, match="usable"):
        seed_layers(np.zeros((2, 2, 2, 2)), 4, 2)


def test_shape_mismatch_is_rejected():
    with pytest.raises(SeedError):
        seed_layers(np.zeros((2, 2, 2, 2)), 5, 2)


def test_written_seed_is_valid_json(tmp_path):
    t2 = _random_t2(2, 2, 13)
    params = seed_layers(t2, 4, 2)
    path = tmp_path / "seed.json"
    write_seed(path, params)
    loaded = json.loads(path.read_text())
    assert loaded["norb"] == 4
    assert len(loaded["layers"]) == len(params["layers"])

"""Desk-scale acceptance: the committed fixtures drive every headline behavior.

Each test prints the quantities it certifies; together they cover oracle
agreement, half-register sampling accuracy, sample-driven selection, subspace
compactness, noisy-sample recovery, circuit resource reduction, isolation
from the fixture generator, and regeneration of the committed artifacts.
"""

import json
import re
import shutil
import subprocess
import time
from pathlib import Path

import numpy as np
import pytest

from sqdkit.circuits import gate_stats
from sqdkit.config import PipelineConfig
from sqdkit.integrals import parse_fcidump, write_fcidump
from sqdkit.lucj import build_full_circuit, build_half_circuit, parameters_from_dict
from sqdkit.pipeline import run_pipeline
from sqdkit.recovery import RecoveryConfig, corrected_pool, recover
from sqdkit.samples import SampleSet
from sqdkit.selection import SelectionConfig, classical_hci
from sqdkit.subspace import build_hamiltonian, fci_energy, fci_space

from tests.oracles import fock_matrix, sector_determinants

FIXTURES = Path(__file__).parent / "fixtures"
SPECS = Path(__file__).parent.parent / "fixturegen" / "specs"

H2_STEMS = [f"h2_sto3g_{r}" for r in ("0.50", "0.65", "0.74", "0.90", "1.10")]
N2_STEMS = [f"n2_631g_{r}" for r in ("1.00", "1.10", "1.25")]
SMALL_STEMS = H2_STEMS + ["h4_sto3g_1.00", "lih_sto3g_1.60"]


def _meta(stem: str) -> dict:
    return json.loads((FIXTURES / f"{stem}.metadata.json").read_text())


def _cfg(stem: str, outdir, **kwargs) -> PipelineConfig:
    base = dict(fcidump=str(FIXTURES / f"{stem}.fcidump"),
                params=str(FIXTURES / f"{stem}.lucj.json"),
                shots=100_000, p_flip=0.0, seed=0, outdir=str(outdir),
                reference="none")
    base.update(kwargs)
    return PipelineConfig(**base)


def test_fixture_hamiltonians_match_the_dense_oracle():
    t0 = time.perf_counter()
    for stem in SMALL_STEMS:
        table = parse_fcidump(FIXTURES / f"{stem}.fcidump")
        space = fci_space(table.norb, table.n_alpha, table.n_beta).to_determinant_space()
        H = build_hamiltonian(space, table).toarray()
        ref = fock_matrix(sector_determinants(table.norb, table.n_alpha, table.n_beta), table)
        assert np.allclose(H, ref, atol=1e-12), stem
        e = fci_energy(table).energy
        assert abs(e - _meta(stem)["e_fci"]) < 1e-8, stem
        print(f"{stem}: fci {e:.10f} matches metadata and dense oracle")
    elapsed = time.perf_counter() - t0
    print(f"oracle agreement over {len(SMALL_STEMS)} fixtures in {elapsed:.1f} s")
    assert elapsed < 10


def test_half_register_sampling_reaches_the_references(tmp_path):
    t0 = time.perf_counter()
    for stem in ["h4_sto3g_1.00", "lih_sto3g_1.60"]:
        rep = run_pipeline(_cfg(stem, tmp_path / stem, mode="hsqd"))
        err = rep.energies["final"] - _meta(stem)["e_fci"]
        print(f"{stem}: hsqd err {err * 1000:+.4f} mHa, "
              f"{rep.subspace_sizes['final']} determinants")
        assert abs(err) < 1e-3, stem
    for stem in N2_STEMS:
        table = parse_fcidump(FIXTURES / f"{stem}.fcidump")
        hci = classical_hci(table, SelectionConfig(epsilon1=1e-5))
        rep = run_pipeline(_cfg(stem, tmp_path / stem, mode="hsqd"))
        err = rep.energies["final"] - hci.ground.energy
        print(f"{stem}: hsqd {rep.energies['final']:.6f} vs hci {hci.ground.energy:.6f}, "
              f"err {err * 1000:+.4f} mHa, {rep.subspace_sizes['final']} determinants")
        assert abs(err) < 5e-3, stem
    elapsed = time.perf_counter() - t0
    print(f"sampling accuracy suite in {elapsed:.0f} s")
    assert elapsed < 600


def test_selection_from_samples_reaches_fci(tmp_path):
    t0 = time.perf_counter()
    for stem in ["h4_sto3g_1.00", "lih_sto3g_1.60"]:
        rep = run_pipeline(_cfg(stem, tmp_path / stem, mode="hci_hsqd"))
        err = rep.energies["final"] - _meta(stem)["e_fci"]
        print(f"{stem}: selected {rep.subspace_sizes['final']} determinants, "
              f"err {err * 1000:+.4f} mHa, stop {rep.stop_reason}")
        assert abs(err) < 1e-3, stem
        assert rep.stop_reason in ("converged", "exhausted"), stem
    elapsed = time.perf_counter() - t0
    assert elapsed < 300


def test_sampled_selection_is_no_larger_at_matched_error(tmp_path):
    for stem in ["h4_sto3g_1.00", "lih_sto3g_1.60"]:
        e_fci = _meta(stem)["e_fci"]
        table = parse_fcidump(FIXTURES / f"{stem}.fcidump")
        hci = classical_hci(table, SelectionConfig(epsilon1=1e-5))
        rep = run_pipeline(_cfg(stem, tmp_path / stem, mode="hci_hsqd"))
        err_sampled = rep.energies["final"] - e_fci
        err_classical = hci.ground.energy - e_fci
        assert abs(err_sampled - err_classical) <= 1e-4, (
            f"{stem}: errors not matched ({err_sampled:+.2e} vs {err_classical:+.2e})")
        n_sampled, n_classical = rep.subspace_sizes["final"], hci.subspace.size
        print(f"{stem}: sampled {n_sampled} vs classical {n_classical} determinants "
              f"(ratio {n_sampled / n_classical:.2f}) at matched error")
        assert n_sampled <= n_classical, stem


def test_recovery_ladder_on_noisy_samples(tmp_path):
    stem = "h4_sto3g_1.00"
    base = run_pipeline(_cfg(stem, tmp_path / "noiseless", mode="hsqd"))
    e0 = base.energies["final"]

    wall = {}
    for label, rcfg in [
        ("valid_occ_0C", RecoveryConfig(mode="valid_occ_0C", cycles=1)),
        ("sccr-1", RecoveryConfig(mode="sccr", cycles=1)),
        ("sccr-5", RecoveryConfig(mode="sccr", cycles=5)),
        ("sccr-9", RecoveryConfig(mode="sccr", cycles=9)),
    ]:
        rep = run_pipeline(_cfg(stem, tmp_path / label, mode="hsqd",
                                p_flip=0.02, recovery=rcfg))
        err = rep.energies["final"] - e0
        wall[label] = rep.wallclock["recover"]
        print(f"{label}: err vs noiseless {err * 1000:+.4f} mHa, "
              f"valid fraction {rep.valid_fraction:.3f}, "
              f"recover {wall[label]:.2f} s")
        assert abs(err) < 2e-3, label

    # every corrected configuration lands in the particle-number sector
    table = parse_fcidump(FIXTURES / f"{stem}.fcidump")
    noisy = SampleSet.load(tmp_path / "sccr-9" / "noisy.txt")
    n_ref, _, _ = recover(noisy, table, RecoveryConfig(mode="sccr", cycles=9))
    pool = corrected_pool(noisy, table, n_ref, seed=0)
    masks, _ = pool.to_masks()
    popcounts = np.array([bin(int(m)).count("1") for m in masks])
    assert (popcounts == table.n_alpha).all()
    print(f"all {masks.size} corrected configurations sector-valid; "
          f"0C/9C recover wallclock {wall['valid_occ_0C']:.2f}/{wall['sccr-9']:.2f} s")
    assert wall["valid_occ_0C"] < wall["sccr-9"]


def _random_parameters(norb: int, layers: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)

    def antisym():
        a = rng.normal(scale=0.1, size=(norb, norb))
        return (a - a.T).tolist()

    def sym():
        a = rng.normal(scale=0.1, size=(norb, norb))
        return (a + a.T).tolist()

    return {
        "norb": norb,
        "layers": [{"K": antisym(), "J_aa": sym(), "J_bb": sym(),
                    "J_ab": rng.normal(scale=0.1, size=(norb, norb)).tolist()}
                   for _ in range(layers)],
        "K2": antisym(),
    }


def test_half_circuits_halve_qubits_and_cut_two_qubit_gates():
    t0 = time.perf_counter()
    for norb in (8, 12, 26):
        params = parameters_from_dict(_random_parameters(norb, layers=2, seed=norb))
        full = gate_stats(build_full_circuit(params))
        half = gate_stats(build_half_circuit(params))
        ratio = half.two_qubit / full.two_qubit
        print(f"norb {norb}: qubits {full.n_qubits}->{half.n_qubits}, "
              f"two-qubit {full.two_qubit}->{half.two_qubit} (x{ratio:.3f})")
        assert half.n_qubits * 2 == full.n_qubits
        assert half.two_qubit <= 0.60 * full.two_qubit
    assert time.perf_counter() - t0 < 60


def test_package_never_imports_the_fixture_generator():
    root = Path(__file__).parent.parent
    pattern = re.compile(r"^\s*(import|from)\s+fixturegen", re.MULTILINE)
    offenders = [p for p in sorted((root / "src").rglob("*.py")) + sorted((root / "tests").rglob("*.py"))
                 if pattern.search(p.read_text())]
    assert offenders == []
    # committed artifacts alone feed the suite
    for stem in SMALL_STEMS + N2_STEMS:
        assert (FIXTURES / f"{stem}.fcidump").exists(), stem
        assert (FIXTURES / f"{stem}.metadata.json").exists(), stem


def _canonical(path: Path) -> str:
    return write_fcidump(parse_fcidump(path))


def test_regenerating_fixtures_reproduces_the_committed_artifacts(tmp_path):
    if shutil.which("fixture-gen") is None or not SPECS.is_dir():
        pytest.skip("fixture generator not installed")
    spec_files = sorted(SPECS.glob("*.json"))
    assert spec_files
    for spec_path in spec_files:
        proc = subprocess.run(
            ["fixture-gen", "--spec", str(spec_path), "--out", str(tmp_path)],
            capture_output=True, text=True, timeout=400)
        assert proc.returncode == 0, f"{spec_path.name}: {proc.stderr}"
        outputs = json.loads(spec_path.read_text())["outputs"]
        fresh = tmp_path / outputs["fcidump"]
        committed = FIXTURES / outputs["fcidump"]
        assert _canonical(fresh) == _canonical(committed), outputs["fcidump"]
        new_meta = json.loads((tmp_path / outputs["metadata"]).read_text())
        old_meta = json.loads((FIXTURES / outputs["metadata"]).read_text())
        for key in ("e_hf", "e_ccsd", "e_fci"):
            a, b = new_meta[key], old_meta[key]
            if a is None or b is None:
                assert a == b, f"{outputs['metadata']}: {key}"
            else:
                assert abs(a - b) < 1e-8, f"{outputs['metadata']}: {key}"
        print(f"{spec_path.stem}: regeneration matches the committed artifacts")

    # the active-space fixture exposes 24 spin orbitals to the solver
    for stem in N2_STEMS:
        table = parse_fcidump(FIXTURES / f"{stem}.fcidump")
        assert 2 * table.norb == 24 and table.nelec == 10, stem

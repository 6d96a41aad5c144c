"""Fixture generation: spec -> FCIDUMP + metadata (+ optional LUCJ seed).

The pipeline is build -> SCF -> MO transform -> active-space fold -> reference
energies -> serialize. Everything is computed before anything is written, so
a failure at any stage (SCF non-convergence in particular) leaves the output
directory untouched and is reported instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .basis import build_molecule
from .ccsd import CcsdError, ccsd, spatial_t2
from .fci import fci_ground, sector_dimension
from .fcidump import fcidump_text, metadata_dict
from .integrals import core_hamiltonian, eri_tensor
from .lucj_seed import seed_layers, write_seed
from .scf import ScfError, fold_active, hf_in_active, mo_transform, rhf
from .specfile import FixtureSpec, SpecError

FCI_CAP = 2500


class GenerationError(RuntimeError):
    """A computed stage failed after validation passed."""


@dataclass(frozen=True)
class GenerationReport:
    ok: bool
    message: str
    written: tuple
    e_hf: float | None = None
    e_ccsd: float | None = None
    e_fci: float | None = None


def _check_active_space(spec: FixtureSpec, mol) -> None:
    if spec.ne_active > mol.n_electrons:
        raise SpecError(f"active electrons {spec.ne_active} exceed "
                        f"the molecule's {mol.n_electrons}")
    if spec.no_active > mol.n_ao:
        raise SpecError(f"active orbitals {spec.no_active} exceed "
                        f"the basis size {mol.n_ao}")
    frozen = mol.n_electrons - spec.ne_active
    if frozen % 2:
        raise SpecError(f"freezing {frozen} electrons is not closed-shell")
    if frozen // 2 + spec.no_active > mol.n_ao:
        raise SpecError(f"core ({frozen // 2}) plus active ({spec.no_active}) "
                        f"orbitals exceed the basis size {mol.n_ao}")


def generate_fixture(spec: FixtureSpec, out_dir, fci_cap: int = FCI_CAP) -> GenerationReport:
    mol = build_molecule(list(spec.geometry), spec.basis)
    _check_active_space(spec, mol)

    try:
        scf = rhf(mol)
    except ScfError as exc:
        return GenerationReport(False, f"SCF failed: {exc}", ())

    h_mo, eri_mo = mo_transform(core_hamiltonian(mol), eri_tensor(mol), scf.mo_coefs)
    e_core, h_eff, eri_act = fold_active(h_mo, eri_mo, scf.e_nuc,
                                         mol.n_electrons, spec.ne_active, spec.no_active)
    e_hf = hf_in_active(e_core, h_eff, eri_act, spec.ne_active)
    if abs(e_hf - scf.energy) > 1e-8:
        raise GenerationError(
            f"folded HF energy {e_hf:.10f} disagrees with SCF {scf.energy:.10f}")

    e_fci = None
    if sector_dimension(spec.no_active, spec.ne_active) <= fci_cap:
        e_fci = fci_ground(h_eff, eri_act, e_core, spec.ne_active, max_dim=fci_cap).energy

    e_ccsd = None
    seed = None
    try:
        cc = ccsd(h_eff, eri_act, e_core, spec.ne_active)
        e_ccsd = cc.e_total
    except CcsdError as exc:
        if spec.lucj_out is not None:
            return GenerationReport(
                False, f"CCSD failed and the spec requests LUCJ parameters: {exc}", ())
    if spec.lucj_out is not None:
        seed = seed_layers(spatial_t2(cc, spec.ne_active), spec.no_active,
                           spec.ne_active // 2, scale=spec.lucj_scale,
                           max_layers=spec.lucj_max_layers,
                           k2_mix=spec.lucj_k2_mix)

    text = fcidump_text(h_eff, eri_act, e_core, spec.ne_active)
    meta = metadata_dict(molecule=spec.molecule, basis=spec.basis,
                         ne_active=spec.ne_active, no_active=spec.no_active,
                         e_hf=e_hf, e_ccsd=e_ccsd, e_fci=e_fci,
                         geometry=spec.geometry, bond_label=spec.bond_label)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    fcidump_path = out / spec.fcidump_out
    fcidump_path.parent.mkdir(parents=True, exist_ok=True)
    fcidump_path.write_text(text)
    written.append(str(fcidump_path))
    metadata_path = out / spec.metadata_out
    metadata_path.parent.mkdir(parents=True, exist_ok=True)
    metadata_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    written.append(str(metadata_path))
    if spec.lucj_out is not None:
        seed_path = out / spec.lucj_out
        seed_path.parent.mkdir(parents=True, exist_ok=True)
        write_seed(seed_path, seed)
        written.append(str(seed_path))

    label = f" r={spec.bond_label}" if spec.bond_label else ""
    parts = [f"e_hf={e_hf:.10f}"]
    if e_ccsd is not None:
        parts.append(f"e_ccsd={e_ccsd:.10f}")
    if e_fci is not None:
        parts.append(f"e_fci={e_fci:.10f}")
    message = f"{spec.molecule}/{spec.basis}{label}: " + " ".join(parts)
    return GenerationReport(True, message, tuple(written), e_hf, e_ccsd, e_fci)

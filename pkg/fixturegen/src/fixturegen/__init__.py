"""Molecular integral fixtures: SCF, CCSD, and FCI reference data."""

from .basis import BasisError, Molecule, build_molecule
from .ccsd import CcsdError, CcsdResult, ccsd, spatial_t2
from .fci import FciError, FciResult, fci_ground, sector_dimension
from .fcidump import fcidump_text, metadata_dict, read_metadata, write_fcidump, write_metadata
from .generate import FCI_CAP, GenerationError, GenerationReport, generate_fixture
from .lucj_seed import SeedError, seed_layers, write_seed
from .scf import ScfError, ScfResult, fold_active, hf_in_active, mo_transform, rhf
from .specfile import FixtureSpec, SpecError, load_spec, spec_from_dict

__all__ = [
    "BasisError", "Molecule", "build_molecule",
    "CcsdError", "CcsdResult", "ccsd", "spatial_t2",
    "FciError", "FciResult", "fci_ground", "sector_dimension",
    "fcidump_text", "metadata_dict", "read_metadata", "write_fcidump", "write_metadata",
    "FCI_CAP", "GenerationError", "GenerationReport", "generate_fixture",
    "SeedError", "seed_layers", "write_seed",
    "ScfError", "ScfResult", "fold_active", "hf_in_active", "mo_transform", "rhf",
    "FixtureSpec", "SpecError", "load_spec", "spec_from_dict",
]

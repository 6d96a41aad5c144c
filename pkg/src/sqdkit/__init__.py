"""Sample-based quantum diagonalization with half-register circuits.

The package simulates local unitary cluster Jastrow circuits over full or
half qubit registers, draws electron configurations from them, repairs
noise-corrupted shots, grows compact determinant subspaces with an
importance criterion, and diagonalizes the projected Hamiltonian. Runs are
driven either through the library API or the `sqdkit` command.
"""

from .circuits import (
    Circuit,
    GateStats,
    SectorState,
    apply_readout_noise,
    gate_stats,
    sample_state,
)
from .config import (
    MODES,
    PipelineConfig,
    SAMPLING_MODES,
    config_hash,
    load_config,
)
from .determinants import Determinant, HalfConfiguration
from .errors import (
    CapacityError,
    ConfigError,
    ConvergenceError,
    DuplicateError,
    EmptyError,
    LayoutError,
    ParseError,
    RangeError,
    SectorError,
    ShapeError,
    SqdkitError,
    StageError,
)
from .integrals import IntegralTable, parse_fcidump, write_fcidump
from .lucj import (
    LucjLayer,
    LucjParameters,
    build_full_circuit,
    build_half_circuit,
    load_parameters,
    lucj_energy,
    optimize_parameters,
    save_parameters,
    simulate_full_state,
    simulate_half_state,
)
from .pipeline import RunReport, hf_energy, run_pipeline, run_scan
from .recovery import (
    RecoveryConfig,
    RecoveryTrace,
    corrected_pool,
    recover,
    split_halves,
    tensor_subspace,
)
from .samples import SampleSet
from .selection import (
    SelectionConfig,
    SelectionResult,
    classical_hci,
    hci_criterion,
    hci_select_from_samples,
)
from .subspace import (
    DeterminantSpace,
    GroundState,
    TensorSpace,
    build_hamiltonian,
    fci_energy,
    fci_space,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "Circuit",
    "ConfigError",
    "ConvergenceError",
    "Determinant",
    "DeterminantSpace",
    "DuplicateError",
    "EmptyError",
    "GateStats",
    "GroundState",
    "HalfConfiguration",
    "IntegralTable",
    "LayoutError",
    "LucjLayer",
    "LucjParameters",
    "MODES",
    "ParseError",
    "PipelineConfig",
    "RangeError",
    "RecoveryConfig",
    "RecoveryTrace",
    "RunReport",
    "SAMPLING_MODES",
    "SampleSet",
    "SectorError",
    "SectorState",
    "SelectionConfig",
    "SelectionResult",
    "ShapeError",
    "SqdkitError",
    "StageError",
    "TensorSpace",
    "apply_readout_noise",
    "build_full_circuit",
    "build_half_circuit",
    "build_hamiltonian",
    "classical_hci",
    "config_hash",
    "corrected_pool",
    "fci_energy",
    "fci_space",
    "gate_stats",
    "hci_criterion",
    "hci_select_from_samples",
    "hf_energy",
    "load_config",
    "load_parameters",
    "lucj_energy",
    "optimize_parameters",
    "parse_fcidump",
    "recover",
    "run_pipeline",
    "run_scan",
    "sample_state",
    "save_parameters",
    "simulate_full_state",
    "simulate_half_state",
    "solve",
    "split_halves",
    "tensor_subspace",
    "write_fcidump",
]

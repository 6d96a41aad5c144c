"""End-to-end runs: circuit, samples, repair, subspace energy, plus geometry scans.

A run is described by a PipelineConfig and leaves stage artifacts in the
output directory:

    report.json     the RunReport
    samples.txt     raw sampled configurations (sampling modes)
    noisy.txt       samples after readout flips (p_flip > 0 only)
    recovery.json   occupation and energy trace of the repair loop
    pool.txt        corrected half-register pool fed to selection (hci modes)
    selection.json  iteration trace of the subspace build (hci modes)
    subspace.txt    final determinant strings, alpha register then beta

Modes:

    fci             exact diagonalization of the electron-number sector
    classical_hci   deterministic importance selection from the Hamiltonian
    sqd / hsqd      sample full / half registers, repair, take the best
                    diagonalization the repair loop produced
    hci_sqd /       sample full / half registers, repair into a corrected
    hci_hsqd        pool, then grow a compact subspace from that pool

Every stage is timed. A failing stage aborts the run with a StageError naming
the stage and chaining the cause; artifacts written before the failure stay on
disk. The reference energy is exact diagonalization when the sector fits the
capacity cap, otherwise classical selection at the same threshold
(reference = "auto"); error_ha is final minus reference.
"""

from __future__ import annotations

import dataclasses
import json
import time
from contextlib import contextmanager
from math import comb
from pathlib import Path

import numpy as np

from .circuits import apply_readout_noise, gate_stats, sample_state
from .config import PipelineConfig, config_hash, validate_for_run
from .errors import ConfigError, LayoutError, SectorError, StageError
from .excitations import engine_for
from .integrals import IntegralTable, parse_fcidump
from .lucj import (
    build_full_circuit,
    build_half_circuit,
    load_parameters,
    simulate_full_state,
    simulate_half_state,
)
from .recovery import corrected_pool, recover
from .samples import SampleSet
from .selection import SelectionResult, classical_hci, hci_select_from_samples
from .subspace import FCI_SPACE_CAP, fci_energy

HALF_MODES = ("hsqd", "hci_hsqd")
SCAN_HEADER = "geometry,mode,energy_ha,error_ha,subspace_size,shots,valid_fraction"


def hf_energy(table: IntegralTable) -> float:
    """Energy of the aufbau reference determinant (lowest orbitals filled)."""
    a = np.array([(1 << table.n_alpha) - 1], dtype=np.int64)
    b = np.array([(1 << table.n_beta) - 1], dtype=np.int64)
    return float(engine_for(table).diagonal_batch(a, b)[0])


def sector_dimension(table: IntegralTable) -> int:
    return comb(table.norb, table.n_alpha) * comb(table.norb, table.n_beta)


@dataclasses.dataclass
class RunReport:
    """Everything a finished run reports; serializes to stable JSON."""

    mode: str
    energies: dict
    subspace_sizes: dict
    shots: int | None
    valid_fraction: float | None
    stop_reason: str | None
    gate_stats: dict | None
    error_ha: float | None
    wallclock: dict
    provenance: dict

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "RunReport":
        return cls(**json.loads(Path(path).read_text()))


def _stats_dict(circuit) -> dict:
    st = gate_stats(circuit)
    return {
        "n_qubits": st.n_qubits,
        "one_qubit": st.one_qubit,
        "two_qubit": st.two_qubit,
        "depth": st.depth,
        "counts": dict(sorted(st.counts.items())),
    }


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_selection(outdir: Path, result: SelectionResult) -> None:
    """selection.json (iteration trace) and subspace.txt (determinant strings)."""
    payload = result.to_dict()
    _write_json(outdir / "selection.json", payload)
    (outdir / "subspace.txt").write_text("\n".join(payload["subspace"]) + "\n")


@contextmanager
def _stage(name: str, wallclock: dict):
    t0 = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    finally:
        wallclock[name] = time.perf_counter() - t0


def draw_samples(cfg: PipelineConfig, table: IntegralTable, outdir: Path,
                 wallclock: dict) -> tuple[SampleSet, dict | None]:
    """Circuit, statevector, and shots for a sampling mode; returns (samples, gate stats)."""
    half = cfg.mode in HALF_MODES
    with _stage("circuit", wallclock):
        params = load_parameters(cfg.params)
        if params.norb != table.norb:
            raise LayoutError(
                f"parameters cover {params.norb} orbitals, integrals {table.norb}"
            )
        circuit = build_half_circuit(params) if half else build_full_circuit(params)
        stats = _stats_dict(circuit)
    with _stage("simulate", wallclock):
        if half:
            if table.n_alpha != table.n_beta:
                raise SectorError(
                    "half-register sampling shares one circuit between spins; "
                    f"needs n_alpha == n_beta, got {table.n_alpha} and {table.n_beta}"
                )
            state = simulate_half_state(params, table.n_alpha)
        else:
            state = simulate_full_state(params, table.n_alpha, table.n_beta)
    with _stage("sample", wallclock):
        samples = sample_state(state, cfg.shots, seed=cfg.seed)
        samples.save(outdir / "samples.txt")
    return samples, stats


def _ingest_samples(cfg: PipelineConfig, table: IntegralTable, wallclock: dict) -> SampleSet:
    with _stage("ingest", wallclock):
        samples = SampleSet.load(cfg.samples)
        want = table.norb if cfg.mode in HALF_MODES else 2 * table.norb
        if samples.width != want:
            raise LayoutError(
                f"mode {cfg.mode!r} expects register width {want}, file has {samples.width}"
            )
    return samples


def _reference_energy(cfg: PipelineConfig, table: IntegralTable) -> float | None:
    if cfg.reference == "none":
        return None
    if cfg.reference == "fci":
        return float(fci_energy(table).energy)
    if cfg.reference == "hci":
        return float(classical_hci(table, cfg.selection).ground.energy)
    if sector_dimension(table) <= FCI_SPACE_CAP:
        return float(fci_energy(table).energy)
    return float(classical_hci(table, cfg.selection).ground.energy)


def run_pipeline(cfg: PipelineConfig) -> RunReport:
    """Run every stage the mode asks for; writes artifacts and the report."""
    validate_for_run(cfg)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    wallclock: dict[str, float] = {}
    energies: dict[str, float] = {}
    sizes: dict[str, int] = {}
    stats = None
    shots = None
    valid_fraction = None
    stop_reason = None

    with _stage("parse", wallclock):
        table = parse_fcidump(cfg.fcidump)
        energies["hf"] = hf_energy(table)

    if cfg.mode == "fci":
        with _stage("solve", wallclock):
            ground = fci_energy(table)
        energies["final"] = float(ground.energy)
        sizes["final"] = int(ground.space.size)
    elif cfg.mode == "classical_hci":
        with _stage("select", wallclock):
            result = classical_hci(table, cfg.selection)
            write_selection(outdir, result)
        energies["final"] = float(result.ground.energy)
        sizes["final"] = int(result.subspace.size)
        stop_reason = result.stop_reason
    else:
        if cfg.samples is not None:
            samples = _ingest_samples(cfg, table, wallclock)
        else:
            samples, stats = draw_samples(cfg, table, outdir, wallclock)
        shots = samples.shots

        noisy = samples
        if cfg.p_flip > 0:
            with _stage("noise", wallclock):
                noisy = apply_readout_noise(samples, cfg.p_flip, seed=cfg.seed + 1)
                noisy.save(outdir / "noisy.txt")

        with _stage("recover", wallclock):
            n_ref, best, trace = recover(noisy, table, cfg.recovery)
            _write_json(outdir / "recovery.json", trace.to_dict())
        valid_fraction = float(trace.cycles[0].valid_fraction)
        energies["recover"] = float(best.energy)
        sizes["recover"] = int(best.space.size)

        if cfg.mode in ("sqd", "hsqd"):
            energies["final"] = float(best.energy)
            sizes["final"] = int(best.space.size)
        else:
            with _stage("pool", wallclock):
                pool = corrected_pool(noisy, table, n_ref, seed=cfg.seed)
                pool.save(outdir / "pool.txt")
            with _stage("select", wallclock):
                result = hci_select_from_samples(pool, table, cfg.selection)
                write_selection(outdir, result)
            energies["final"] = float(result.ground.energy)
            sizes["final"] = int(result.subspace.size)
            stop_reason = result.stop_reason

    error_ha = None
    with _stage("reference", wallclock):
        if cfg.mode == "fci":
            e_ref = energies["final"]  # the run itself is the reference method
        else:
            e_ref = _reference_energy(cfg, table)
        if e_ref is not None:
            energies["reference"] = float(e_ref)
            error_ha = float(energies["final"] - e_ref)

    report = RunReport(
        mode=cfg.mode,
        energies=energies,
        subspace_sizes=sizes,
        shots=shots,
        valid_fraction=valid_fraction,
        stop_reason=stop_reason,
        gate_stats=stats,
        error_ha=error_ha,
        wallclock=wallclock,
        provenance={
            "seed": cfg.seed,
            "config_hash": config_hash(cfg),
            "stage_seeds": {
                "sample": cfg.seed,
                "noise": cfg.seed + 1,
                "recovery": cfg.recovery.seed,
                "pool": cfg.seed,
            },
        },
    )
    report.save(outdir / "report.json")
    return report


def _scan_labels(fcidumps) -> list[str]:
    labels, seen = [], {}
    for path in fcidumps:
        stem = Path(path).stem
        k = seen.get(stem, 0)
        seen[stem] = k + 1
        labels.append(stem if k == 0 else f"{stem}_{k}")
    return labels


def _csv_row(label: str, mode: str, report: RunReport | None) -> str:
    if report is None:
        return f"{label},{mode},,,,,"
    return ",".join([
        label,
        mode,
        f"{report.energies['final']:.12f}",
        "" if report.error_ha is None else f"{report.error_ha:.12f}",
        str(report.subspace_sizes.get("final", "")),
        "" if report.shots is None else str(report.shots),
        "" if report.valid_fraction is None else f"{report.valid_fraction:.6f}",
    ])


def run_scan(cfg: PipelineConfig, fcidumps, outdir=None) -> list[dict]:
    """One pipeline run per integral file; failures are recorded, the scan continues.

    Each geometry runs in its own subdirectory of the scan output directory.
    Writes scan.csv (one row per geometry, empty numeric fields on failure)
    and scan.json (per-geometry status). Runs are sequential and independent,
    so results do not depend on how many of them fail.
    """
    if not fcidumps:
        raise ConfigError("scan needs at least one integral file")
    root = Path(cfg.outdir if outdir is None else outdir)
    root.mkdir(parents=True, exist_ok=True)

    rows, statuses = [], []
    for label, path in zip(_scan_labels(fcidumps), fcidumps):
        sub = dataclasses.replace(cfg, fcidump=str(path), outdir=str(root / label))
        try:
            report = run_pipeline(sub)
        except (ConfigError, StageError) as exc:
            statuses.append({"geometry": label, "status": "failed", "error": str(exc)})
            rows.append(_csv_row(label, sub.mode, None))
            continue
        statuses.append({
            "geometry": label,
            "status": "ok",
            "report": str(root / label / "report.json"),
        })
        rows.append(_csv_row(label, sub.mode, report))

    (root / "scan.csv").write_text(SCAN_HEADER + "\n" + "\n".join(rows) + "\n")
    _write_json(root / "scan.json", {"statuses": statuses})
    return statuses

"""Command line front end: full runs plus every stage standalone.

    sqdkit parse      FCIDUMP                         integral file summary
    sqdkit fci        FCIDUMP [--out DIR]             exact sector ground state
    sqdkit hci        FCIDUMP [--config F] [--out]    classical selection
    sqdkit gate-stats PARAMS                          full vs half circuit cost
    sqdkit sample     --config F [overrides]          draw shots from the circuit
    sqdkit recover    --config F [--samples F] [...]  repair shots, emit the pool
    sqdkit select     --config F [--samples F] [...]  grow a subspace from a pool
    sqdkit pipeline   --config F [overrides]          every stage for the mode
    sqdkit scan       --config F FCIDUMP... [--out]   one run per geometry

Overrides --seed --out --mode --shots --p-flip replace the corresponding
config values; --out maps to the output directory. Exit codes: 0 success,
2 configuration problem, 3 stage failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import SAMPLING_MODES, PipelineConfig, load_config
from .errors import ConfigError, LayoutError, SqdkitError, StageError
from .integrals import parse_fcidump
from .lucj import build_full_circuit, build_half_circuit, load_parameters
from .pipeline import (
    draw_samples,
    hf_energy,
    run_pipeline,
    run_scan,
    sector_dimension,
    write_selection,
)
from .recovery import corrected_pool, recover, split_halves
from .samples import SampleSet
from .selection import SelectionConfig, classical_hci, hci_select_from_samples
from .subspace import fci_energy


def _require_file(path, what: str) -> str:
    if not Path(path).is_file():
        raise ConfigError(f"{what} file not found: {path}")
    return str(path)


def _overrides(args) -> dict:
    out = {}
    for flag, key in (("seed", "seed"), ("out", "outdir"), ("mode", "mode"),
                      ("shots", "shots"), ("p_flip", "p_flip"), ("samples", "samples")):
        val = getattr(args, flag, None)
        if val is not None:
            out[key] = val
    return out


def _load(args) -> PipelineConfig:
    return load_config(_require_file(args.config, "config"), overrides=_overrides(args))


def _outdir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_parse(args) -> int:
    table = parse_fcidump(_require_file(args.fcidump, "fcidump"))
    print(f"norb={table.norb} nelec={table.nelec} ms2={table.ms2}")
    print(f"n_alpha={table.n_alpha} n_beta={table.n_beta} sector_dim={sector_dimension(table)}")
    print(f"e_core={table.e_core:.12f} h1_entries={len(table.h1)} h2_entries={len(table.h2)}")
    print(f"hf_ha={hf_energy(table):.12f}")
    return 0


def cmd_fci(args) -> int:
    table = parse_fcidump(_require_file(args.fcidump, "fcidump"))
    ground = fci_energy(table)
    print(f"energy_ha={ground.energy:.12f}")
    print(f"dimension={ground.space.size}")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "fci.json").write_text(json.dumps({
            "energy_ha": float(ground.energy),
            "dimension": int(ground.space.size),
            "hf_ha": hf_energy(table),
        }, indent=2, sort_keys=True) + "\n")
        print(f"wrote {out / 'fci.json'}")
    return 0


def cmd_hci(args) -> int:
    table = parse_fcidump(_require_file(args.fcidump, "fcidump"))
    sel = load_config(_require_file(args.config, "config")).selection \
        if args.config is not None else SelectionConfig()
    result = classical_hci(table, sel)
    print(f"energy_ha={result.ground.energy:.12f}")
    print(f"subspace_size={result.subspace.size}")
    print(f"stop_reason={result.stop_reason}")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_selection(out, result)
        print(f"wrote {out / 'selection.json'}")
    return 0


def cmd_gate_stats(args) -> int:
    params = load_parameters(_require_file(args.params, "params"))
    from .circuits import gate_stats

    full = gate_stats(build_full_circuit(params))
    half = gate_stats(build_half_circuit(params))
    for name, st in (("full", full), ("half", half)):
        print(f"{name} n_qubits={st.n_qubits} one_qubit={st.one_qubit} "
              f"two_qubit={st.two_qubit} depth={st.depth}")
    print(f"qubit_ratio={half.n_qubits / full.n_qubits:.6f}")
    ratio = half.two_qubit / full.two_qubit if full.two_qubit else float("nan")
    print(f"two_qubit_ratio={ratio:.6f}")
    return 0


def cmd_sample(args) -> int:
    cfg = _load(args)
    if cfg.mode not in SAMPLING_MODES:
        raise ConfigError(f"mode {cfg.mode!r} does not sample")
    if cfg.params is None:
        raise ConfigError("sample needs a params file in the config")
    if cfg.fcidump is None:
        raise ConfigError("no fcidump given")
    table = parse_fcidump(cfg.fcidump)
    samples, _ = draw_samples(cfg, table, _outdir(cfg), {})
    print(f"shots={samples.shots} distinct={samples.n_distinct} width={samples.width}")
    print(f"wrote {Path(cfg.outdir) / 'samples.txt'}")
    return 0


def cmd_recover(args) -> int:
    cfg = _load(args)
    if cfg.samples is None:
        raise ConfigError("recover needs a samples file (config key or --samples)")
    if cfg.fcidump is None:
        raise ConfigError("no fcidump given")
    table = parse_fcidump(cfg.fcidump)
    samples = SampleSet.load(cfg.samples)
    out = _outdir(cfg)
    n, best, trace = recover(samples, table, cfg.recovery)
    pool = corrected_pool(samples, table, n, seed=cfg.seed)
    (out / "recovery.json").write_text(json.dumps(trace.to_dict(), indent=2, sort_keys=True) + "\n")
    pool.save(out / "pool.txt")
    print(f"energy_ha={best.energy:.12f}")
    print(f"valid_fraction={trace.cycles[0].valid_fraction:.6f}")
    print(f"pool_distinct={pool.n_distinct}")
    print(f"wrote {out / 'recovery.json'} and {out / 'pool.txt'}")
    return 0


def cmd_select(args) -> int:
    cfg = _load(args)
    if cfg.samples is None:
        raise ConfigError("select needs a pool file (config key or --samples)")
    if cfg.fcidump is None:
        raise ConfigError("no fcidump given")
    table = parse_fcidump(cfg.fcidump)
    pool = SampleSet.load(cfg.samples)
    if pool.width == 2 * table.norb:
        pool = split_halves(pool, table.norb)  # full-register shots contribute both spins
    elif pool.width != table.norb:
        raise LayoutError(
            f"pool width {pool.width} matches neither {table.norb} nor {2 * table.norb}"
        )
    result = hci_select_from_samples(pool, table, cfg.selection)
    out = _outdir(cfg)
    write_selection(out, result)
    print(f"energy_ha={result.ground.energy:.12f}")
    print(f"subspace_size={result.subspace.size}")
    print(f"stop_reason={result.stop_reason}")
    print(f"wrote {out / 'selection.json'} and {out / 'subspace.txt'}")
    return 0


def cmd_pipeline(args) -> int:
    cfg = _load(args)
    report = run_pipeline(cfg)
    print(f"mode={report.mode}")
    print(f"energy_ha={report.energies['final']:.12f}")
    if "reference" in report.energies:
        print(f"reference_ha={report.energies['reference']:.12f}")
        print(f"error_ha={report.error_ha:.12f}")
    if "final" in report.subspace_sizes:
        print(f"subspace_size={report.subspace_sizes['final']}")
    if report.stop_reason is not None:
        print(f"stop_reason={report.stop_reason}")
    print(f"wrote {Path(cfg.outdir) / 'report.json'}")
    return 0


def cmd_scan(args) -> int:
    cfg = _load(args)
    for path in args.fcidumps:
        _require_file(path, "fcidump")
    statuses = run_scan(cfg, args.fcidumps)
    failed = 0
    for st in statuses:
        if st["status"] == "ok":
            print(f"{st['geometry']} ok {st['report']}")
        else:
            failed += 1
            print(f"{st['geometry']} failed: {st['error']}")
    print(f"wrote {Path(cfg.outdir) / 'scan.csv'}")
    return 3 if failed else 0


def _add_overrides(p: argparse.ArgumentParser, samples: bool = False) -> None:
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory (overrides outdir)")
    p.add_argument("--mode", default=None)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--p-flip", dest="p_flip", type=float, default=None)
    if samples:
        p.add_argument("--samples", default=None, help="samples/pool file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqdkit",
        description="Sampled-subspace ground-state energies from simulated circuits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="summarize an integral file")
    p.add_argument("fcidump")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("fci", help="exact ground state of the sector")
    p.add_argument("fcidump")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fci)

    p = sub.add_parser("hci", help="classical importance selection")
    p.add_argument("fcidump")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_hci)

    p = sub.add_parser("gate-stats", help="full vs half circuit cost")
    p.add_argument("params")
    p.set_defaults(func=cmd_gate_stats)

    p = sub.add_parser("sample", help="draw shots from the configured circuit")
    p.add_argument("--config", required=True)
    _add_overrides(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("recover", help="repair shots and emit the corrected pool")
    p.add_argument("--config", required=True)
    _add_overrides(p, samples=True)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("select", help="grow a subspace from a sampled pool")
    p.add_argument("--config", required=True)
    _add_overrides(p, samples=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("pipeline", help="run every stage for the configured mode")
    p.add_argument("--config", required=True)
    _add_overrides(p, samples=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("scan", help="one pipeline run per integral file")
    p.add_argument("--config", required=True)
    p.add_argument("fcidumps", nargs="+")
    _add_overrides(p)
    p.set_defaults(func=cmd_scan)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SqdkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())

"""Command line behavior: subcommands, overrides, exit codes."""

import json

import pytest

from sqdkit.cli import main
from sqdkit.integrals import parse_fcidump
from sqdkit.samples import SampleSet
from sqdkit.subspace import fci_energy
from tests.oracles import random_table


def _kv(capsys) -> dict:
    """key=value tokens from captured stdout."""
    out = {}
    for line in capsys.readouterr().out.splitlines():
        for token in line.split():
            if "=" in token:
                key, _, val = token.partition("=")
                out[key] = val
    return out


def _write_config(path, body: str) -> str:
    path.write_text(body)
    return str(path)


def test_parse_summarizes_integrals(toy_workspace, capsys):
    assert main(["parse", str(toy_workspace / "toy.fcidump")]) == 0
    got = _kv(capsys)
    assert got["norb"] == "3" and got["nelec"] == "2" and got["sector_dim"] == "9"
    assert "hf_ha" in got


def test_fci_prints_energy_and_writes_report(toy_workspace, tmp_path, capsys):
    out = tmp_path / "fciout"
    assert main(["fci", str(toy_workspace / "toy.fcidump"), "--out", str(out)]) == 0
    exact = fci_energy(random_table(3, 2, seed=7)).energy
    assert float(_kv(capsys)["energy_ha"]) == pytest.approx(exact, abs=1e-9)
    payload = json.loads((out / "fci.json").read_text())
    assert payload["dimension"] == 9
    assert payload["energy_ha"] == pytest.approx(exact, abs=1e-12)


def test_hci_honors_config_selection(toy_workspace, tmp_path, capsys):
    out = tmp_path / "hciout"
    cfgfile = _write_config(tmp_path / "sel.toml", "[selection]\nepsilon1 = 1e3\n")
    assert main(["hci", str(toy_workspace / "toy.fcidump"),
                 "--config", cfgfile, "--out", str(out)]) == 0
    got = _kv(capsys)
    assert got["subspace_size"] == "1"  # a huge threshold keeps only the root
    assert got["stop_reason"] == "exhausted"
    assert (out / "selection.json").is_file() and (out / "subspace.txt").is_file()

    assert main(["hci", str(toy_workspace / "toy.fcidump")]) == 0
    assert _kv(capsys)["subspace_size"] == "9"  # defaults saturate the toy sector


def test_gate_stats_compares_register_layouts(toy_workspace, capsys):
    assert main(["gate-stats", str(toy_workspace / "rand_params.json")]) == 0
    got = _kv(capsys)
    assert float(got["qubit_ratio"]) == 0.5
    assert 0.0 < float(got["two_qubit_ratio"]) < 1.0
    out_lines = set(got)
    assert {"qubit_ratio", "two_qubit_ratio"} <= out_lines


def test_stage_chain_sample_recover_select(toy_workspace, tmp_path, capsys):
    """samples.txt -> recovery pool -> selection, each through its own subcommand."""
    stage1, stage2, stage3 = (tmp_path / n for n in ("s1", "s2", "s3"))
    cfgfile = _write_config(tmp_path / "run.toml", f"""
fcidump = "{toy_workspace / 'toy.fcidump'}"
params = "{toy_workspace / 'rand_params.json'}"
mode = "hci_sqd"
shots = 2000
p_flip = 0.04
seed = 3

[recovery]
mode = "sccr"
cycles = 2
batches = 2
batch_size = 6

[selection]
epsilon1 = 1e-8
""")
    assert main(["sample", "--config", cfgfile, "--out", str(stage1)]) == 0
    assert SampleSet.load(stage1 / "samples.txt").width == 6

    assert main(["recover", "--config", cfgfile, "--out", str(stage2),
                 "--samples", str(stage1 / "samples.txt")]) == 0
    got = _kv(capsys)
    assert float(got["valid_fraction"]) == 1.0  # the sampler itself is noise-free
    pool = SampleSet.load(stage2 / "pool.txt")
    assert pool.width == 3

    assert main(["select", "--config", cfgfile, "--out", str(stage3),
                 "--samples", str(stage2 / "pool.txt")]) == 0
    got = _kv(capsys)
    exact = fci_energy(random_table(3, 2, seed=7)).energy
    assert float(got["energy_ha"]) >= exact - 1e-9
    assert (stage3 / "subspace.txt").is_file()


def test_select_splits_full_width_samples(toy_workspace, tmp_path, capsys):
    SampleSet(6, {"100100": 10, "010010": 3}).save(tmp_path / "full.txt")
    cfgfile = _write_config(tmp_path / "sel.toml", f"""
fcidump = "{toy_workspace / 'toy.fcidump'}"
mode = "classical_hci"
samples = "full.txt"
""")
    assert main(["select", "--config", cfgfile, "--out", str(tmp_path / "out")]) == 0
    lines = (tmp_path / "out" / "subspace.txt").read_text().splitlines()
    assert all(len(line) == 6 for line in lines)
    assert int(_kv(capsys)["subspace_size"]) == len(lines)


def test_pipeline_flags_override_config(toy_workspace, tmp_path, capsys):
    cfgfile = _write_config(tmp_path / "run.toml", f"""
fcidump = "{toy_workspace / 'toy.fcidump'}"
params = "{toy_workspace / 'rand_params.json'}"
mode = "hsqd"
shots = 400
seed = 1
outdir = "ignored"

[recovery]
mode = "valid_occ_0C"
cycles = 1
""")
    out = tmp_path / "noisy_run"
    assert main(["pipeline", "--config", cfgfile, "--out", str(out),
                 "--p-flip", "0.25", "--shots", "600", "--seed", "9"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["shots"] == 600
    assert report["valid_fraction"] < 1.0
    assert report["provenance"]["seed"] == 9
    assert (out / "noisy.txt").is_file()
    assert "energy_ha" in _kv(capsys)


def test_scan_reports_each_geometry(toy_workspace, tmp_path, capsys):
    cfgfile = _write_config(tmp_path / "run.toml", 'mode = "fci"\n')
    out = tmp_path / "scanout"
    rc = main(["scan", "--config", cfgfile, "--out", str(out),
               str(toy_workspace / "toy.fcidump"), str(toy_workspace / "toy2.fcidump")])
    assert rc == 0
    lines = (out / "scan.csv").read_text().splitlines()
    assert len(lines) == 3
    printed = capsys.readouterr().out
    assert "toy ok" in printed and "toy2 ok" in printed

    broken = tmp_path / "broken.fcidump"
    broken.write_text("&FCI NORB=banana\n")
    rc = main(["scan", "--config", cfgfile, "--out", str(tmp_path / "scan2"),
               str(toy_workspace / "toy.fcidump"), str(broken)])
    assert rc == 3  # a failed geometry surfaces in the exit code
    lines = (tmp_path / "scan2" / "scan.csv").read_text().splitlines()
    assert len(lines) == 3 and lines[2].startswith("broken,fci,,")


def test_exit_code_two_for_config_problems(toy_workspace, tmp_path, capsys):
    assert main(["pipeline", "--config", str(tmp_path / "ghost.toml")]) == 2
    bad = _write_config(tmp_path / "bad.toml", 'mode = "warp"\n')
    assert main(["pipeline", "--config", bad]) == 2
    syntax = _write_config(tmp_path / "syntax.toml", "x = [1,\n")
    assert main(["pipeline", "--config", syntax]) == 2
    nofile = _write_config(tmp_path / "nofile.toml", 'fcidump = "ghost.fcidump"\nmode = "fci"\n')
    assert main(["pipeline", "--config", nofile]) == 2
    ok_but_wrong_mode = _write_config(
        tmp_path / "m.toml", f'fcidump = "{toy_workspace / "toy.fcidump"}"\nmode = "fci"\n')
    assert main(["sample", "--config", ok_but_wrong_mode]) == 2
    assert "config error" in capsys.readouterr().err


def test_exit_code_three_for_stage_failures(toy_workspace, tmp_path, capsys):
    broken = tmp_path / "broken.fcidump"
    broken.write_text("&FCI NORB=banana\n")
    assert main(["fci", str(broken)]) == 3
    assert main(["parse", str(broken)]) == 3

    mismatched = _write_config(tmp_path / "mm.toml", f"""
fcidump = "{toy_workspace / 'toy.fcidump'}"
params = "{toy_workspace / 'small_params.json'}"
mode = "sqd"
""")
    assert main(["pipeline", "--config", mismatched, "--out", str(tmp_path / "out")]) == 3
    err = capsys.readouterr().err
    assert "circuit" in err  # the failing stage is named

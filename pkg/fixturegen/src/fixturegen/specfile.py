"""Fixture specification files: JSON schema, parsing, validation.

A spec names one molecule at one geometry and the artifacts to emit:

    {
      "molecule": "n2",
      "bond_label": "1.10",
      "geometry": [["N", 0.0, 0.0, 0.0], ["N", 0.0, 0.0, 1.10]],
      "basis": "6-31g",
      "active_space": [10, 12],
      "outputs": {
        "fcidump": "n2_631g_1.10.fcidump",
        "metadata": "n2_631g_1.10.metadata.json",
        "lucj_params": "n2_631g_1.10.lucj.json"
      },
      "lucj": {"scale": 1.0, "max_layers": 8, "k2_mix": 0.26}
    }

Coordinates are angstrom. Output paths are relative and are resolved under
the --out directory at generation time; "lucj_params" and the "lucj" block
are optional. Validation here is purely structural - checks that need the
built molecule (active space vs basis size) happen at generation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import PurePosixPath


class SpecError(ValueError):
    """Malformed or inconsistent fixture specification."""


@dataclass(frozen=True)
class FixtureSpec:
    molecule: str
    bond_label: str
    geometry: tuple
    basis: str
    ne_active: int
    no_active: int
    fcidump_out: str
    metadata_out: str
    lucj_out: str | None
    lucj_scale: float
    lucj_max_layers: int
    lucj_k2_mix: float


def _relative_path(value, what: str) -> str:
    if not isinstance(value, str) or not value:
        raise SpecError(f"{what} must be a non-empty string")
    p = PurePosixPath(value)
    if p.is_absolute() or ".." in p.parts:
        raise SpecError(f"{what} must be a relative path without '..', got {value!r}")
    return value


def spec_from_dict(data: dict) -> FixtureSpec:
    if not isinstance(data, dict):
        raise SpecError("spec must be a JSON object")
    for key in ("molecule", "geometry", "basis", "active_space", "outputs"):
        if key not in data:
            raise SpecError(f"spec is missing {key!r}")

    molecule = data["molecule"]
    if not isinstance(molecule, str) or not molecule:
        raise SpecError("molecule must be a non-empty string")
    basis = data["basis"]
    if not isinstance(basis, str) or not basis:
        raise SpecError("basis must be a non-empty string")
    bond_label = data.get("bond_label", "")
    if not isinstance(bond_label, str):
        raise SpecError("bond_label must be a string")

    raw_geo = data["geometry"]
    if not isinstance(raw_geo, list) or not raw_geo:
        raise SpecError("geometry must be a non-empty list")
    geometry = []
    for idx, row in enumerate(raw_geo):
        if not isinstance(row, list) or len(row) != 4 or not isinstance(row[0], str):
            raise SpecError(f"geometry[{idx}] must be [element, x, y, z]")
        try:
            geometry.append((row[0], float(row[1]), float(row[2]), float(row[3])))
        except (TypeError, ValueError):
            raise SpecError(f"geometry[{idx}] has non-numeric coordinates") from None
    for i in range(len(geometry)):
        for j in range(i):
            d2 = sum((geometry[i][k] - geometry[j][k]) ** 2 for k in (1, 2, 3))
            if d2 < 1e-12:
                raise SpecError(f"geometry is degenerate: atoms {j} and {i} coincide")

    space = data["active_space"]
    if (not isinstance(space, list) or len(space) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in space)):
        raise SpecError("active_space must be [n_electrons, n_orbitals] with integers")
    ne, no = space
    if ne <= 0 or no <= 0:
        raise SpecError(f"active_space must be positive, got {space}")
    if ne % 2:
        raise SpecError(f"active electron count must be even, got {ne}")
    if ne > 2 * no:
        raise SpecError(f"{ne} electrons do not fit in {no} orbitals")

    outputs = data["outputs"]
    if not isinstance(outputs, dict):
        raise SpecError("outputs must be an object")
    fcidump_out = _relative_path(outputs.get("fcidump"), "outputs.fcidump")
    metadata_out = _relative_path(outputs.get("metadata"), "outputs.metadata")
    lucj_out = None
    if outputs.get("lucj_params") is not None:
        lucj_out = _relative_path(outputs["lucj_params"], "outputs.lucj_params")

    lucj = data.get("lucj", {})
    if not isinstance(lucj, dict):
        raise SpecError("lucj must be an object")
    scale = float(lucj.get("scale", 1.0))
    max_layers = int(lucj.get("max_layers", 8))
    k2_mix = float(lucj.get("k2_mix", 1.0))
    if max_layers <= 0:
        raise SpecError(f"lucj.max_layers must be positive, got {max_layers}")

    return FixtureSpec(molecule, bond_label, tuple(geometry), basis, ne, no,
                       fcidump_out, metadata_out, lucj_out, scale, max_layers,
                       k2_mix)


def load_spec(path) -> FixtureSpec:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: {exc}") from None
    return spec_from_dict(data)

"""Run configuration: a small sectioned key=value reader plus the pipeline record.

Config files use TOML-style sections::

    [pipeline]
    fcidump = "h4.fcidump"
    mode = "hci_hsqd"
    shots = 100000

    [recovery]
    mode = "sccr"
    cycles = 9

    [selection]
    epsilon1 = 1e-5

Keys before the first header belong to [pipeline]. Values are quoted strings,
integers, floats, true/false, or flat [a, b, c] lists on a single line; `#`
starts a comment outside quotes. Paths in the file resolve relative to the
file's directory; paths given as overrides (command-line flags) are taken
as-is.

Every random stage derives its stream from the single pipeline seed, so a
`seed` key inside [recovery] is rejected.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, ParseError, RangeError
from .recovery import RecoveryConfig
from .selection import SelectionConfig

MODES = ("fci", "classical_hci", "hsqd", "sqd", "hci_hsqd", "hci_sqd")
SAMPLING_MODES = ("hsqd", "sqd", "hci_hsqd", "hci_sqd")
REFERENCES = ("auto", "fci", "hci", "none")

_KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

_PIPELINE_TYPES = {
    "fcidump": str,
    "params": str,
    "samples": str,
    "mode": str,
    "shots": int,
    "p_flip": float,
    "seed": int,
    "outdir": str,
    "reference": str,
}
_RECOVERY_TYPES = {
    "mode": str,
    "cycles": int,
    "batches": int,
    "batch_size": int,
    "pool_size": int,
    "delta": float,
}
_SELECTION_TYPES = {
    "epsilon1": float,
    "target_size": int,
    "energy_tol": float,
    "min_new": int,
    "max_iters": int,
    "signed": bool,
}
_PATH_KEYS = ("fcidump", "params", "samples", "outdir")


@dataclass
class PipelineConfig:
    """Everything one run needs; scalar checks happen at construction."""

    fcidump: str | None = None
    mode: str = "hci_hsqd"
    params: str | None = None
    samples: str | None = None
    shots: int = 100_000
    p_flip: float = 0.0
    seed: int = 0
    outdir: str = "out"
    reference: str = "auto"
    recovery: RecoveryConfig = field(default_factory=RecoveryConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if self.reference not in REFERENCES:
            raise ConfigError(f"unknown reference {self.reference!r}, expected one of {REFERENCES}")
        if self.shots < 1:
            raise ConfigError(f"shots must be >= 1, got {self.shots}")
        if not 0.0 <= self.p_flip < 1.0:
            raise ConfigError(f"p_flip must lie in [0, 1), got {self.p_flip}")
        # one seed rules every stream
        self.recovery = dataclasses.replace(self.recovery, seed=self.seed)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def config_hash(cfg: PipelineConfig) -> str:
    """sha256 over the canonical JSON of everything that affects the result."""
    payload = cfg.to_dict()
    payload.pop("outdir")  # where artifacts land does not change them
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# ---- text format ----

def _strip_comment(line: str) -> str:
    out = []
    quote = None
    for ch in line:
        if quote:
            out.append(ch)
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
            out.append(ch)
        elif ch == "#":
            break
        else:
            out.append(ch)
    return "".join(out).strip()


def _split_commas(body: str, lineno: int) -> list[str]:
    items, depth_quote, start = [], None, 0
    for i, ch in enumerate(body):
        if depth_quote:
            if ch == depth_quote:
                depth_quote = None
        elif ch in "\"'":
            depth_quote = ch
        elif ch == ",":
            items.append(body[start:i])
            start = i + 1
    if depth_quote:
        raise ParseError("unterminated string in list", line=lineno)
    items.append(body[start:])
    return items


def _parse_scalar(tok: str, lineno: int):
    if len(tok) >= 2 and tok[0] in "\"'" and tok[-1] == tok[0]:
        inner = tok[1:-1]
        if tok[0] in inner:
            raise ParseError(f"stray quote in string {tok}", line=lineno)
        return inner
    if tok == "true":
        return True
    if tok == "false":
        return False
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"cannot parse value {tok!r}", line=lineno) from None


def _parse_value(tok: str, lineno: int):
    if tok.startswith("["):
        if not tok.endswith("]"):
            raise ParseError("unterminated list (lists must fit on one line)", line=lineno)
        body = tok[1:-1].strip()
        if not body:
            return []
        return [_parse_scalar(t.strip(), lineno) for t in _split_commas(body, lineno)]
    return _parse_scalar(tok, lineno)


def parse_config_text(text: str) -> dict[str, dict]:
    """Sections of typed key/value pairs; bare leading keys land in 'pipeline'."""
    sections: dict[str, dict] = {"pipeline": {}}
    seen_headers: set[str] = set()
    current = "pipeline"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError("malformed section header", line=lineno)
            name = line[1:-1].strip()
            if not _KEY_RE.match(name):
                raise ParseError(f"bad section name {name!r}", line=lineno)
            if name in seen_headers:
                raise ParseError(f"duplicate section [{name}]", line=lineno)
            seen_headers.add(name)
            current = name
            sections.setdefault(name, {})
            continue
        key, eq, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not eq or not _KEY_RE.match(key):
            raise ParseError(f"expected key = value, got {raw.strip()!r}", line=lineno)
        if not val:
            raise ParseError(f"missing value for {key!r}", line=lineno)
        if key in sections[current]:
            raise ParseError(f"duplicate key {key!r} in [{current}]", line=lineno)
        sections[current][key] = _parse_value(val, lineno)
    return sections


# ---- assembly ----

def _typed(section: str, key: str, val, want: type):
    if want is float and type(val) is int:
        return float(val)
    if type(val) is not want:
        raise ConfigError(f"[{section}] {key}: expected {want.__name__}, got {val!r}")
    return val


def _section_kwargs(sections: dict, name: str, types: dict) -> dict:
    out = {}
    for key, val in sections.get(name, {}).items():
        if key not in types:
            raise ConfigError(f"unknown key {key!r} in [{name}]")
        out[key] = _typed(name, key, val, types[key])
    return out


def build_config(sections: dict, base_dir=None, overrides: dict | None = None) -> PipelineConfig:
    """Assemble and validate a PipelineConfig from parsed sections."""
    unknown = set(sections) - {"pipeline", "recovery", "selection"}
    if unknown:
        raise ConfigError(f"unknown section(s): {sorted(unknown)}")
    if "seed" in sections.get("recovery", {}):
        raise ConfigError("[recovery] seed: the pipeline seed drives every stage")

    pipe = _section_kwargs(sections, "pipeline", _PIPELINE_TYPES)
    if base_dir is not None:
        for key in _PATH_KEYS:
            if key in pipe and not Path(pipe[key]).is_absolute():
                pipe[key] = str(Path(base_dir, pipe[key]))
    for key, val in (overrides or {}).items():
        if key not in _PIPELINE_TYPES:
            raise ConfigError(f"unknown override {key!r}")
        pipe[key] = _typed("pipeline", key, val, _PIPELINE_TYPES[key])

    try:
        recovery = RecoveryConfig(**_section_kwargs(sections, "recovery", _RECOVERY_TYPES))
        selection = SelectionConfig(**_section_kwargs(sections, "selection", _SELECTION_TYPES))
        cfg = PipelineConfig(recovery=recovery, selection=selection, **pipe)
    except RangeError as exc:
        raise ConfigError(str(exc)) from exc
    check_files(cfg)
    return cfg


def load_config(path, overrides: dict | None = None) -> PipelineConfig:
    """Read, parse, and validate a config file; any defect raises ConfigError."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        sections = parse_config_text(text)
    except ParseError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return build_config(sections, base_dir=path.parent, overrides=overrides)


def check_files(cfg: PipelineConfig) -> None:
    """Referenced input files must exist before any stage runs."""
    for key in ("fcidump", "params", "samples"):
        val = getattr(cfg, key)
        if val is not None and not Path(val).is_file():
            raise ConfigError(f"{key} file not found: {val}")


def validate_for_run(cfg: PipelineConfig) -> None:
    """Checks a full pipeline run needs beyond scalar validity."""
    if cfg.fcidump is None:
        raise ConfigError("no fcidump given")
    if cfg.mode in SAMPLING_MODES and cfg.params is None and cfg.samples is None:
        raise ConfigError(f"mode {cfg.mode!r} draws samples: give params or a samples file")
    check_files(cfg)

"""Command line front end.

    fixture-gen --spec <file> --out <dir>

Reads one fixture specification, generates the artifacts under the output
directory, and prints a one-line report per file written. Exit codes: 0
success, 2 specification or basis problem, 3 generation failure (files are
only written on success).
"""

from __future__ import annotations

import argparse
import sys

from .basis import BasisError
from .generate import GenerationError, generate_fixture
from .specfile import SpecError, load_spec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fixture-gen",
        description="Generate an FCIDUMP fixture with reference metadata.")
    parser.add_argument("--spec", required=True, help="fixture specification (JSON)")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)

    try:
        spec = load_spec(args.spec)
        report = generate_fixture(spec, args.out)
    except (SpecError, BasisError, OSError) as exc:
        print(f"fixture-gen: {exc}", file=sys.stderr)
        return 2
    except GenerationError as exc:
        print(f"fixture-gen: {exc}", file=sys.stderr)
        return 3

    if not report.ok:
        print(f"fixture-gen: {report.message}", file=sys.stderr)
        return 3
    print(report.message)
    for path in report.written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry: figure kind, input path(s), output path.

Exit codes: 0 success, 1 bad invocation or schema error, 2 render error.
"""

from __future__ import annotations

import argparse
import sys

from .figures import render_extinction, render_sweep, render_trajectories
from .io import SchemaError

KINDS = ("sweep", "trajectories", "extinction")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="sgaplots")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--input", required=True, action="append",
                        help="input CSV (repeat for extinction figures)")
    parser.add_argument("--output", required=True)
    try:
        ns = parser.parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if ns.kind == "sweep":
            if len(ns.input) != 1:
                raise SchemaError("sweep figures take exactly one input")
            path = render_sweep(ns.input[0], ns.output)
        elif ns.kind == "trajectories":
            if len(ns.input) != 1:
                raise SchemaError("trajectory figures take exactly one input")
            path = render_trajectories(ns.input[0], ns.output)
        else:
            path = render_extinction(ns.input, ns.output)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - unexpected render failure
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line experiment runner.

Subcommands: final-state, extend, probe, rate-fit, validate-potential.
Validation failures exit 2 with a machine-readable JSON line on stderr;
solver non-contraction exits 3 with the contraction report attached.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError
from .runner import run_experiment, run_rate_fit
from .solver import ContractionFailure


def _fail(kind: str, message: str, code: int, extra=None):
    payload = {"error": message, "kind": kind}
    if extra:
        payload.update(extra)
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nlslab",
                                     description="final-state NLS numerical laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("final-state", "solve the final-state problem on [S, T_max]"),
        ("extend", "solve, then extend backward and compute f_minus"),
        ("probe", "run the inequality probe suite"),
        ("validate-potential", "check the potential's admissibility bound"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="experiment config (JSON)")
        p.add_argument("--output", help="artifact directory (overrides config)")

    p = sub.add_parser("rate-fit", help="log-log rate fit of a CSV error series")
    p.add_argument("csv", help="profiles.csv (or any CSV with series/x/value_re columns)")
    p.add_argument("--series", default="err_wkm2")
    p.add_argument("--output", default=".")

    args = parser.parse_args(argv)

    try:
        if args.command == "rate-fit":
            out = run_rate_fit(args.csv, args.output, series=args.series)
            print(json.dumps(out))
            return 0
        out_dir = run_experiment(args.config, mode=args.command, output_dir=args.output)
        print(out_dir)
        return 0
    except ConfigError as exc:
        return _fail("validation", str(exc), 2)
    except ContractionFailure as exc:
        return _fail("no-contraction", str(exc), 3, {"report": exc.report.to_dict()})
    except (ValueError, OSError) as exc:
        return _fail("error", str(exc), 2)


if __name__ == "__main__":
    sys.exit(main())

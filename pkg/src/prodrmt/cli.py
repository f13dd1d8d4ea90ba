"""Command-line entry point.

Usage: prodrmt --config experiment.json [--mode M] [--seed S]
[--samples N] [--out DIR].  Flags override config-file values.  The
``verify`` mode needs no config and runs the full acceptance suite.
"""

from __future__ import annotations

import argparse
import json
import sys

import jsonschema

from . import harness


def build_parser():
    parser = argparse.ArgumentParser(
        prog="prodrmt",
        description="Exact and Monte Carlo spectral statistics of "
                    "products of random matrices.",
    )
    parser.add_argument("--config", help="JSON experiment configuration")
    parser.add_argument("--mode", choices=harness.MODES)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--samples", type=int)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    raw = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print("config error: %s" % exc, file=sys.stderr)
            return harness.EXIT_USAGE
    # Command-line overrides win over config-file values.
    for key in ("mode", "seed", "out", "samples"):
        value = getattr(args, key)
        if value is not None:
            raw[key] = value
    if "mode" not in raw:
        print("no mode given (flag --mode or config field)", file=sys.stderr)
        return harness.EXIT_USAGE
    try:
        config = harness.ExperimentConfig.from_dict(raw)
    except (jsonschema.ValidationError, ValueError) as exc:
        print("invalid configuration: %s" % exc, file=sys.stderr)
        return harness.EXIT_USAGE
    return harness.run(config)


if __name__ == "__main__":
    sys.exit(main())

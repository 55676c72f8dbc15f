"""Command-line entry: unlescore-export MANIFEST [--output PATH].

Exit codes mirror the scoring CLI: 0 success, 2 manifest/validation problems,
3 malformed JSON, 1 anything else (predictor crashes, unwritable output).
Diagnostics go to stderr; nothing is printed to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ManifestError, PredictorError
from .export import export
from .manifest import load_manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unlescore-export",
        description="Write a confidence CSV by querying an original/unlearned predictor pair.",
    )
    parser.add_argument("manifest", metavar="MANIFEST", help="export manifest (JSON)")
    parser.add_argument(
        "--output", default=None, metavar="CSV", help="override the manifest's output path"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = load_manifest(args.manifest)
        if args.output is not None:
            manifest = manifest.with_output(args.output)
        written = export(manifest)
    except json.JSONDecodeError as exc:
        print(f"parse error: {args.manifest}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        # unreadable manifest = caller's mistake; unwritable output = ours
        if getattr(exc, "filename", None) == args.manifest:
            print(f"cannot read {args.manifest}: {exc}", file=sys.stderr)
            return 2
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    except ManifestError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return 2
    except PredictorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {written}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

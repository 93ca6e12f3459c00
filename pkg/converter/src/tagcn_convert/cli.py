"""Command-line wrapper: tagcn-convert --dataset cora --in-dir D --out F."""

from __future__ import annotations

import argparse
import json
import sys

from .convert import DATASET_NAMES, UpstreamBundle, convert
from .errors import ConvertError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tagcn-convert",
        description="Convert an upstream citation-dataset pickle bundle to "
                    "the TAGCN-DATASET v1 text format",
    )
    parser.add_argument("--dataset", required=True, choices=DATASET_NAMES)
    parser.add_argument("--in-dir", required=True,
                        help="directory holding the ind.<dataset>.* files")
    parser.add_argument("--out", required=True, help="output .tagcn path")
    parser.add_argument("--val-size", type=int, default=500,
                        help="validation nodes taken directly after the "
                             "training block (standard split: 500)")
    parser.add_argument("--skip-stats-check", action="store_true",
                        help="write the file even if the statistics disagree "
                             "with the published reference numbers")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        bundle = UpstreamBundle.from_dir(args.dataset, args.in_dir)
        expected = {} if args.skip_stats_check else None
        report = convert(bundle, args.out, expected_stats=expected,
                         val_size=args.val_size)
    except ConvertError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

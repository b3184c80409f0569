"""canast command line: `extract` a corpus directory, `stats` a JSONL file."""

from __future__ import annotations

import argparse
import logging
import sys

from .corpus import emit_corpus
from .extract import LANGUAGES, ParserUnavailable
from .stats import corpus_stats


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = argparse.ArgumentParser(
        prog="canast",
        description="Parse source trees into canonical-AST JSON-lines corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract a problem-per-directory corpus")
    p.add_argument("--lang", required=True, choices=LANGUAGES)
    p.add_argument("--in", dest="in_dir", required=True, help="corpus root directory")
    p.add_argument("--out", required=True, help="output JSONL path")

    p = sub.add_parser("stats", help="summarize an emitted JSONL corpus")
    p.add_argument("--in", dest="in_file", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "extract":
            result = emit_corpus(args.in_dir, args.lang, args.out)
            print(f"records: {result.records}")
            print(f"labels: {len(result.labels)}")
            print(f"parse failures: {result.parse_failures}")
            print(f"manifest: {result.manifest_path}")
            return 0
        report = corpus_stats(args.in_file)
        for line in report.lines():
            print(line)
        return 0
    except ParserUnavailable as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except (FileNotFoundError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

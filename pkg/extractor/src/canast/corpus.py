"""Corpus emission: one directory per problem class, one JSONL out.

Layout convention (CodeNet style): corpus_root/<problem-dir>/<file>; the
directory name is the class label and its ordinal (sorted by name) becomes
the integer label. Unparsable files are counted and reported in the
manifest, never silently dropped.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .extract import LANGUAGES, ParseError, extract_ast, parser_version
from .records import record_to_line, validate_record

log = logging.getLogger(__name__)

SUFFIXES = {"python": ".py", "java": ".java"}


@dataclass
class EmitResult:
    records: int
    labels: list
    counts: list
    parse_failures: int
    manifest_path: Path


def emit_corpus(corpus_root: str | Path, language_tag: str, out: str | Path) -> EmitResult:
    if language_tag not in LANGUAGES:
        raise ValueError(f"unknown language {language_tag!r}")
    corpus_root = Path(corpus_root)
    out = Path(out)
    if not corpus_root.is_dir():
        raise FileNotFoundError(f"corpus root {corpus_root} is not a directory")
    problem_dirs = sorted(p for p in corpus_root.iterdir() if p.is_dir())
    if not problem_dirs:
        raise FileNotFoundError(f"no problem directories under {corpus_root}")

    suffix = SUFFIXES[language_tag]
    labels = [p.name for p in problem_dirs]
    counts = [0] * len(labels)
    failures = 0
    written = 0
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for label, problem in enumerate(problem_dirs):
            for path in sorted(problem.iterdir()):
                if not path.is_file() or path.suffix != suffix:
                    continue
                text = path.read_text(encoding="utf-8", errors="replace")
                try:
                    rec = extract_ast(text, language_tag)
                except ParseError as err:
                    failures += 1
                    log.warning("skipped %s: %s", path, err)
                    continue
                rec["source_id"] = f"{problem.name}/{path.name}"
                rec["label"] = label
                validate_record(rec)
                fh.write(record_to_line(rec))
                fh.write("\n")
                counts[label] += 1
                written += 1

    manifest = {
        "labels": labels,
        "counts": counts,
        "parse_failures": failures,
        "parser": parser_version(language_tag),
    }
    manifest_path = out.with_suffix(out.suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return EmitResult(
        records=written,
        labels=labels,
        counts=counts,
        parse_failures=failures,
        manifest_path=manifest_path,
    )

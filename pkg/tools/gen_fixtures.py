#!/usr/bin/env python3
"""Generate the desk-scale fixture corpus (canonical-AST JSON lines).

Synthesizes competitive-programming-style Python snippets for 20 problem
classes (100 instances each by default), parses them with the CPython ast
module, and emits one canonical record per snippet. Deliberate design:

* identifier names and constants come from pools shared across classes, so
  identifiers alone do not give the class away;
* a few class pairs differ only in one grammar node (Add/Sub, If/IfExp) or
  in how list elements group into fields (classes 18/19), keeping the task
  from saturating and making edge grouping informative;
* every instance adds 0-2 filler statements drawn from a shared pool.

Standalone on purpose: no imports from the packages under test, so the
checked-in fixtures are independent of the code they exercise.

Usage: python3 tools/gen_fixtures.py --out tests/fixtures/desk20.jsonl
"""

from __future__ import annotations

import argparse
import ast
import json
import random
from pathlib import Path

NAMES = ["a", "b", "c", "d", "n", "m", "x", "y", "s", "t", "k", "v", "w", "z"]
STRINGS = ["yes", "no", "ok", "done", "hi", "end"]
MAX_IDENTIFIER_LEN = 64


def _names(rng, count):
    return rng.sample(NAMES, count)


def _const(rng):
    return rng.randint(0, 9)


def _filler(rng, used):
    pool = [p for p in NAMES if p not in used]
    v = rng.choice(pool)
    kind = rng.randrange(3)
    if kind == 0:
        return f"{v} = {_const(rng)}"
    if kind == 1:
        return f"{v} = '{rng.choice(STRINGS)}'"
    return f"print({_const(rng)})"


def t00_sum(rng):
    a, b = _names(rng, 2)
    return f"{a} = int(input())\n{b} = int(input())\nprint({a} + {b})", (a, b)


def t01_if_parity(rng):
    n = rng.choice(NAMES)
    s1, s2 = rng.sample(STRINGS, 2)
    return (
        f"{n} = int(input())\nif {n} % 2 == 0:\n    print('{s1}')\nelse:\n    print('{s2}')",
        (n,),
    )


def t02_for_sum(rng):
    s, i, n = _names(rng, 3)
    return (
        f"{n} = int(input())\n{s} = 0\nfor {i} in range({n}):\n    {s} += {i}\nprint({s})",
        (s, i, n),
    )


def t03_while_countdown(rng):
    n = rng.choice(NAMES)
    return f"{n} = int(input())\nwhile {n} > 0:\n    {n} -= 1\nprint({n})", (n,)


def t04_listcomp_sum(rng):
    i, n = _names(rng, 2)
    return f"{n} = int(input())\nprint(sum([{i} * {i} for {i} in range({n})]))", (i, n)


def t05_one_function(rng):
    f, x, n = _names(rng, 3)
    return (
        f"def {f}({x}):\n    return {x} * {_const(rng)}\n{n} = int(input())\nprint({f}({n}))",
        (f, x, n),
    )


def t06_try_except(rng):
    n = rng.choice(NAMES)
    return (
        f"try:\n    {n} = int(input())\nexcept ValueError:\n    {n} = {_const(rng)}\nprint({n})",
        (n,),
    )


def t07_class_method(rng):
    c = rng.choice("CDEFG")
    m, v = _names(rng, 2)
    return (
        f"class {c}:\n    def {m}(self):\n        return {_const(rng)}\n"
        f"{v} = {c}()\nprint({v}.{m}())",
        (m, v),
    )


def t08_dict_lookup(rng):
    d = rng.choice(NAMES)
    k1, k2 = rng.sample(STRINGS, 2)
    return (
        f"{d} = {{'{k1}': {_const(rng)}, '{k2}': {_const(rng)}}}\nprint({d}['{k1}'])",
        (d,),
    )


def t09_split_join(rng):
    s = rng.choice(NAMES)
    return f"{s} = input()\nprint(' '.join({s}.split()))", (s,)


def t10_sort_first(rng):
    xs, x = _names(rng, 2)
    return (
        f"{xs} = [int({x}) for {x} in input().split()]\n{xs}.sort()\nprint({xs}[0])",
        (xs, x),
    )


def t11_nested_loops(rng):
    i, j, n, m = _names(rng, 4)
    return (
        f"{n} = int(input())\n{m} = int(input())\n"
        f"for {i} in range({n}):\n    for {j} in range({m}):\n        print({i} * {j})",
        (i, j, n, m),
    )


# Grouping-contrast pairs: each pair shares its node multiset and its
# (child, parent, field) pair multiset; only the sibling grouping under one
# field differs. These separate set-valued hyperedges from star expansion.


def t12_list_two_one(rng):
    x, y, p, q, r = _names(rng, 5)
    return f"{x} = [{p}, {q}]\n{y} = [{r}]\nprint({x} + {y})", (x, y, p, q, r)


def t13_list_one_two(rng):
    x, y, p, q, r = _names(rng, 5)
    return f"{x} = [{p}]\n{y} = [{q}, {r}]\nprint({x} + {y})", (x, y, p, q, r)


def t14_print_two_one(rng):
    p, q, r = _names(rng, 3)
    return f"{p} = input()\n{q} = input()\n{r} = input()\nprint({p}, {q})\nprint({r})", (p, q, r)


def t15_print_one_two(rng):
    p, q, r = _names(rng, 3)
    return f"{p} = input()\n{q} = input()\n{r} = input()\nprint({p})\nprint({q}, {r})", (p, q, r)


def t16_call_two_one(rng):
    f, y, z, a, b, c = _names(rng, 6)
    return f"{y} = {f}({a}, {b})\n{z} = {f}({c})\nprint({y}, {z})", (f, y, z, a, b, c)


def t17_call_one_two(rng):
    f, y, z, a, b, c = _names(rng, 6)
    return f"{y} = {f}({a})\n{z} = {f}({b}, {c})\nprint({y}, {z})", (f, y, z, a, b, c)


def t18_tuple_two_one(rng):
    t, u, a, b, c = _names(rng, 5)
    return f"{t} = ({a}, {b})\n{u} = ({c},)\nprint({t} + {u})", (t, u, a, b, c)


def t19_tuple_one_two(rng):
    t, u, a, b, c = _names(rng, 5)
    return f"{t} = ({a},)\n{u} = ({b}, {c})\nprint({t} + {u})", (t, u, a, b, c)


TEMPLATES = [
    ("sum_two_inputs", t00_sum),
    ("if_parity", t01_if_parity),
    ("for_sum", t02_for_sum),
    ("while_countdown", t03_while_countdown),
    ("listcomp_sum", t04_listcomp_sum),
    ("one_function", t05_one_function),
    ("try_except", t06_try_except),
    ("class_method", t07_class_method),
    ("dict_lookup", t08_dict_lookup),
    ("split_join", t09_split_join),
    ("sort_first", t10_sort_first),
    ("nested_loops", t11_nested_loops),
    ("list_two_one", t12_list_two_one),
    ("list_one_two", t13_list_one_two),
    ("print_two_one", t14_print_two_one),
    ("print_one_two", t15_print_one_two),
    ("call_two_one", t16_call_two_one),
    ("call_one_two", t17_call_one_two),
    ("tuple_two_one", t18_tuple_two_one),
    ("tuple_one_two", t19_tuple_one_two),
]


def snippet_to_canonical(source: str, source_id: str, label: int) -> dict:
    """Parse with the CPython grammar and map to the interchange schema."""
    tree = ast.parse(source)
    nodes: list[dict] = []

    def add(kind: str, value: str) -> int:
        nodes.append({"kind": kind, "value": value, "fields": []})
        return len(nodes) - 1

    def leaf(value) -> int:
        text = str(value)
        if len(text) > MAX_IDENTIFIER_LEN:
            text = text[:MAX_IDENTIFIER_LEN]
        return add("identifier", text)

    def visit(node: ast.AST) -> int:
        idx = add("ast", type(node).__name__)
        fields = []
        for name, value in ast.iter_fields(node):
            children = []
            if isinstance(value, ast.AST):
                children = [visit(value)]
            elif isinstance(value, list):
                children = [
                    visit(v) if isinstance(v, ast.AST) else leaf(v) for v in value
                ]
            elif value is not None:
                children = [leaf(value)]
            if children:
                fields.append([name, children])
        nodes[idx]["fields"] = fields
        return idx

    root = visit(tree)
    return {"source_id": source_id, "label": label, "root": root, "nodes": nodes}


def generate(seed: int, per_class: int) -> tuple[list[dict], dict]:
    rng = random.Random(seed)
    records = []
    for label, (slug, template) in enumerate(TEMPLATES):
        for i in range(per_class):
            source, used = template(rng)
            for _ in range(rng.randrange(2)):
                source += "\n" + _filler(rng, used)
            rec = snippet_to_canonical(source, f"py800-{slug}-{i:03d}", label)
            records.append(rec)
    order = list(range(len(records)))
    rng.shuffle(order)
    records = [records[i] for i in order]
    manifest = {
        "labels": [slug for slug, _ in TEMPLATES],
        "counts": [per_class] * len(TEMPLATES),
        "parse_failures": 0,
        "parser": "cpython-ast",
    }
    return records, manifest


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="tests/fixtures/desk20.jsonl")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--per-class", type=int, default=100)
    args = parser.parse_args()

    records, manifest = generate(args.seed, args.per_class)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")) + "\n")
    manifest_path = out.with_suffix(".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    total_nodes = sum(len(r["nodes"]) for r in records)
    print(f"wrote {len(records)} records to {out}")
    print(f"avg nodes/graph: {total_nodes / len(records):.1f}")
    print(f"manifest: {manifest_path}")


if __name__ == "__main__":
    main()

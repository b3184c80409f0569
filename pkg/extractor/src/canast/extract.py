"""Source-to-canonical-AST extraction for Python and Java.

Mapping rules, identical for both languages:
  * grammar nodes become kind="ast" nodes named by their node-type name;
  * terminal values (identifier text, literal tokens, flags) become
    kind="identifier" leaves attached under the owning field name;
  * fields that are None or empty emit nothing;
  * every identifier occurrence is a distinct leaf node;
  * leaf text longer than 64 characters is truncated.

Python uses the host CPython ast module. Java uses the javalang package
when installed (the `java` extra); set-valued fields (modifiers) are sorted
so extraction stays deterministic.
"""

from __future__ import annotations

import ast as python_ast
import platform

MAX_IDENTIFIER_LEN = 64

LANGUAGES = ("python", "java")

try:
    import javalang
    import javalang.tree

    HAVE_JAVALANG = True
except ImportError:
    HAVE_JAVALANG = False


class ParseError(Exception):
    """Source text does not parse under the language grammar."""


class ParserUnavailable(Exception):
    """The language's parser package is not installed."""


def parser_version(language_tag: str) -> str:
    if language_tag == "python":
        return f"cpython-ast-{platform.python_version()}"
    if language_tag == "java":
        return "javalang" if HAVE_JAVALANG else "javalang (not installed)"
    raise ValueError(f"unknown language {language_tag!r}")


class _Builder:
    def __init__(self):
        self.nodes: list[dict] = []

    def add(self, kind: str, value: str) -> int:
        self.nodes.append({"kind": kind, "value": value, "fields": []})
        return len(self.nodes) - 1

    def leaf(self, value) -> int:
        text = str(value)
        if len(text) > MAX_IDENTIFIER_LEN:
            text = text[:MAX_IDENTIFIER_LEN]
        return self.add("identifier", text)


def _extract_python(source_text: str) -> dict:
    try:
        tree = python_ast.parse(source_text)
    except (SyntaxError, ValueError) as err:
        raise ParseError(str(err)) from None
    b = _Builder()

    def visit(node: python_ast.AST) -> int:
        idx = b.add("ast", type(node).__name__)
        fields = []
        for name, value in python_ast.iter_fields(node):
            children = []
            if isinstance(value, python_ast.AST):
                children = [visit(value)]
            elif isinstance(value, list):
                children = [
                    visit(v) if isinstance(v, python_ast.AST) else b.leaf(v)
                    for v in value
                ]
            elif value is not None:
                children = [b.leaf(value)]
            if children:
                fields.append([name, children])
        b.nodes[idx]["fields"] = fields
        return idx

    root = visit(tree)
    return {"root": root, "nodes": b.nodes}


def _extract_java(source_text: str) -> dict:
    if not HAVE_JAVALANG:
        raise ParserUnavailable(
            "Java extraction needs the javalang package (install the 'java' extra)"
        )
    try:
        tree = javalang.parse.parse(source_text)
    except javalang.parser.JavaSyntaxError as err:
        raise ParseError(str(err)) from None
    except (javalang.tokenizer.LexerError, TypeError, IndexError) as err:
        raise ParseError(f"tokenizer/parser failure: {err}") from None
    b = _Builder()

    def child_indices(value) -> list[int]:
        # javalang attribute values: Node, str/bool/number, list, set, None
        if value is None:
            return []
        if isinstance(value, javalang.tree.Node):
            return [visit(value)]
        if isinstance(value, (list, tuple)):
            out = []
            for item in value:
                out.extend(child_indices(item))
            return out
        if isinstance(value, set):
            return [b.leaf(item) for item in sorted(str(s) for s in value)]
        return [b.leaf(value)]

    def visit(node) -> int:
        idx = b.add("ast", type(node).__name__)
        fields = []
        for name in node.attrs:
            children = child_indices(getattr(node, name))
            if children:
                fields.append([name, children])
        b.nodes[idx]["fields"] = fields
        return idx

    root = visit(tree)
    return {"root": root, "nodes": b.nodes}


def extract_ast(source_text: str, language_tag: str) -> dict:
    """Parse one source file; returns {"root": int, "nodes": [...]}.

    The caller attaches source_id and label before emission.
    """
    if language_tag == "python":
        return _extract_python(source_text)
    if language_tag == "java":
        return _extract_java(source_text)
    raise ValueError(f"unknown language {language_tag!r}")

"""Textual authoring format for behavior trees.

Grammar (brace-delimited, ``#`` comments run to end of line)::

    program    := "tree" STRING "{" blackboard? node "}"
    blackboard := "blackboard" "{" (KEY ":" TYPE ("=" literal)?)* "}"
    node       := composite | decorator | leaf
    composite  := ("sequence" | "selector" | "recovery") params?  "{" node+ "}"
                | "parallel" params? "{" node+ "}"
    decorator  := "retry" "(" INT ("," "id" "=" ID)? ")" "{" node "}"
                | "repeat" "(" (INT | "until" predicate) ("," "id" "=" ID)? ")" "{" node "}"
                | "invert" params? "{" node "}"
    leaf       := ("action" | "condition") STRING kv*
                | "select" STRING "options" "=" KEY "into" KEY kv*
    params     := "(" kv ("," kv)* ")"
    kv         := KEY "=" (INT | REAL | STRING | "true" | "false" | bareword)
    predicate  := KEY ("=" | "<" | ">") literal

Composite/decorator params accept ``id=...`` (parallel additionally ``m=``
and ``n=`` thresholds, defaulting to all-children and 1). Leaf key-values:
``id``, ``mode`` (auto|scripted|interactive), ``long_running`` (bool),
``check`` (a predicate string, conditions only), ``set`` / ``push``
(``"key=value"`` write effects, actions only).

Node ids default to a slug of the label (leaves) or to the kind name with a
document-order counter (inner nodes). Serialization is canonical: two-space
indentation, one node header per line, fixed parameter order, so any two
structurally identical trees print identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .errors import BtkitError
from .model import (
    BLACKBOARD_TYPES,
    COMPOSITE_KINDS,
    DECORATOR_KINDS,
    Effect,
    LEAF_KINDS,
    Literal,
    Node,
    NodeKind,
    Predicate,
    Tree,
    format_literal,
    quote_string,
    validate,
)

_MAX_DEPTH = 120
_MODES = ("auto", "scripted", "interactive")


@dataclass(frozen=True)
class SourceSpan:
    line: int  # 1-based
    column: int  # 1-based
    length: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseDiagnostic:
    span: SourceSpan
    severity: str  # "error" | "warning"
    message: str

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}: {self.message}"


@dataclass
class ParseResult:
    tree: Optional[Tree]
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)
    node_spans: dict[str, SourceSpan] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.tree is not None

    @property
    def errors(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def warnings(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity == "warning"]


class ParseError(BtkitError):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics) or "parse failed")


# --------------------------------------------------------------------------
# Lexer
# --------------------------------------------------------------------------

_PUNCT = {"{": "lbrace", "}": "rbrace", "(": "lparen", ")": "rparen",
          "=": "equals", ",": "comma", ":": "colon", "<": "lt", ">": "gt"}


@dataclass(frozen=True)
class _Token:
    kind: str  # ident, string, int, real, punct kinds, eof
    text: str
    value: Any
    span: SourceSpan


class _LexError(Exception):
    def __init__(self, span: SourceSpan, message: str):
        self.diagnostic = ParseDiagnostic(span, "error", message)
        super().__init__(message)


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def span(length: int, l: int = None, c: int = None) -> SourceSpan:
        return SourceSpan(l if l is not None else line, c if c is not None else col, max(1, length))

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        if ch in _PUNCT:
            tokens.append(_Token(_PUNCT[ch], ch, ch, span(1)))
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            while True:
                if i >= n:
                    raise _LexError(span(1, start_line, start_col), "unterminated string")
                c = text[i]
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\n":
                    raise _LexError(span(1, start_line, start_col), "unterminated string")
                if c == "\\":
                    if i + 1 >= n:
                        raise _LexError(span(1, start_line, start_col), "unterminated string")
                    esc = text[i + 1]
                    mapped = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}.get(esc)
                    if mapped is None:
                        raise _LexError(span(2, line, col), f"unknown escape '\\{esc}'")
                    buf.append(mapped)
                    i += 2
                    col += 2
                    continue
                buf.append(c)
                i += 1
                col += 1
            value = "".join(buf)
            tokens.append(_Token("string", value, value, span(max(1, col - start_col), start_line, start_col)))
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            start_col = col
            j = i + 1 if ch == "-" else i
            while j < n and text[j].isdigit():
                j += 1
            is_real = False
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                is_real = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    is_real = True
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            raw = text[i:j]
            try:
                value = float(raw) if is_real else int(raw)
            except ValueError:
                raise _LexError(span(j - i, line, start_col), f"bad number literal {raw!r}")
            tokens.append(_Token("real" if is_real else "int", raw, value, span(j - i, line, start_col)))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            start_col = col
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            tokens.append(_Token("ident", word, word, span(j - i, line, start_col)))
            col += j - i
            i = j
            continue
        raise _LexError(span(1), f"unexpected character {ch!r}")

    tokens.append(_Token("eof", "", None, span(1)))
    return tokens


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


class _SyntaxAbort(Exception):
    pass


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics: list[ParseDiagnostic] = []
        self.node_spans: dict[int, SourceSpan] = {}  # id(node) -> span until ids assigned
        self.body_spans: dict[int, SourceSpan] = {}

    # -- token plumbing --

    def _cur(self) -> _Token:
        return self.tokens[self.pos]

    def _advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def _at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self._cur()
        return tok.kind == kind and (text is None or tok.text == text)

    def _error(self, span: SourceSpan, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(span, "error", message))

    def _fail(self, message: str) -> "_SyntaxAbort":
        self._error(self._cur().span, message)
        return _SyntaxAbort()

    def _expect(self, kind: str, what: str) -> _Token:
        if self._at(kind):
            return self._advance()
        raise self._fail(f"expected {what}, found {self._describe(self._cur())}")

    def _expect_keyword(self, word: str) -> _Token:
        if self._at("ident", word):
            return self._advance()
        raise self._fail(f"expected '{word}', found {self._describe(self._cur())}")

    @staticmethod
    def _describe(tok: _Token) -> str:
        if tok.kind == "eof":
            return "end of input"
        return f"{tok.text!r}"

    # -- grammar --

    def parse_program(self) -> tuple[str, Node, dict[str, str], dict[str, Any]]:
        self._expect_keyword("tree")
        name = self._expect("string", "tree name string").value
        self._expect("lbrace", "'{'")
        schema: dict[str, str] = {}
        defaults: dict[str, Any] = {}
        if self._at("ident", "blackboard"):
            schema, defaults = self._parse_blackboard()
        root_child = self._parse_node(depth=0)
        self._expect("rbrace", "'}'")
        if not self._at("eof"):
            raise self._fail("unexpected trailing input after tree")
        root = Node(id="", kind=NodeKind.ROOT, label="", children=[root_child])
        return name, root, schema, defaults

    def _parse_blackboard(self) -> tuple[dict[str, str], dict[str, Any]]:
        self._advance()  # "blackboard"
        self._expect("lbrace", "'{'")
        schema: dict[str, str] = {}
        defaults: dict[str, Any] = {}
        while not self._at("rbrace"):
            key_tok = self._expect("ident", "blackboard key")
            self._expect("colon", "':'")
            type_tok = self._expect("ident", "blackboard type")
            if type_tok.text not in BLACKBOARD_TYPES:
                self._error(type_tok.span,
                            f"unknown blackboard type {type_tok.text!r} "
                            f"(expected one of {', '.join(BLACKBOARD_TYPES)})")
            if key_tok.text in schema:
                self._error(key_tok.span, f"blackboard key {key_tok.text!r} declared twice")
            schema[key_tok.text] = type_tok.text
            if self._at("equals"):
                self._advance()
                lit_tok, lit = self._parse_literal()
                if type_tok.text == "string_list":
                    self._error(lit_tok.span, "string_list keys cannot carry a default")
                else:
                    coerced = _coerce_default(type_tok.text, lit)
                    if coerced is _BAD_DEFAULT:
                        self._error(lit_tok.span,
                                    f"default {lit_tok.text!r} does not match type {type_tok.text}")
                    else:
                        defaults[key_tok.text] = coerced
        self._expect("rbrace", "'}'")
        return schema, defaults

    def _parse_node(self, depth: int) -> Node:
        if depth > _MAX_DEPTH:
            raise self._fail(f"nesting deeper than {_MAX_DEPTH} levels")
        tok = self._cur()
        if tok.kind != "ident":
            raise self._fail(f"expected a node keyword, found {self._describe(tok)}")
        word = tok.text
        if word in ("sequence", "selector", "parallel", "recovery"):
            return self._parse_composite(depth)
        if word in ("retry", "repeat", "invert"):
            return self._parse_decorator(depth)
        if word in ("action", "condition"):
            return self._parse_simple_leaf()
        if word == "select":
            return self._parse_select()
        raise self._fail(f"unknown node keyword {word!r}")

    def _parse_composite(self, depth: int) -> Node:
        tok = self._advance()
        kind = NodeKind(tok.text)
        params: dict[str, Any] = {}
        explicit_id = None
        if self._at("lparen"):
            kvs = self._parse_paren_kvs()
            for key_tok, val_tok in kvs:
                if key_tok.text == "id":
                    explicit_id = self._ident_value(val_tok)
                elif key_tok.text in ("m", "n") and kind is NodeKind.PARALLEL:
                    if val_tok.kind != "int":
                        self._error(val_tok.span, f"threshold {key_tok.text} must be an integer")
                    else:
                        params[key_tok.text] = val_tok.value
                else:
                    self._error(key_tok.span, f"unknown parameter {key_tok.text!r} for {tok.text}")
        body_open = self._expect("lbrace", "'{'")
        children: list[Node] = []
        while not self._at("rbrace") and not self._at("eof"):
            children.append(self._parse_node(depth + 1))
        close = self._expect("rbrace", "'}'")
        if not children:
            self._error(body_open.span, "composite requires at least one child")
        if kind is NodeKind.PARALLEL:
            params.setdefault("m", len(children) if children else 1)
            params.setdefault("n", 1)
        node = Node(id="", kind=kind, label="", children=children, params=params)
        self._register(node, tok.span, explicit_id, body_open.span)
        return node

    def _parse_decorator(self, depth: int) -> Node:
        tok = self._advance()
        kind = NodeKind(tok.text)
        params: dict[str, Any] = {}
        explicit_id = None
        if kind is NodeKind.INVERT:
            if self._at("lparen"):
                for key_tok, val_tok in self._parse_paren_kvs():
                    if key_tok.text == "id":
                        explicit_id = self._ident_value(val_tok)
                    else:
                        self._error(key_tok.span, f"unknown parameter {key_tok.text!r} for invert")
        else:
            self._expect("lparen", "'('")
            if kind is NodeKind.RETRY:
                bound = self._expect("int", "retry attempt bound")
                params["attempts"] = bound.value
                if bound.value < 1:
                    self._error(bound.span, "retry bound must be at least 1")
            else:  # repeat
                if self._at("ident", "until"):
                    self._advance()
                    params["until"] = self._parse_predicate()
                else:
                    bound = self._expect("int", "repeat bound or 'until'")
                    params["count"] = bound.value
                    if bound.value < 1:
                        self._error(bound.span, "repeat bound must be at least 1")
            if self._at("comma"):
                self._advance()
                key_tok = self._expect("ident", "'id'")
                if key_tok.text != "id":
                    self._error(key_tok.span, f"unknown parameter {key_tok.text!r} for {tok.text}")
                self._expect("equals", "'='")
                explicit_id = self._ident_value(self._advance())
            self._expect("rparen", "')'")
        body_open = self._expect("lbrace", "'{'")
        children: list[Node] = []
        while not self._at("rbrace") and not self._at("eof"):
            children.append(self._parse_node(depth + 1))
        self._expect("rbrace", "'}'")
        if len(children) != 1:
            self._error(body_open.span, "decorator requires exactly one child")
        node = Node(id="", kind=kind, label="", children=children, params=params)
        self._register(node, tok.span, explicit_id, body_open.span)
        return node

    def _parse_simple_leaf(self) -> Node:
        tok = self._advance()
        kind = NodeKind(tok.text)
        label = self._expect("string", f"{tok.text} label string").value
        node = Node(id="", kind=kind, label=label)
        explicit_id = self._parse_leaf_kvs(node, tok.text)
        self._register(node, tok.span, explicit_id)
        return node

    def _parse_select(self) -> Node:
        tok = self._advance()
        label = self._expect("string", "select label string").value
        self._expect_keyword("options")
        self._expect("equals", "'='")
        options_key = self._expect("ident", "options blackboard key").text
        self._expect_keyword("into")
        into_key = self._expect("ident", "target blackboard key").text
        node = Node(
            id="", kind=NodeKind.SELECT, label=label,
            params={"options_key": options_key, "into_key": into_key},
        )
        explicit_id = self._parse_leaf_kvs(node, "select")
        self._register(node, tok.span, explicit_id)
        return node

    def _parse_leaf_kvs(self, node: Node, keyword: str) -> Optional[str]:
        explicit_id = None
        # Key-values follow the leaf on the same logical line; they end at the
        # next node keyword or closing brace, which never take '=' after them.
        while self._at("ident") and self.tokens[self.pos + 1].kind == "equals":
            key_tok = self._advance()
            self._advance()  # '='
            val_tok = self._advance()
            key = key_tok.text
            if key == "id":
                explicit_id = self._ident_value(val_tok)
            elif key == "mode":
                mode = val_tok.text if val_tok.kind == "ident" else None
                if mode not in _MODES:
                    self._error(val_tok.span, f"mode must be one of {', '.join(_MODES)}")
                elif mode != "auto":
                    node.params["mode"] = mode
            elif key == "long_running":
                if val_tok.kind == "ident" and val_tok.text in ("true", "false"):
                    if val_tok.text == "true":
                        node.params["long_running"] = True
                else:
                    self._error(val_tok.span, "long_running must be true or false")
            elif key == "check" and node.kind is NodeKind.CONDITION:
                if val_tok.kind != "string":
                    self._error(val_tok.span, 'check expects a quoted predicate, e.g. check="x > 0"')
                else:
                    pred = _parse_predicate_text(val_tok.value)
                    if isinstance(pred, str):
                        self._error(val_tok.span, f"bad check predicate: {pred}")
                    else:
                        node.params["check"] = pred
            elif key in ("set", "push") and node.kind is NodeKind.ACTION:
                if val_tok.kind != "string":
                    self._error(val_tok.span, f'{key} expects a quoted "key=value" effect')
                else:
                    eff = _parse_effect_text(val_tok.value)
                    if isinstance(eff, str):
                        self._error(val_tok.span, f"bad {key} effect: {eff}")
                    else:
                        node.params[key] = eff
            else:
                self._error(key_tok.span, f"unknown parameter {key!r} for {keyword}")
        return explicit_id

    def _parse_paren_kvs(self) -> list[tuple[_Token, _Token]]:
        self._expect("lparen", "'('")
        out: list[tuple[_Token, _Token]] = []
        if not self._at("rparen"):
            while True:
                key_tok = self._expect("ident", "parameter name")
                self._expect("equals", "'='")
                val_tok = self._advance()
                out.append((key_tok, val_tok))
                if self._at("comma"):
                    self._advance()
                    continue
                break
        self._expect("rparen", "')'")
        return out

    def _parse_predicate(self) -> Predicate:
        key_tok = self._expect("ident", "blackboard key")
        op_tok = self._cur()
        if op_tok.kind in ("equals", "lt", "gt"):
            self._advance()
        else:
            raise self._fail("expected '=', '<' or '>' in predicate")
        _, lit = self._parse_literal()
        op = {"equals": "=", "lt": "<", "gt": ">"}[op_tok.kind]
        return Predicate(key_tok.text, op, lit)

    def _parse_literal(self) -> tuple[_Token, Literal]:
        tok = self._cur()
        if tok.kind in ("int", "real", "string"):
            self._advance()
            return tok, tok.value
        if tok.kind == "ident":
            self._advance()
            if tok.text == "true":
                return tok, True
            if tok.text == "false":
                return tok, False
            return tok, tok.text  # bareword string
        raise self._fail(f"expected a literal, found {self._describe(tok)}")

    def _ident_value(self, tok: _Token) -> Optional[str]:
        if tok.kind == "ident" and _is_valid_id(tok.text):
            return tok.text
        self._error(tok.span, "id must be a bare identifier like main_branch")
        return None

    def _register(
        self, node: Node, span: SourceSpan, explicit_id: Optional[str],
        body_span: Optional[SourceSpan] = None,
    ) -> None:
        if explicit_id:
            node.id = explicit_id
            node.params["_explicit_id"] = True
        self.node_spans[id(node)] = span
        if body_span is not None:
            self.body_spans[id(node)] = body_span


_BAD_DEFAULT = object()


def _coerce_default(type_name: str, lit: Literal):
    if type_name == "bool":
        return lit if isinstance(lit, bool) else _BAD_DEFAULT
    if isinstance(lit, bool):
        return _BAD_DEFAULT
    if type_name == "int":
        return lit if isinstance(lit, int) else _BAD_DEFAULT
    if type_name == "real":
        return float(lit) if isinstance(lit, (int, float)) else _BAD_DEFAULT
    if type_name == "string":
        return lit if isinstance(lit, str) else _BAD_DEFAULT
    return _BAD_DEFAULT


def _parse_predicate_text(text: str) -> Union[Predicate, str]:
    """Parse a predicate from an embedded string; returns an error message on failure."""
    try:
        tokens = _lex(text)
    except _LexError as e:
        return e.diagnostic.message
    parser = _Parser(tokens)
    try:
        pred = parser._parse_predicate()
    except _SyntaxAbort:
        return parser.diagnostics[-1].message if parser.diagnostics else "malformed predicate"
    if parser.diagnostics:
        return parser.diagnostics[0].message
    if not parser._at("eof"):
        return "trailing input after predicate"
    return pred


def _parse_effect_text(text: str) -> Union[Effect, str]:
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep:
        return 'expected "key=value"'
    if not _is_valid_id(key):
        return f"{key!r} is not a valid blackboard key"
    return Effect(key, raw)


def _is_valid_id(s: str) -> bool:
    return bool(s) and (s[0].isalpha() or s[0] == "_") and all(c.isalnum() or c == "_" for c in s)


def slugify(label: str) -> str:
    """Identifier derived from a display label; empty labels yield empty slugs."""
    out: list[str] = []
    prev_us = True
    for ch in label.lower():
        if ch.isalnum():
            out.append(ch)
            prev_us = False
        elif not prev_us:
            out.append("_")
            prev_us = True
    slug = "".join(out).strip("_")
    if slug and slug[0].isdigit():
        slug = "_" + slug
    return slug


def _auto_id(node: Node, counters: dict[str, int]) -> str:
    """The id a node gets when none is written; counters advance per use."""
    if node.kind in LEAF_KINDS:
        return slugify(node.label) or _counted(node.kind.value, counters)
    return _counted(node.kind.value, counters)


def _counted(base: str, counters: dict[str, int]) -> str:
    counters[base] = counters.get(base, 0) + 1
    n = counters[base]
    return base if n == 1 else f"{base}_{n}"


# --------------------------------------------------------------------------
# Entry points
# --------------------------------------------------------------------------


def parse(text: str) -> ParseResult:
    """Parse DSL text; never raises on bad input, diagnostics tell the story."""
    try:
        tokens = _lex(text)
    except _LexError as e:
        return ParseResult(None, [e.diagnostic])
    except RecursionError:  # pragma: no cover - lexing is iterative
        return ParseResult(None, [ParseDiagnostic(SourceSpan(1, 1, 1), "error", "input too deep")])

    parser = _Parser(tokens)
    try:
        name, root, schema, defaults = parser.parse_program()
    except _SyntaxAbort:
        return ParseResult(None, parser.diagnostics)

    tree = Tree(name=name, root=root, blackboard_schema=schema, blackboard_defaults=defaults)
    node_spans = _assign_ids(tree, parser)
    _check_declared_keys(tree, parser, node_spans)

    # Rules the parser already enforces with sharper spans are not re-reported.
    reported_at_parse = {
        "composite-arity", "decorator-arity", "duplicate-id",
        "retry-bound", "repeat-bound", "schema-type", "select-keys",
    }
    for violation in validate(tree):
        if violation.rule in reported_at_parse:
            continue
        span = node_spans.get(violation.node_id, SourceSpan(1, 1, 1))
        parser.diagnostics.append(ParseDiagnostic(span, "error", violation.message))

    if any(d.severity == "error" for d in parser.diagnostics):
        return ParseResult(None, parser.diagnostics, node_spans)
    return ParseResult(tree, parser.diagnostics, node_spans)


def parse_tree(text: str) -> Tree:
    """Parse and return the tree, raising :class:`ParseError` on any error."""
    result = parse(text)
    if result.tree is None:
        raise ParseError(result.errors)
    return result.tree


def _assign_ids(tree: Tree, parser: _Parser) -> dict[str, SourceSpan]:
    counters: dict[str, int] = {}
    spans: dict[str, SourceSpan] = {}
    seen: dict[str, Node] = {}
    tree.root.id = "root"
    seen["root"] = tree.root
    for node in tree.root_child.walk():
        explicit = node.params.pop("_explicit_id", False)
        if not explicit:
            node.id = _auto_id(node, counters)
        span = parser.node_spans.get(id(node), SourceSpan(1, 1, 1))
        if node.id in seen:
            parser.diagnostics.append(
                ParseDiagnostic(span, "error", f"duplicate id {node.id!r}")
            )
        seen[node.id] = node
        spans[node.id] = span
    return spans


def _check_declared_keys(tree: Tree, parser: _Parser, spans: dict[str, SourceSpan]) -> None:
    """Undeclared blackboard keys are a warning here, an error at run time."""
    schema = tree.blackboard_schema

    def warn(node: Node, key: str, where: str) -> None:
        if key not in schema:
            span = spans.get(node.id, SourceSpan(1, 1, 1))
            parser.diagnostics.append(ParseDiagnostic(
                span, "warning",
                f"{where} references undeclared blackboard key {key!r}",
            ))

    for node in tree.walk():
        until = node.params.get("until")
        if isinstance(until, Predicate):
            warn(node, until.key, "repeat-until predicate")
        check = node.params.get("check")
        if isinstance(check, Predicate):
            warn(node, check.key, "check predicate")
        for eff_name in ("set", "push"):
            eff = node.params.get(eff_name)
            if isinstance(eff, Effect):
                warn(node, eff.key, f"{eff_name} effect")
        if node.kind is NodeKind.SELECT:
            warn(node, node.params["options_key"], "select options")
            warn(node, node.params["into_key"], "select target")


# --------------------------------------------------------------------------
# Serializer
# --------------------------------------------------------------------------


def serialize(tree: Tree) -> str:
    """Canonical text form; ``parse(serialize(t))`` is structurally identical to ``t``."""
    lines: list[str] = [f"tree {quote_string(tree.name)} {{"]
    if tree.blackboard_schema:
        lines.append("  blackboard {")
        for key in sorted(tree.blackboard_schema):
            entry = f"    {key}: {tree.blackboard_schema[key]}"
            if key in tree.blackboard_defaults:
                entry += f" = {format_literal(tree.blackboard_defaults[key])}"
            lines.append(entry)
        lines.append("  }")
    counters: dict[str, int] = {}
    _write_node(tree.root_child, 1, lines, counters)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _write_node(node: Node, depth: int, lines: list[str], counters: dict[str, int]) -> None:
    indent = "  " * depth
    # Recompute what the automatic id would be; only a differing id is written.
    candidates = dict(counters)
    auto = _auto_id(node, candidates)
    if node.id == auto:
        counters.update(candidates)
        id_part = None
    else:
        id_part = node.id

    kind = node.kind
    if kind in COMPOSITE_KINDS:
        parens: list[str] = []
        if kind is NodeKind.PARALLEL:
            parens.append(f"m={node.params['m']}")
            parens.append(f"n={node.params['n']}")
        if id_part:
            parens.append(f"id={id_part}")
        header = kind.value + (f"({', '.join(parens)})" if parens else "")
        lines.append(f"{indent}{header} {{")
        for child in node.children:
            _write_node(child, depth + 1, lines, counters)
        lines.append(f"{indent}}}")
        return

    if kind in DECORATOR_KINDS:
        if kind is NodeKind.RETRY:
            inner = str(node.params["attempts"])
        elif kind is NodeKind.REPEAT:
            until = node.params.get("until")
            inner = f"until {until.text()}" if until is not None else str(node.params["count"])
        else:
            inner = ""
        if id_part:
            inner = f"{inner}, id={id_part}" if inner else f"id={id_part}"
        header = kind.value + (f"({inner})" if inner else "")
        lines.append(f"{indent}{header} {{")
        _write_node(node.children[0], depth + 1, lines, counters)
        lines.append(f"{indent}}}")
        return

    # leaves
    parts = [kind.value, quote_string(node.label)]
    if kind is NodeKind.SELECT:
        parts.append(f"options={node.params['options_key']}")
        parts.append(f"into {node.params['into_key']}")
    if id_part:
        parts.append(f"id={id_part}")
    mode = node.params.get("mode")
    if mode:
        parts.append(f"mode={mode}")
    if node.params.get("long_running"):
        parts.append("long_running=true")
    check = node.params.get("check")
    if check is not None:
        parts.append(f"check={quote_string(check.text())}")
    for eff_name in ("set", "push"):
        eff = node.params.get(eff_name)
        if eff is not None:
            parts.append(f"{eff_name}={quote_string(eff.text())}")
    lines.append(indent + " ".join(parts))

"""Recursive-descent reader and canonical printer for terms and clauses.

The grammar is deliberately small: no user-defined operators, only ``=``
(700, xfx), ``,`` (1000, xfy) and ``;`` (1100, xfy).  Clause heads and
compound arguments are read at priority 999, so a bare comma always
separates arguments there.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, List, NamedTuple, Optional

from termbridge.errors import InvalidClauseError, ParseError
from termbridge.terms import (
    NIL,
    TRUE,
    Atom,
    Compound,
    FloatTerm,
    ForeignRef,
    IntTerm,
    Term,
    Var,
    list_items,
    make_list,
)

OPERATORS = {"=": (700, "xfx"), ",": (1000, "xfy"), ";": (1100, "xfy")}
ARG_PRIORITY = 999
MAX_PRIORITY = 1200


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.start > self.end or self.line < 1 or self.column < 1:
            raise ValueError(f"malformed span {self}")


@dataclass(frozen=True)
class Clause:
    head: Term
    body: Term = field(default=TRUE)

    def __post_init__(self) -> None:
        if not isinstance(self.head, (Atom, Compound)):
            raise InvalidClauseError(f"clause head must be an atom or compound, got {self.head!r}")
        if not isinstance(self.body, Term):
            raise TypeError(f"clause body is not a term: {self.body!r}")

    @property
    def is_fact(self) -> bool:
        return self.body == TRUE

    def __str__(self) -> str:
        return print_clause(self)


class Token(NamedTuple):
    kind: str  # atom qatom var int float punct end eof
    text: str
    value: object
    start: int
    end: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<float>[+-]?\d+\.\d+(?:[eE][+-]?\d+)?)
  | (?P<int>[+-]?\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<qatom>')
  | (?P<jref><jref:)
  | (?P<neck>:-)
  | (?P<end>\.(?=\s|%|\Z))
  | (?P<punct>[()\[\]|,;=])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", "'": "'", '"': '"', "`": "`",
            "a": "\a", "b": "\b", "f": "\f", "v": "\v", "0": "\0"}


class _Lexer:
    def __init__(self, text: str):
        self.text = text

    def span(self, start: int, end: Optional[int] = None) -> SourceSpan:
        line = self.text.count("\n", 0, start) + 1
        column = start - (self.text.rfind("\n", 0, start) + 1) + 1
        return SourceSpan(start, start if end is None else end, line, column)

    def tokens(self) -> Iterator[Token]:
        text, pos, n = self.text, 0, len(self.text)
        while pos < n:
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", self.span(pos, pos + 1))
            kind = m.lastgroup
            if kind == "ws":
                pos = m.end()
                continue
            if kind == "jref":
                raise ParseError("foreign reference terms cannot be read from text",
                                 self.span(pos, m.end()))
            if kind == "qatom":
                name, end = self._quoted(pos)
                yield Token("qatom", text[pos:end], name, pos, end)
                pos = end
                continue
            s = m.group()
            if kind == "int":
                yield Token("int", s, int(s), pos, m.end())
            elif kind == "float":
                yield Token("float", s, float(s), pos, m.end())
            elif kind in ("neck", "punct"):
                yield Token("punct", s, s, pos, m.end())
            else:
                yield Token(kind, s, s, pos, m.end())
            pos = m.end()
        yield Token("eof", "", None, n, n)

    def _quoted(self, start: int):
        text, pos, out = self.text, start + 1, []
        while True:
            if pos >= len(text):
                raise ParseError("unterminated quoted atom", self.span(start, pos))
            c = text[pos]
            if c == "'":
                if text.startswith("''", pos):
                    out.append("'")
                    pos += 2
                    continue
                return "".join(out), pos + 1
            if c == "\\":
                if pos + 1 >= len(text):
                    raise ParseError("unterminated escape", self.span(pos, pos + 1))
                e = text[pos + 1]
                if e == "x":
                    m = re.compile(r"x([0-9a-fA-F]+)\\").match(text, pos + 1)
                    if m is None:
                        raise ParseError("malformed \\x escape", self.span(pos, pos + 2))
                    out.append(chr(int(m.group(1), 16)))
                    pos = m.end()
                    continue
                if e == "\n":
                    pos += 2
                    continue
                if e not in _ESCAPES:
                    raise ParseError(f"unknown escape \\{e}", self.span(pos, pos + 2))
                out.append(_ESCAPES[e])
                pos += 2
                continue
            out.append(c)
            pos += 1


class _Parser:
    def __init__(self, text: str):
        self.lexer = _Lexer(text)
        self.toks: List[Token] = list(self.lexer.tokens())
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: Optional[Token] = None, start: Optional[int] = None):
        tok = tok or self.tok
        begin = tok.start if start is None else start
        return ParseError(message, self.lexer.span(begin, max(begin, tok.end)))

    def expect(self, text: str) -> Token:
        if self.tok.kind != "punct" or self.tok.text != text:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def at_punct(self, text: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == text

    def term(self, max_priority: int) -> Term:
        left, left_priority = self.primary(), 0
        while self.tok.kind == "punct" and self.tok.text in OPERATORS:
            op = self.tok.text
            priority, kind = OPERATORS[op]
            if priority > max_priority:
                break
            if left_priority >= priority:
                raise self.error(f"operator priority clash at {op!r}")
            self.advance()
            right = self.term(priority - 1 if kind == "xfx" else priority)
            left, left_priority = Compound(op, (left, right)), priority
        return left

    def primary(self) -> Term:
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return IntTerm(tok.value)
        if tok.kind == "float":
            self.advance()
            return FloatTerm(tok.value)
        if tok.kind == "var":
            self.advance()
            return Var(tok.value)
        if tok.kind in ("atom", "qatom"):
            self.advance()
            nxt = self.tok
            if nxt.kind == "punct" and nxt.text == "(" and nxt.start == tok.end:
                self.advance()
                args = [self.term(ARG_PRIORITY)]
                while self.at_punct(","):
                    self.advance()
                    args.append(self.term(ARG_PRIORITY))
                self.expect(")")
                return Compound(tok.value, args)
            return Atom(tok.value)
        if tok.kind == "punct":
            if tok.text == "(":
                self.advance()
                inner = self.term(MAX_PRIORITY)
                self.expect(")")
                return inner
            if tok.text == "[":
                self.advance()
                if self.at_punct("]"):
                    self.advance()
                    return NIL
                items = [self.term(ARG_PRIORITY)]
                while self.at_punct(","):
                    self.advance()
                    items.append(self.term(ARG_PRIORITY))
                tail = NIL
                if self.at_punct("|"):
                    self.advance()
                    tail = self.term(ARG_PRIORITY)
                self.expect("]")
                return make_list(items, tail)
        if tok.kind == "eof":
            raise self.error("unexpected end of input")
        if tok.kind == "end":
            raise self.error("unexpected end of clause")
        raise self.error(f"unexpected {tok.text!r}")

    def clause(self) -> Clause:
        start_tok = self.tok
        head = self.term(ARG_PRIORITY)
        if not isinstance(head, (Atom, Compound)):
            raise self.error("clause head must be an atom or compound", start_tok)
        body = TRUE
        if self.at_punct(":-"):
            self.advance()
            body = self.term(MAX_PRIORITY)
        if self.tok.kind != "end":
            found = self.tok.text or "end of input"
            raise self.error(f"expected '.' to end clause, found {found!r}", start=start_tok.start)
        self.advance()
        return Clause(head, body)


def _too_deep() -> ParseError:
    return ParseError("term nesting too deep")


def parse_term(text: str) -> Term:
    """Read one term; a trailing full stop is allowed."""
    if not text.strip():
        raise ParseError("empty input")
    p = _Parser(text)
    try:
        t = p.term(MAX_PRIORITY)
    except RecursionError:
        raise _too_deep() from None
    if p.tok.kind == "end":
        p.advance()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after term")
    return t


def parse_program(text: str) -> List[Clause]:
    p = _Parser(text)
    clauses = []
    try:
        while p.tok.kind != "eof":
            clauses.append(p.clause())
    except RecursionError:
        raise _too_deep() from None
    return clauses


def parse_clause(text: str) -> Clause:
    clauses = parse_program(text)
    if len(clauses) != 1:
        raise ParseError(f"expected exactly one clause, found {len(clauses)}")
    return clauses[0]


# -- printing ---------------------------------------------------------------

_PLAIN_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_QUOTE_ESCAPES = {"\\": "\\\\", "'": "\\'", "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def quote_atom(name: str, functor: bool = False) -> str:
    # a bare [] only reads back as an atom, never as a functor name
    if _PLAIN_ATOM.match(name) or (name == "[]" and not functor):
        return name
    out = []
    for c in name:
        if c in _QUOTE_ESCAPES:
            out.append(_QUOTE_ESCAPES[c])
        elif ord(c) < 0x20 or ord(c) == 0x7F:
            out.append(f"\\x{ord(c):x}\\")
        else:
            out.append(c)
    return "'" + "".join(out) + "'"


def _format_float(x: float) -> str:
    s = repr(x)
    if "inf" in s or "nan" in s:
        return s
    mantissa, e, exponent = s.partition("e")
    if "." not in mantissa:
        mantissa += ".0"
    return mantissa + e + exponent


def print_term(t: Term, max_priority: int = MAX_PRIORITY) -> str:
    out: List[str] = []
    # work items are literal strings or (term, priority) pairs, popped LIFO
    work: List[object] = [(t, max_priority)]
    while work:
        item = work.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        t, max_priority = item
        if isinstance(t, Atom):
            out.append(quote_atom(t.name))
        elif isinstance(t, Var):
            out.append(t.name)
        elif isinstance(t, IntTerm):
            out.append(str(t.value))
        elif isinstance(t, FloatTerm):
            out.append(_format_float(t.value))
        elif isinstance(t, ForeignRef):
            out.append(f"<jref:{t.id}>")
        elif isinstance(t, Compound):
            work.extend(reversed(_layout(t, max_priority)))
        else:
            raise TypeError(f"not a term: {t!r}")
    return "".join(out)


def _layout(t: Compound, max_priority: int) -> List[object]:
    if t.functor == "." and len(t.args) == 2:
        items, tail = list_items(t)
        parts: List[object] = ["["]
        for i, item in enumerate(items):
            if i:
                parts.append(",")
            parts.append((item, ARG_PRIORITY))
        if tail != NIL:
            parts += ["|", (tail, ARG_PRIORITY)]
        parts.append("]")
        return parts
    if t.functor in OPERATORS and len(t.args) == 2:
        priority, kind = OPERATORS[t.functor]
        right = priority - 1 if kind == "xfx" else priority
        parts = [(t.args[0], priority - 1), t.functor, (t.args[1], right)]
        return ["(", *parts, ")"] if priority > max_priority else parts
    parts = [quote_atom(t.functor, functor=True), "("]
    for i, arg in enumerate(t.args):
        if i:
            parts.append(",")
        parts.append((arg, ARG_PRIORITY))
    parts.append(")")
    return parts


def print_clause(c: Clause) -> str:
    head = print_term(c.head, ARG_PRIORITY)
    if c.is_fact:
        return head + "."
    return f"{head}:-{print_term(c.body)}."

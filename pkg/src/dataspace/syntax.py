"""Tokenizer and recursive-descent parser for the literal forms used in
scenario files: ``cond{...}``, ``rule{...}``, ``data{...}``, lists and atoms.

The grammar is deliberately tiny::

    value   := record | list | STRING | NUMBER | NAME | '*'
    record  := NAME '{' [field (';' field)* [';']] '}'
    field   := NAME '=' value
    list    := '[' [value (',' value)*] ']'
    call    := NAME '(' [value (',' value)*] ')'

Parsed values come back as plain Python objects (``Record``, ``list``,
``str``, ``int``, ``Wildcard``) and are interpreted by the callers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

__all__ = [
    "ScenarioSyntaxError",
    "Record",
    "Call",
    "Name",
    "WILDCARD",
    "Parser",
    "parse_value",
]


class ScenarioSyntaxError(SyntaxError):
    """Raised with a 1-based line/column and a description of what was expected."""

    def __init__(self, message: str, line: int = 1, col: int = 1, expected: str | None = None):
        detail = f"{message} (line {line}, col {col})"
        if expected:
            detail += f"; expected {expected}"
        super().__init__(detail)
        self.line = line
        self.col = col
        self.expected = expected
        self.lineno = line
        self.offset = col


class Name(str):
    """A bare identifier token, distinct from a quoted string."""


class _Wildcard:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "*"


WILDCARD = _Wildcard()


@dataclass
class Record:
    tag: str
    fields: dict[str, Any] = field(default_factory=dict)
    # column of each field name, for error reporting
    positions: dict[str, int] = field(default_factory=dict, compare=False, repr=False)
    col: int = field(default=1, compare=False, repr=False)


@dataclass
class Call:
    name: str
    args: list[Any]
    col: int = field(default=1, compare=False, repr=False)
    arg_cols: list[int] = field(default_factory=list, compare=False, repr=False)


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>-?\d+(?![\w.:@-]))
  | (?P<name>[A-Za-z0-9_][A-Za-z0-9_.:@+\-]*)
  | (?P<punct>[{}\[\]();,=*])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str, line: int) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ScenarioSyntaxError(f"unexpected character {text[pos]!r}", line, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text) + 1))
    return toks


class Parser:
    """Parser over a single line of text."""

    def __init__(self, text: str, line: int = 1):
        self.text = text
        self.line = line
        self.toks = _tokenize(text, line)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, expected: str | None = None, col: int | None = None):
        return ScenarioSyntaxError(message, self.line, col or self.tok.col, expected)

    def at(self, text: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == text

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            got = self.tok.text or "end of line"
            raise self.error(f"unexpected {got!r}", expected=repr(text))
        tok = self.tok
        self.i += 1
        return tok

    def name(self) -> Name:
        if self.tok.kind != "name":
            got = self.tok.text or "end of line"
            raise self.error(f"unexpected {got!r}", expected="identifier")
        tok = self.tok
        self.i += 1
        return Name(tok.text)

    def at_end(self) -> bool:
        return self.tok.kind == "eof"

    def end(self) -> None:
        if not self.at_end():
            raise self.error(f"trailing input {self.tok.text!r}", expected="end of line")

    def value(self) -> Any:
        tok = self.tok
        if tok.kind == "string":
            self.i += 1
            return bytes(tok.text[1:-1], "utf-8").decode("unicode_escape")
        if tok.kind == "number":
            self.i += 1
            return int(tok.text)
        if tok.kind == "punct" and tok.text == "*":
            self.i += 1
            return WILDCARD
        if tok.kind == "punct" and tok.text == "[":
            return self.list_()
        if tok.kind == "name":
            self.i += 1
            if self.at("{"):
                return self.record(tok)
            return Name(tok.text)
        got = tok.text or "end of line"
        raise self.error(f"unexpected {got!r}", expected="value")

    def list_(self) -> list[Any]:
        self.expect("[")
        items: list[Any] = []
        if not self.at("]"):
            items.append(self.value())
            while self.at(","):
                self.i += 1
                items.append(self.value())
        self.expect("]")
        return items

    def record(self, head: _Tok) -> Record:
        rec = Record(head.text, col=head.col)
        self.expect("{")
        while not self.at("}"):
            key_tok = self.tok
            key = self.name()
            if key in rec.fields:
                raise self.error(f"duplicate field {key!r}", col=key_tok.col)
            self.expect("=")
            rec.fields[key] = self.value()
            rec.positions[key] = key_tok.col
            if self.at(";"):
                self.i += 1
            elif not self.at("}"):
                raise self.error(f"unexpected {self.tok.text or 'end of line'!r}", expected="';' or '}'")
        self.expect("}")
        return rec

    def call(self) -> Call:
        head = self.tok
        name = self.name()
        self.expect("(")
        args: list[Any] = []
        cols: list[int] = []
        if not self.at(")"):
            cols.append(self.tok.col)
            args.append(self.value())
            while self.at(","):
                self.i += 1
                cols.append(self.tok.col)
                args.append(self.value())
        self.expect(")")
        return Call(name, args, col=head.col, arg_cols=cols)


def parse_value(text: str, line: int = 1) -> Any:
    p = Parser(text, line)
    v = p.value()
    p.end()
    return v

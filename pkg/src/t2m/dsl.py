"""Reader and printer for ``.t2m`` machine descriptions.

Grammar::

    file    := machine+
    machine := "machine" IDENT "{" "start" IDENT ";" stmt* "}"
    stmt    := IDENT ":" body ";"
    body    := "s" "->" IDENT
             | "t" D012 "->" IDENT "," IDENT
             | ("l" | "r") D012 "->" IDENT
             | "w" D123 "=" BIT "->" IDENT
             | "accept" | "reject"
             | "?" "cont" "=" IDENT "query" "=" IDENT

``#`` starts a comment.  A ``# layer: k`` comment on the same line as a
statement attaches layer tag ``k`` to that vertex.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import MachineSyntaxError
from .machine import (Accept, Branch, MachineGraph, MoveLeft, MoveRight, Query, Reject,
                      Start, Write, validate_graph)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, NUM, PUNCT, LAYER, EOF
    text: str
    span: SourceSpan


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<layer>\#[ \t]*layer[ \t]*:[ \t]*(?P<layer_n>\d+)[^\n]*)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<num>\d+)
  | (?P<punct>[{}:;,=?])
""", re.VERBOSE)


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        span = SourceSpan(line, pos - line_start + 1)
        if m is None:
            raise MachineSyntaxError(span, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "layer":
            tokens.append(Token("LAYER", m.group("layer_n"), span))
        elif kind == "arrow":
            tokens.append(Token("PUNCT", "->", span))
        elif kind == "ident":
            tokens.append(Token("IDENT", m.group(), span))
        elif kind == "num":
            tokens.append(Token("NUM", m.group(), span))
        elif kind == "punct":
            tokens.append(Token("PUNCT", m.group(), span))
        pos = m.end()
    tokens.append(Token("EOF", "", SourceSpan(line, pos - line_start + 1)))
    return tokens


_BRANCH = re.compile(r"t(\d+)$")
_MOVE = re.compile(r"([lr])(\d+)$")
_WRITE = re.compile(r"w(\d+)$")


class _Parser:
    def __init__(self, text):
        toks = tokenize(text)
        # layer comments are side information, not grammar tokens
        self.layer_marks = {t.span.line: int(t.text) for t in toks if t.kind == "LAYER"}
        self.toks = [t for t in toks if t.kind != "LAYER"]
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def fail(self, tok, message):
        raise MachineSyntaxError(tok.span, message)

    def expect(self, text):
        tok = self.next()
        if tok.text != text or tok.kind not in ("PUNCT", "IDENT"):
            what = tok.text or "end of input"
            self.fail(tok, f"expected {text!r}, found {what!r}")
        return tok

    def ident(self, what="identifier"):
        tok = self.next()
        if tok.kind != "IDENT":
            self.fail(tok, f"expected {what}, found {tok.text or 'end of input'!r}")
        return tok

    def file(self):
        machines = [self.machine()]
        while self.peek().kind != "EOF":
            machines.append(self.machine())
        return machines

    def machine(self):
        self.expect("machine")
        name = self.ident("machine name").text
        self.expect("{")
        self.expect("start")
        start = self.ident("start vertex").text
        self.expect(";")
        labels, succ, tags = {}, {}, {}
        while self.peek().text != "}":
            if self.peek().kind == "EOF":
                self.fail(self.peek(), "unterminated machine body, expected '}'")
            name_tok = self.ident("vertex name")
            if name_tok.text in labels:
                self.fail(name_tok, f"duplicate definition of vertex {name_tok.text!r}")
            self.expect(":")
            label, targets = self.body()
            end = self.expect(";")
            labels[name_tok.text] = label
            succ[name_tok.text] = targets
            if end.span.line in self.layer_marks:
                tags[name_tok.text] = self.layer_marks[end.span.line]
        self.expect("}")
        m = MachineGraph(name, labels, succ, start, tags or None)
        validate_graph(m)
        return m

    def bit(self):
        tok = self.next()
        if tok.kind != "NUM" or tok.text not in ("0", "1"):
            self.fail(tok, f"expected a bit, found {tok.text!r}")
        return int(tok.text)

    def body(self):
        tok = self.next()
        word = tok.text
        if tok.kind == "PUNCT" and word == "?":
            self.expect("cont")
            self.expect("=")
            cont = self.ident().text
            self.expect("query")
            self.expect("=")
            query = self.ident().text
            return Query(), (cont, query)
        if tok.kind != "IDENT":
            self.fail(tok, f"expected a label, found {word or 'end of input'!r}")
        if word == "accept":
            return Accept(), ()
        if word == "reject":
            return Reject(), ()
        if word == "s":
            self.expect("->")
            return Start(), (self.ident().text,)
        m = _BRANCH.match(word)
        if m:
            if int(m.group(1)) not in (0, 1, 2):
                self.fail(tok, "branch labels exist only for tapes 0-2")
            self.expect("->")
            a = self.ident().text
            self.expect(",")
            b = self.ident().text
            return Branch(int(m.group(1))), (a, b)
        m = _MOVE.match(word)
        if m:
            if int(m.group(2)) not in (0, 1, 2):
                self.fail(tok, "head moves exist only for tapes 0-2")
            self.expect("->")
            cls = MoveLeft if m.group(1) == "l" else MoveRight
            return cls(int(m.group(2))), (self.ident().text,)
        m = _WRITE.match(word)
        if m:
            if int(m.group(1)) not in (1, 2, 3):
                self.fail(tok, "writes exist only for tapes 1-3")
            self.expect("=")
            b = self.bit()
            self.expect("->")
            return Write(int(m.group(1)), b), (self.ident().text,)
        self.fail(tok, f"unknown label {word!r}")


def parse_file(text: str) -> list:
    return _Parser(text).file()


def parse_machine(text: str) -> MachineGraph:
    p = _Parser(text)
    m = p.machine()
    if p.peek().kind != "EOF":
        p.fail(p.peek(), "expected a single machine")
    return m


def _body_text(label, succ):
    if isinstance(label, Query):
        return f"? cont={succ[0]} query={succ[1]}"
    if isinstance(label, Branch):
        return f"{label.text()} -> {succ[0]}, {succ[1]}"
    if succ:
        return f"{label.text()} -> {succ[0]}"
    return label.text()


def print_machine(m: MachineGraph) -> str:
    validate_graph(m)
    order = [m.start] + [v for v in m.labels if v != m.start]
    lines = [f"machine {m.name} {{", f"  start {m.start};"]
    for v in order:
        line = f"  {v}: {_body_text(m.labels[v], m.successors[v])};"
        if m.layer_tags and v in m.layer_tags:
            line += f"  # layer: {m.layer_tags[v]}"
        lines.append(line)
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_machine(path) -> MachineGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_machine(fh.read())

"""Lexer, AST and recursive-descent parser for ``.knl`` kernel sources.

    var int n in;
    var float A[16] out;
    begin
      for i := 0 to n - 1 do
        A[i] := float(i) * 0.5;
      end
    end

Comments run from ``#`` to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from ..tac import Literal, TypeTag

KEYWORDS = frozenset(
    {"var", "int", "float", "bool", "in", "out", "begin", "end", "if", "then", "else",
     "while", "do", "for", "to", "and", "or", "not", "true", "false"}
)

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<float>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|<=|>=|==|!=|[-+*/%<>()\[\];,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # int, float, ident, keyword, op, eof, error
    lexeme: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens; unknown characters become ``error`` tokens."""
    toks = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            toks.append(Token("error", text[pos], line, col))
            pos += 1
            continue
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            if kind == "ident" and lexeme in KEYWORDS:
                kind = "keyword"
            toks.append(Token(kind, lexeme, line, col))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


class SourceError(ValueError):
    def __init__(self, line: int, column: int, msg: str, expected: frozenset = frozenset()):
        text = f"{line}:{column}: {msg}"
        if expected:
            text += f" (expected one of: {', '.join(sorted(expected))})"
        super().__init__(text)
        self.line = line
        self.column = column
        self.expected = expected


# -- AST ------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    lit: Literal
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Name:
    name: str
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Index:
    name: str
    index: "Expr"
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Bin:
    op: str
    a: "Expr"
    b: "Expr"
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Un:
    op: str  # neg, not, int_to_float
    a: "Expr"
    pos: tuple = field(default=(0, 0), compare=False)


Expr = Union[Num, Name, Index, Bin, Un]


@dataclass(frozen=True)
class Assign:
    name: str
    index: Optional[Expr]
    value: Expr
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple
    orelse: tuple
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class For:
    var: str
    lo: Expr
    hi: Expr
    body: tuple
    pos: tuple = field(default=(0, 0), compare=False)


Stmt = Union[Assign, If, While, For]


@dataclass(frozen=True)
class Decl:
    name: str
    type: TypeTag
    length: Optional[int] = None
    is_input: bool = False
    is_output: bool = False
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SourceAst:
    decls: tuple
    body: tuple


# -- parser -----------------------------------------------------------------------

_COMPARE = {"<": "lt", "<=": "le", ">": "gt", ">=": "ge", "==": "eq", "!=": "ne"}
_ADD = {"+": "add", "-": "sub"}
_MUL = {"*": "mul", "/": "div", "%": "mod"}
_PRIMARY_START = frozenset({"(", "identifier", "number", "true", "false", "-", "not", "float"})


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, expected=frozenset()):
        t = self.tok
        if t.kind == "error":
            msg = f"unexpected character {t.lexeme!r}"
        raise SourceError(t.line, t.column, msg, frozenset(expected))

    def at(self, lexeme: str) -> bool:
        t = self.tok
        return t.lexeme == lexeme and t.kind in ("keyword", "op")

    def accept(self, lexeme: str) -> bool:
        if self.at(lexeme):
            self.i += 1
            return True
        return False

    def expect(self, lexeme: str) -> Token:
        t = self.tok
        if not self.at(lexeme):
            self.error(f"unexpected {t.lexeme or 'end of input'!r}", {lexeme})
        self.i += 1
        return t

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "ident":
            self.error(f"unexpected {t.lexeme or 'end of input'!r}", {"identifier"})
        self.i += 1
        return t

    def program(self) -> SourceAst:
        decls = []
        while self.at("var"):
            decls.append(self.decl())
        self.expect("begin")
        body = self.block({"end"})
        self.expect("end")
        if self.tok.kind != "eof":
            self.error(f"trailing input {self.tok.lexeme!r}", {"end of input"})
        return SourceAst(tuple(decls), body)

    def decl(self) -> Decl:
        start = self.expect("var")
        t = self.tok
        if t.lexeme not in ("int", "float", "bool") or t.kind != "keyword":
            self.error(f"unexpected {t.lexeme!r}", {"int", "float", "bool"})
        self.i += 1
        tag = TypeTag(t.lexeme)
        name = self.ident().lexeme
        length = None
        if self.accept("["):
            n = self.tok
            if n.kind != "int" or int(n.lexeme) < 1:
                self.error("array length must be a positive integer", {"integer"})
            self.i += 1
            length = int(n.lexeme)
            tag = tag.array_of()
            self.expect("]")
        is_in = self.accept("in")
        is_out = self.accept("out")
        self.expect(";")
        return Decl(name, tag, length, is_in, is_out, (start.line, start.column))

    def block(self, stop: set) -> tuple:
        stmts = []
        while not any(self.at(s) for s in stop):
            stmts.append(self.statement(stop))
        return tuple(stmts)

    def statement(self, stop) -> Stmt:
        t = self.tok
        pos = (t.line, t.column)
        if self.accept("if"):
            cond = self.expr()
            self.expect("then")
            then = self.block({"else", "end"})
            orelse = ()
            if self.accept("else"):
                orelse = self.block({"end"})
            self.expect("end")
            self.accept(";")
            return If(cond, then, orelse, pos)
        if self.accept("while"):
            cond = self.expr()
            self.expect("do")
            body = self.block({"end"})
            self.expect("end")
            self.accept(";")
            return While(cond, body, pos)
        if self.accept("for"):
            var = self.ident().lexeme
            self.expect(":=")
            lo = self.expr()
            self.expect("to")
            hi = self.expr()
            self.expect("do")
            body = self.block({"end"})
            self.expect("end")
            self.accept(";")
            return For(var, lo, hi, body, pos)
        if t.kind == "ident":
            name = self.ident().lexeme
            index = None
            if self.accept("["):
                index = self.expr()
                self.expect("]")
            self.expect(":=")
            value = self.expr()
            self.expect(";")
            return Assign(name, index, value, pos)
        self.error(
            f"unexpected {t.lexeme or 'end of input'!r}",
            {"identifier", "if", "while", "for"} | set(stop),
        )

    def expr(self) -> Expr:
        return self.or_expr()

    def or_expr(self):
        a = self.and_expr()
        while self.at("or"):
            t = self.tok
            self.i += 1
            a = Bin("or", a, self.and_expr(), (t.line, t.column))
        return a

    def and_expr(self):
        a = self.not_expr()
        while self.at("and"):
            t = self.tok
            self.i += 1
            a = Bin("and", a, self.not_expr(), (t.line, t.column))
        return a

    def not_expr(self):
        t = self.tok
        if self.accept("not"):
            return Un("not", self.not_expr(), (t.line, t.column))
        return self.compare()

    def compare(self):
        a = self.additive()
        t = self.tok
        if t.kind == "op" and t.lexeme in _COMPARE:
            self.i += 1
            return Bin(_COMPARE[t.lexeme], a, self.additive(), (t.line, t.column))
        return a

    def additive(self):
        a = self.term()
        while self.tok.kind == "op" and self.tok.lexeme in _ADD:
            t = self.tok
            self.i += 1
            a = Bin(_ADD[t.lexeme], a, self.term(), (t.line, t.column))
        return a

    def term(self):
        a = self.unary()
        while self.tok.kind == "op" and self.tok.lexeme in _MUL:
            t = self.tok
            self.i += 1
            a = Bin(_MUL[t.lexeme], a, self.unary(), (t.line, t.column))
        return a

    def unary(self):
        t = self.tok
        if self.accept("-"):
            inner = self.unary()
            if isinstance(inner, Num) and inner.lit.tag is not TypeTag.BOOL:
                return Num(Literal(inner.lit.tag, -inner.lit.value), (t.line, t.column))
            return Un("neg", inner, (t.line, t.column))
        return self.primary()

    def primary(self):
        t = self.tok
        pos = (t.line, t.column)
        if t.kind == "int":
            self.i += 1
            return Num(Literal(TypeTag.INT, int(t.lexeme)), pos)
        if t.kind == "float":
            self.i += 1
            return Num(Literal(TypeTag.FLOAT, float(t.lexeme)), pos)
        if self.accept("true"):
            return Num(Literal(TypeTag.BOOL, True), pos)
        if self.accept("false"):
            return Num(Literal(TypeTag.BOOL, False), pos)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "keyword" and t.lexeme == "float":
            self.i += 1
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return Un("int_to_float", e, pos)
        if t.kind == "ident":
            self.i += 1
            if self.accept("["):
                idx = self.expr()
                self.expect("]")
                return Index(t.lexeme, idx, pos)
            return Name(t.lexeme, pos)
        self.error(f"unexpected {t.lexeme or 'end of input'!r}", _PRIMARY_START)


def parse_source(text: str) -> SourceAst:
    """Parse a ``.knl`` program; raises ``SourceError`` with a position."""
    return _Parser(text).program()

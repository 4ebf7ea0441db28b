"""Textual TAC format.

    tac v1 hash=<16 hex digits>
    decl int n in
    decl float[8] A out
    0: x := a + b
    1: if x < 10 goto 3 else 2
    ...

The header is optional when parsing; when present its hash must match the
body. ``print_tac`` always emits it, and ``parse_tac(print_tac(p)) == p``.
"""

from __future__ import annotations

import hashlib
import re

from ..semantics import BIN_OPS, UN_OPS
from ..tac import (
    ArrLoad,
    ArrStore,
    BinAssign,
    CondExpr,
    CondGoto,
    Copy,
    Goto,
    Halt,
    Literal,
    Noop,
    Program,
    TypeTag,
    UnAssign,
    VarInfo,
    VarRef,
    format_literal,
)

BIN_SYMBOL = {
    "add": "+", "sub": "-", "mul": "*", "div": "/", "mod": "%",
    "lt": "<", "le": "<=", "gt": ">", "ge": ">=", "eq": "==", "ne": "!=",
    "and": "and", "or": "or",
}
SYMBOL_BIN = {v: k for k, v in BIN_SYMBOL.items()}

RESERVED = frozenset(
    {"true", "false", "inf", "nan", "goto", "if", "else", "halt", "noop", "decl",
     "and", "or", "in", "out"} | UN_OPS
)

_IDENT = re.compile(r"^[A-Za-z_%][A-Za-z0-9_]*$")
_INT = re.compile(r"^-?\d+$")
_FLOAT = re.compile(r"^-?(\d+\.\d*([eE][+-]?\d+)?|\d+[eE][+-]?\d+|inf|nan)$")
_INDEXED = re.compile(r"^([A-Za-z_%][A-Za-z0-9_]*)\[(\S+)\]$")
_DECL_TYPE = re.compile(r"^(int|float|bool)(?:\[(\d+)\])?$")
_HEADER = re.compile(r"^tac v1(?: hash=([0-9a-f]+))?$")


class TacSyntaxError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def content_hash(body: str) -> str:
    return hashlib.sha256(body.encode("utf-8")).hexdigest()[:16]


# -- printing -----------------------------------------------------------------


def format_operand(o) -> str:
    return o.name if isinstance(o, VarRef) else format_literal(o)


def format_cond(c) -> str:
    if isinstance(c, CondExpr):
        if c.op == "not":
            return f"not {format_operand(c.args[0])}"
        a, b = c.args
        return f"{format_operand(a)} {BIN_SYMBOL[c.op]} {format_operand(b)}"
    return format_operand(c)


def format_instr(ins) -> str:
    if isinstance(ins, Copy):
        return f"{ins.dst} := {format_operand(ins.src)}"
    if isinstance(ins, BinAssign):
        return f"{ins.dst} := {format_operand(ins.a)} {BIN_SYMBOL[ins.op]} {format_operand(ins.b)}"
    if isinstance(ins, UnAssign):
        return f"{ins.dst} := {ins.op} {format_operand(ins.a)}"
    if isinstance(ins, ArrLoad):
        return f"{ins.dst} := {ins.arr}[{format_operand(ins.idx)}]"
    if isinstance(ins, ArrStore):
        return f"{ins.arr}[{format_operand(ins.idx)}] := {format_operand(ins.src)}"
    if isinstance(ins, Goto):
        return f"goto {ins.target}"
    if isinstance(ins, CondGoto):
        return f"if {format_cond(ins.cond)} goto {ins.if_true} else {ins.if_false}"
    if isinstance(ins, Halt):
        return "halt"
    if isinstance(ins, Noop):
        return "noop"
    raise TypeError(f"not an instruction: {ins!r}")


def format_decl(d: VarInfo) -> str:
    base = d.type.element.value if d.type.is_array else d.type.value
    ty = f"{base}[{d.length}]" if d.type.is_array else base
    parts = ["decl", ty, d.name]
    if d.is_input:
        parts.append("in")
    if d.is_output:
        parts.append("out")
    return " ".join(parts)


def print_body(p: Program) -> str:
    lines = [format_decl(d) for d in p.decls]
    lines += [f"{i}: {format_instr(ins)}" for i, ins in enumerate(p.instrs)]
    return "\n".join(lines) + "\n"


def program_hash(p: Program) -> str:
    return content_hash(print_body(p))


def print_tac(p: Program) -> str:
    body = print_body(p)
    return f"tac v1 hash={content_hash(body)}\n{body}"


# -- parsing ------------------------------------------------------------------


def parse_operand(tok: str, line: int = 0):
    if tok == "true":
        return Literal(TypeTag.BOOL, True)
    if tok == "false":
        return Literal(TypeTag.BOOL, False)
    if _INT.match(tok):
        return Literal(TypeTag.INT, int(tok))
    if _FLOAT.match(tok):
        return Literal(TypeTag.FLOAT, float(tok))
    if _IDENT.match(tok) and tok not in RESERVED:
        return VarRef(tok)
    raise TacSyntaxError(line, f"bad operand {tok!r}")


def _name(tok: str, line: int) -> str:
    if not _IDENT.match(tok) or tok in RESERVED:
        raise TacSyntaxError(line, f"bad variable name {tok!r}")
    return tok


def _index(tok: str, line: int) -> int:
    if not _INT.match(tok):
        raise TacSyntaxError(line, f"bad instruction index {tok!r}")
    return int(tok)


def _parse_cond(toks: list[str], line: int):
    if len(toks) == 1:
        return parse_operand(toks[0], line)
    if len(toks) == 2 and toks[0] == "not":
        return CondExpr("not", (parse_operand(toks[1], line),))
    if len(toks) == 3 and toks[1] in SYMBOL_BIN:
        op = SYMBOL_BIN[toks[1]]
        if op not in ("add", "sub", "mul", "div", "mod"):
            return CondExpr(op, (parse_operand(toks[0], line), parse_operand(toks[2], line)))
    raise TacSyntaxError(line, f"bad condition {' '.join(toks)!r}")


def parse_instr(text: str, line: int = 0):
    toks = text.split()
    if not toks:
        raise TacSyntaxError(line, "empty instruction")
    head = toks[0]
    if toks == ["halt"]:
        return Halt()
    if toks == ["noop"]:
        return Noop()
    if head == "goto" and len(toks) == 2:
        return Goto(_index(toks[1], line))
    if head == "if":
        if len(toks) < 6 or toks[-4] != "goto" or toks[-2] != "else":
            raise TacSyntaxError(line, "expected 'if <cond> goto <n> else <m>'")
        cond = _parse_cond(toks[1:-4], line)
        return CondGoto(cond, _index(toks[-3], line), _index(toks[-1], line))
    if len(toks) >= 3 and toks[1] == ":=":
        rhs = toks[2:]
        m = _INDEXED.match(head)
        if m:
            if len(rhs) != 1:
                raise TacSyntaxError(line, "array store takes a single operand")
            return ArrStore(m.group(1), parse_operand(m.group(2), line), parse_operand(rhs[0], line))
        dst = _name(head, line)
        if len(rhs) == 1:
            m = _INDEXED.match(rhs[0])
            if m:
                return ArrLoad(dst, _name(m.group(1), line), parse_operand(m.group(2), line))
            return Copy(dst, parse_operand(rhs[0], line))
        if len(rhs) == 2 and rhs[0] in UN_OPS:
            return UnAssign(dst, rhs[0], parse_operand(rhs[1], line))
        if len(rhs) == 3 and rhs[1] in SYMBOL_BIN:
            op = SYMBOL_BIN[rhs[1]]
            assert op in BIN_OPS
            return BinAssign(dst, op, parse_operand(rhs[0], line), parse_operand(rhs[2], line))
    raise TacSyntaxError(line, f"unrecognised instruction {text!r}")


def parse_decl(toks: list[str], line: int) -> VarInfo:
    if len(toks) < 3:
        raise TacSyntaxError(line, "expected 'decl <type> <name> [in] [out]'")
    m = _DECL_TYPE.match(toks[1])
    if not m:
        raise TacSyntaxError(line, f"bad type {toks[1]!r}")
    tag = TypeTag(m.group(1))
    length = None
    if m.group(2) is not None:
        tag, length = tag.array_of(), int(m.group(2))
    flags = toks[3:]
    if flags not in ([], ["in"], ["out"], ["in", "out"]):
        raise TacSyntaxError(line, f"bad declaration flags {' '.join(flags)!r}")
    return VarInfo(_name(toks[2], line), tag, length, "in" in flags, "out" in flags)


def parse_tac(text: str) -> Program:
    lines = text.splitlines()
    start = 0
    expected_hash = None
    if lines and lines[0].startswith("tac"):
        m = _HEADER.match(lines[0].strip())
        if not m:
            raise TacSyntaxError(1, f"bad header {lines[0]!r}")
        expected_hash = m.group(1)
        start = 1
        if expected_hash is not None:
            body = "".join(l + "\n" for l in lines[1:])
            if content_hash(body) != expected_hash:
                raise TacSyntaxError(1, "content hash does not match the program body")

    decls, instrs = [], []
    for lineno, raw in enumerate(lines[start:], start=start + 1):
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        if s.startswith("decl "):
            if instrs:
                raise TacSyntaxError(lineno, "declarations must precede instructions")
            decls.append(parse_decl(s.split(), lineno))
            continue
        idx, sep, rest = s.partition(":")
        if not sep or not _INT.match(idx.strip()):
            raise TacSyntaxError(lineno, "expected '<index>: <instruction>'")
        if int(idx) != len(instrs):
            raise TacSyntaxError(lineno, f"instruction index {idx.strip()} out of sequence")
        instrs.append(parse_instr(rest.strip(), lineno))
    return Program(tuple(instrs), tuple(decls))

"""Lowering of ``.knl`` ASTs to three-address code."""

from __future__ import annotations

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
    Program,
    TypeTag,
    UnAssign,
    VarInfo,
    VarRef,
    binop_type,
    defs_uses,
    successors,
    unop_type,
)
from .source import Assign, Bin, For, If, Index, Name, Num, SourceAst, SourceError, Un, While

TEMP_PREFIX = "%t"

_SYMBOL = {
    "add": "+", "sub": "-", "mul": "*", "div": "/", "mod": "%", "lt": "<", "le": "<=",
    "gt": ">", "ge": ">=", "eq": "==", "ne": "!=", "and": "and", "or": "or",
    "neg": "-", "not": "not", "int_to_float": "float()",
}


class _Lowerer:
    def __init__(self, ast: SourceAst):
        self.decls: list[VarInfo] = []
        self.types: dict[str, VarInfo] = {}
        for d in ast.decls:
            if d.name in self.types:
                raise SourceError(*d.pos, f"{d.name} declared twice")
            info = VarInfo(d.name, d.type, d.length, d.is_input, d.is_output)
            self.decls.append(info)
            self.types[d.name] = info
        self.code: list = []
        self.ntemps = 0

    # -- helpers --------------------------------------------------------------

    def emit(self, ins) -> int:
        self.code.append(ins)
        return len(self.code) - 1

    def temp(self, tag: TypeTag) -> str:
        name = f"{TEMP_PREFIX}{self.ntemps}"
        self.ntemps += 1
        info = VarInfo(name, tag)
        self.decls.append(info)
        self.types[name] = info
        return name

    def scalar_var(self, name: str, pos) -> TypeTag:
        info = self.types.get(name)
        if info is None:
            raise SourceError(*pos, f"undeclared name {name}")
        if info.type.is_array:
            raise SourceError(*pos, f"array {name} used without an index")
        return info.type

    def array_var(self, name: str, pos) -> TypeTag:
        info = self.types.get(name)
        if info is None:
            raise SourceError(*pos, f"undeclared name {name}")
        if not info.type.is_array:
            raise SourceError(*pos, f"{name} is not an array")
        return info.type.element

    def index(self, e, name, pos):
        idx, tag = self.operand(e)
        if tag is not TypeTag.INT:
            raise SourceError(*pos, f"index into {name} must be int, got {tag.value}")
        return idx

    def bin_type(self, e: Bin, ta: TypeTag, tb: TypeTag) -> TypeTag:
        t = binop_type(e.op, ta, tb)
        if t is None:
            raise SourceError(
                *e.pos, f"operator {_SYMBOL[e.op]} not defined on {ta.value}, {tb.value}"
            )
        return t

    def un_type(self, e: Un, ta: TypeTag) -> TypeTag:
        t = unop_type(e.op, ta)
        if t is None:
            raise SourceError(*e.pos, f"operator {_SYMBOL[e.op]} not defined on {ta.value}")
        return t

    # -- expressions ------------------------------------------------------------

    def operand(self, e):
        """Lower ``e`` to an operand, spilling compound parts into temporaries."""
        if isinstance(e, Num):
            return e.lit, e.lit.tag
        if isinstance(e, Name):
            return VarRef(e.name), self.scalar_var(e.name, e.pos)
        tag = self.type_of(e)
        dst = self.temp(tag)
        self.assign_into(dst, e)
        return VarRef(dst), tag

    def type_of(self, e) -> TypeTag:
        """Type of a compound expression without emitting code."""
        if isinstance(e, Num):
            return e.lit.tag
        if isinstance(e, Name):
            return self.scalar_var(e.name, e.pos)
        if isinstance(e, Index):
            return self.array_var(e.name, e.pos)
        if isinstance(e, Bin):
            return self.bin_type(e, self.type_of(e.a), self.type_of(e.b))
        return self.un_type(e, self.type_of(e.a))

    def assign_into(self, dst: str, e):
        """Emit code computing ``e`` with the final instruction writing ``dst``."""
        if isinstance(e, Index):
            self.array_var(e.name, e.pos)
            idx = self.index(e.index, e.name, e.pos)
            self.emit(ArrLoad(dst, e.name, idx))
        elif isinstance(e, Bin):
            a, ta = self.operand(e.a)
            b, tb = self.operand(e.b)
            self.bin_type(e, ta, tb)
            self.emit(BinAssign(dst, e.op, a, b))
        elif isinstance(e, Un):
            a, ta = self.operand(e.a)
            self.un_type(e, ta)
            self.emit(UnAssign(dst, e.op, a))
        else:
            src, _ = self.operand(e)
            self.emit(Copy(dst, src))

    def cond(self, e):
        """Lower a boolean test to a CondGoto condition."""
        if isinstance(e, Bin):
            a, ta = self.operand(e.a)
            b, tb = self.operand(e.b)
            if self.bin_type(e, ta, tb) is not TypeTag.BOOL:
                raise SourceError(*e.pos, "condition must be bool")
            return CondExpr(e.op, (a, b))
        if isinstance(e, Un) and e.op == "not":
            a, ta = self.operand(e.a)
            self.un_type(e, ta)
            return CondExpr("not", (a,))
        c, tag = self.operand(e)
        if tag is not TypeTag.BOOL:
            pos = getattr(e, "pos", (0, 0))
            raise SourceError(*pos, f"condition must be bool, got {tag.value}")
        return c

    # -- statements ---------------------------------------------------------------

    def block(self, stmts):
        for s in stmts:
            self.stmt(s)

    def stmt(self, s):
        if isinstance(s, Assign):
            if s.index is None:
                want = self.scalar_var(s.name, s.pos)
                got = self.type_of(s.value)
                if got is not want:
                    raise SourceError(
                        *s.pos, f"cannot assign {got.value} to {s.name} of type {want.value}"
                    )
                self.assign_into(s.name, s.value)
            else:
                want = self.array_var(s.name, s.pos)
                idx = self.index(s.index, s.name, s.pos)
                val, got = self.operand(s.value)
                if got is not want:
                    raise SourceError(
                        *s.pos, f"cannot store {got.value} into {s.name} of {want.value}"
                    )
                self.emit(ArrStore(s.name, idx, val))
        elif isinstance(s, If):
            c = self.cond(s.cond)
            br = self.emit(None)
            self.block(s.then)
            if s.orelse:
                jump = self.emit(None)
                else_start = len(self.code)
                self.block(s.orelse)
                self.code[jump] = Goto(len(self.code))
            else:
                else_start = len(self.code)
            self.code[br] = CondGoto(c, br + 1, else_start)
        elif isinstance(s, While):
            self.loop(s.cond, s.body, None)
        elif isinstance(s, For):
            if self.scalar_var(s.var, s.pos) is not TypeTag.INT:
                raise SourceError(*s.pos, f"loop variable {s.var} must be int")
            for bound in (s.lo, s.hi):
                if self.type_of(bound) is not TypeTag.INT:
                    raise SourceError(*s.pos, "loop bounds must be int")
            # Both bounds are evaluated once, before the loop variable is set.
            hi, _ = self.operand(s.hi)
            if isinstance(hi, VarRef) and not hi.name.startswith(TEMP_PREFIX):
                frozen = self.temp(TypeTag.INT)
                self.emit(Copy(frozen, hi))
                hi = VarRef(frozen)
            self.assign_into(s.var, s.lo)
            step = BinAssign(s.var, "add", VarRef(s.var), Literal(TypeTag.INT, 1))
            self.loop(CondExpr("le", (VarRef(s.var), hi)), s.body, step)
        else:
            raise TypeError(f"unknown statement {s!r}")

    def loop(self, cond, body, step):
        head = len(self.code)
        c = cond if isinstance(cond, CondExpr) else self.cond(cond)
        br = self.emit(None)
        self.block(body)
        if step is not None:
            self.emit(step)
        self.emit(Goto(head))
        self.code[br] = CondGoto(c, br + 1, len(self.code))

    def program(self, ast: SourceAst) -> Program:
        self.block(ast.body)
        self.emit(Halt())
        return Program(tuple(self.code), tuple(self.decls))


def lower(ast: SourceAst) -> Program:
    """Lower ``ast`` to TAC; semantic errors raise ``SourceError``."""
    return _Lowerer(ast).program(ast)


def compile_source(text: str) -> Program:
    from .source import parse_source

    return lower(parse_source(text))


def unassigned_temp_uses(p: Program) -> list[tuple[int, str]]:
    """Temporaries that some path may read before writing (forward must-analysis)."""
    temps = frozenset(d.name for d in p.decls if d.name.startswith(TEMP_PREFIX))
    n = len(p)
    assigned: list = [None] * n  # None = not yet reached
    assigned[0] = frozenset()
    work = [0]
    while work:
        i = work.pop()
        dst, _, _ = defs_uses(p.instrs[i])
        out = assigned[i] | {dst} if dst in temps else assigned[i]
        for s in successors(p, i):
            new = out if assigned[s] is None else assigned[s] & out
            if new != assigned[s]:
                assigned[s] = new
                work.append(s)
    bad = []
    for i, ins in enumerate(p.instrs):
        if assigned[i] is None:
            continue
        _, used, _ = defs_uses(ins)
        bad.extend((i, v) for v in sorted(used & temps - assigned[i]))
    return bad

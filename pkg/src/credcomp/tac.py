"""Three-address code programs.

A program is a flat, indexed instruction sequence; execution starts at index 0
and every path has to end in ``halt`` or a branch (falling off the end is a
validation error). Variables are declared up front with a type and optional
``in``/``out`` markers; declared outputs form the program's observables.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Union

from .semantics import (
    ARITH_OPS,
    BIN_OPS,
    BOOL_OPS,
    COMPARE_OPS,
    INT_MAX,
    INT_MIN,
    UN_OPS,
    float_key,
)


class TypeTag(enum.Enum):
    INT = "int"
    FLOAT = "float"
    BOOL = "bool"
    ARR_INT = "int[]"
    ARR_FLOAT = "float[]"
    ARR_BOOL = "bool[]"

    @property
    def is_array(self) -> bool:
        return self in _ELEMENT

    @property
    def element(self) -> "TypeTag":
        return _ELEMENT[self]

    def array_of(self) -> "TypeTag":
        return _ARRAY[self]

    def default(self):
        """Zero value used for uninitialised scalars and array cells."""
        tag = self.element if self.is_array else self
        return {TypeTag.INT: 0, TypeTag.FLOAT: 0.0, TypeTag.BOOL: False}[tag]


_ELEMENT = {
    TypeTag.ARR_INT: TypeTag.INT,
    TypeTag.ARR_FLOAT: TypeTag.FLOAT,
    TypeTag.ARR_BOOL: TypeTag.BOOL,
}
_ARRAY = {v: k for k, v in _ELEMENT.items()}


@dataclass(frozen=True, eq=False)
class Literal:
    """A typed scalar constant.

    Equality is bit-level for floats (``-0.0 != 0.0``) with every NaN equal
    to every other NaN, so literals can serve as dictionary keys.
    """

    tag: TypeTag
    value: Union[int, float, bool]

    def _key(self):
        if self.tag is TypeTag.FLOAT:
            return (self.tag, float_key(self.value))
        return (self.tag, self.value)

    def __eq__(self, other):
        return isinstance(other, Literal) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Literal({format_literal(self)})"

    @classmethod
    def of(cls, value) -> "Literal":
        if isinstance(value, bool):
            return cls(TypeTag.BOOL, value)
        if isinstance(value, int):
            return cls(TypeTag.INT, value)
        if isinstance(value, float):
            return cls(TypeTag.FLOAT, value)
        raise TypeError(f"no literal for {value!r}")


def format_literal(lit: Literal) -> str:
    """Source-style spelling: ``3``, ``2.5``, ``true``."""
    if lit.tag is TypeTag.BOOL:
        return "true" if lit.value else "false"
    if lit.tag is TypeTag.FLOAT:
        return repr(float(lit.value))
    return str(lit.value)


@dataclass(frozen=True)
class VarRef:
    name: str


Operand = Union[VarRef, Literal]


@dataclass(frozen=True)
class CondExpr:
    """Single-operator boolean test used directly by a conditional goto.

    ``op`` is a comparison, ``and``/``or`` (two args) or ``not`` (one arg).
    """

    op: str
    args: tuple


Cond = Union[VarRef, Literal, CondExpr]


@dataclass(frozen=True)
class Copy:
    dst: str
    src: Operand


@dataclass(frozen=True)
class BinAssign:
    dst: str
    op: str
    a: Operand
    b: Operand


@dataclass(frozen=True)
class UnAssign:
    dst: str
    op: str
    a: Operand


@dataclass(frozen=True)
class ArrLoad:
    dst: str
    arr: str
    idx: Operand


@dataclass(frozen=True)
class ArrStore:
    arr: str
    idx: Operand
    src: Operand


@dataclass(frozen=True)
class Goto:
    target: int


@dataclass(frozen=True)
class CondGoto:
    cond: Cond
    if_true: int
    if_false: int


@dataclass(frozen=True)
class Halt:
    pass


@dataclass(frozen=True)
class Noop:
    pass


Instruction = Union[Copy, BinAssign, UnAssign, ArrLoad, ArrStore, Goto, CondGoto, Halt, Noop]
ASSIGNMENTS = (Copy, BinAssign, UnAssign, ArrLoad)
BRANCHES = (Goto, CondGoto)


@dataclass(frozen=True)
class VarInfo:
    name: str
    type: TypeTag
    length: int | None = None
    is_input: bool = False
    is_output: bool = False


@dataclass(frozen=True)
class Program:
    """Instruction sequence plus declarations.

    Outputs are the ``is_output`` declarations, in declaration order.
    """

    instrs: tuple
    decls: tuple

    def __len__(self) -> int:
        return len(self.instrs)

    @cached_property
    def vars(self) -> dict[str, VarInfo]:
        return {d.name: d for d in self.decls}

    @cached_property
    def outputs(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.decls if d.is_output)

    @cached_property
    def inputs(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.decls if d.is_input)

    @cached_property
    def scalars(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.decls if not d.type.is_array)

    @cached_property
    def arrays(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.decls if d.type.is_array)

    def with_instrs(self, instrs: Iterable[Instruction]) -> "Program":
        return Program(tuple(instrs), self.decls)


# -- structural queries -------------------------------------------------------


def successors(p: Program, i: int) -> tuple[int, ...]:
    """Control successors of instruction ``i`` (duplicates collapsed)."""
    ins = p.instrs[i]
    if isinstance(ins, Goto):
        return (ins.target,)
    if isinstance(ins, CondGoto):
        if ins.if_true == ins.if_false:
            return (ins.if_true,)
        return (ins.if_true, ins.if_false)
    if isinstance(ins, Halt):
        return ()
    return (i + 1,)


def predecessors(p: Program) -> list[list[int]]:
    preds: list[list[int]] = [[] for _ in p.instrs]
    for i in range(len(p)):
        for s in successors(p, i):
            if s < len(p):
                preds[s].append(i)
    return preds


def operand_vars(ops) -> set[str]:
    return {o.name for o in ops if isinstance(o, VarRef)}


def cond_operands(cond: Cond) -> tuple:
    return cond.args if isinstance(cond, CondExpr) else (cond,)


def instr_operands(ins: Instruction) -> tuple:
    if isinstance(ins, Copy):
        return (ins.src,)
    if isinstance(ins, BinAssign):
        return (ins.a, ins.b)
    if isinstance(ins, UnAssign):
        return (ins.a,)
    if isinstance(ins, ArrLoad):
        return (ins.idx,)
    if isinstance(ins, ArrStore):
        return (ins.idx, ins.src)
    if isinstance(ins, CondGoto):
        return cond_operands(ins.cond)
    return ()


def defs_uses(ins: Instruction) -> tuple[str | None, frozenset, str | None]:
    """Return ``(defined scalar, used names, written array)``.

    Array reads count the array as used; an array store writes its array but
    does not list it as used.
    """
    used = operand_vars(instr_operands(ins))
    if isinstance(ins, ArrLoad):
        used.add(ins.arr)
    if isinstance(ins, ASSIGNMENTS):
        return ins.dst, frozenset(used), None
    if isinstance(ins, ArrStore):
        return None, frozenset(used), ins.arr
    return None, frozenset(used), None


def branch_targets(ins: Instruction) -> tuple[int, ...]:
    if isinstance(ins, Goto):
        return (ins.target,)
    if isinstance(ins, CondGoto):
        return (ins.if_true, ins.if_false)
    return ()


def relabel(ins: Instruction, mapping) -> Instruction:
    """Rewrite the branch targets of ``ins`` through ``mapping``."""
    if isinstance(ins, Goto):
        return Goto(mapping[ins.target])
    if isinstance(ins, CondGoto):
        return dataclasses.replace(
            ins, if_true=mapping[ins.if_true], if_false=mapping[ins.if_false]
        )
    return ins


class RetargetError(ValueError):
    pass


def retarget(p: Program, keep: Iterable[int]) -> tuple[Program, dict[int, int]]:
    """Drop every instruction not in ``keep`` and renumber branch targets.

    ``keep`` must contain 0 and be closed under successors of its members.
    Returns the new program and the old-to-new index map.
    """
    kept = sorted(set(keep))
    if not kept or kept[0] != 0:
        raise RetargetError("keep set must contain the entry instruction 0")
    index = {old: new for new, old in enumerate(kept)}
    out = []
    for old in kept:
        for s in successors(p, old):
            if s not in index:
                raise RetargetError(f"instr {old}: successor {s} is not kept")
        out.append(relabel(p.instrs[old], index))
    return p.with_instrs(out), index


# -- validation ---------------------------------------------------------------

_SCALARS = (TypeTag.INT, TypeTag.FLOAT, TypeTag.BOOL)


def binop_type(op: str, a: TypeTag, b: TypeTag) -> TypeTag | None:
    """Result type of ``a op b`` or None when ill-typed."""
    if a != b or a not in _SCALARS:
        return None
    if op in ARITH_OPS:
        return a if a in (TypeTag.INT, TypeTag.FLOAT) else None
    if op in ("lt", "le", "gt", "ge"):
        return TypeTag.BOOL if a in (TypeTag.INT, TypeTag.FLOAT) else None
    if op in ("eq", "ne"):
        return TypeTag.BOOL
    if op in BOOL_OPS:
        return TypeTag.BOOL if a is TypeTag.BOOL else None
    return None


def unop_type(op: str, a: TypeTag) -> TypeTag | None:
    if op == "neg" and a in (TypeTag.INT, TypeTag.FLOAT):
        return a
    if op == "not" and a is TypeTag.BOOL:
        return TypeTag.BOOL
    if op == "int_to_float" and a is TypeTag.INT:
        return TypeTag.FLOAT
    return None


def _literal_ok(lit: Literal) -> bool:
    if lit.tag is TypeTag.BOOL:
        return isinstance(lit.value, bool)
    if lit.tag is TypeTag.INT:
        return (
            isinstance(lit.value, int)
            and not isinstance(lit.value, bool)
            and INT_MIN <= lit.value <= INT_MAX
        )
    if lit.tag is TypeTag.FLOAT:
        return isinstance(lit.value, float)
    return False


def validate(p: Program) -> list[str]:
    """Collect well-formedness violations; an empty list means valid."""
    errs: list[str] = []
    n = len(p)
    if n == 0:
        return ["program has no instructions"]

    seen: set[str] = set()
    for d in p.decls:
        if d.name in seen:
            errs.append(f"decl {d.name}: declared twice")
        seen.add(d.name)
        if d.type.is_array and (d.length is None or d.length < 1):
            errs.append(f"decl {d.name}: arrays need a positive length")
        if not d.type.is_array and d.length is not None:
            errs.append(f"decl {d.name}: scalar with a length")

    def scalar(i, o):
        if isinstance(o, Literal):
            if not _literal_ok(o):
                errs.append(f"instr {i}: malformed literal {o!r}")
                return None
            return o.tag
        info = p.vars.get(o.name)
        if info is None:
            errs.append(f"instr {i}: undeclared variable {o.name}")
            return None
        if info.type.is_array:
            errs.append(f"instr {i}: array {o.name} used as a scalar")
            return None
        return info.type

    def dst_type(i, name):
        info = p.vars.get(name)
        if info is None:
            errs.append(f"instr {i}: undeclared variable {name}")
            return None
        if info.type.is_array:
            errs.append(f"instr {i}: cannot assign array {name} as a scalar")
            return None
        return info.type

    def array(i, name):
        info = p.vars.get(name)
        if info is None:
            errs.append(f"instr {i}: undeclared variable {name}")
            return None
        if not info.type.is_array:
            errs.append(f"instr {i}: {name} is not an array")
            return None
        return info.type.element

    def expect(i, got, want, what):
        if got is not None and want is not None and got != want:
            errs.append(f"instr {i}: {what} has type {got.value}, expected {want.value}")

    for i, ins in enumerate(p.instrs):
        if isinstance(ins, Copy):
            expect(i, scalar(i, ins.src), dst_type(i, ins.dst), f"copy into {ins.dst}")
        elif isinstance(ins, BinAssign):
            ta, tb, td = scalar(i, ins.a), scalar(i, ins.b), dst_type(i, ins.dst)
            if ins.op not in BIN_OPS:
                errs.append(f"instr {i}: unknown operator {ins.op}")
            elif ta and tb:
                rt = binop_type(ins.op, ta, tb)
                if rt is None:
                    errs.append(f"instr {i}: {ins.op} not defined on {ta.value}, {tb.value}")
                else:
                    expect(i, rt, td, f"{ins.op} result")
        elif isinstance(ins, UnAssign):
            ta, td = scalar(i, ins.a), dst_type(i, ins.dst)
            if ins.op not in UN_OPS:
                errs.append(f"instr {i}: unknown operator {ins.op}")
            elif ta:
                rt = unop_type(ins.op, ta)
                if rt is None:
                    errs.append(f"instr {i}: {ins.op} not defined on {ta.value}")
                else:
                    expect(i, rt, td, f"{ins.op} result")
        elif isinstance(ins, ArrLoad):
            te, td = array(i, ins.arr), dst_type(i, ins.dst)
            expect(i, scalar(i, ins.idx), TypeTag.INT, "index")
            expect(i, te, td, f"load from {ins.arr}")
        elif isinstance(ins, ArrStore):
            te = array(i, ins.arr)
            expect(i, scalar(i, ins.idx), TypeTag.INT, "index")
            expect(i, scalar(i, ins.src), te, f"store into {ins.arr}")
        elif isinstance(ins, CondGoto):
            c = ins.cond
            if isinstance(c, CondExpr):
                if c.op == "not" and len(c.args) == 1:
                    t = scalar(i, c.args[0])
                    rt = unop_type("not", t) if t else TypeTag.BOOL
                elif (c.op in COMPARE_OPS or c.op in BOOL_OPS) and len(c.args) == 2:
                    ta, tb = scalar(i, c.args[0]), scalar(i, c.args[1])
                    rt = binop_type(c.op, ta, tb) if ta and tb else TypeTag.BOOL
                else:
                    errs.append(f"instr {i}: bad condition operator {c.op}")
                    rt = TypeTag.BOOL
                if rt is None:
                    errs.append(f"instr {i}: ill-typed condition {c.op}")
            else:
                expect(i, scalar(i, c), TypeTag.BOOL, "condition")
        elif not isinstance(ins, (Goto, Halt, Noop)):
            errs.append(f"instr {i}: unknown instruction {ins!r}")
            continue

        for t in branch_targets(ins):
            if not (0 <= t < n):
                errs.append(f"instr {i}: target {t} out of range (N={n})")
        if not isinstance(ins, (Goto, CondGoto, Halt)) and i + 1 >= n:
            errs.append(f"instr {i}: falls through past the end of the program")
    return errs

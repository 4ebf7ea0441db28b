"""Symbolic values for the certificate checker and their simplifier.

Two symbolic values that are structurally equal after ``simplify`` denote the
same concrete value under every assignment of their symbols; the converse is
not attempted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from ..semantics import (
    ARITH_OPS,
    COMMUTATIVE_BOOL,
    COMMUTATIVE_INT,
    EvalFault,
    binop_fn,
    float_key,
    unop_fn,
)
from ..tac import Literal, TypeTag


@dataclass(frozen=True)
class Sym:
    id: int
    tag: TypeTag


@dataclass(frozen=True)
class Const:
    lit: Literal


@dataclass(frozen=True)
class App:
    """Operator application; ``tag`` is the result type."""

    op: str
    tag: TypeTag
    args: tuple


@dataclass(frozen=True)
class ArrSym:
    id: int
    tag: TypeTag  # element type
    length: int


@dataclass(frozen=True)
class ArrWrite:
    arr: object
    idx: object
    val: object


@dataclass(frozen=True)
class ArrRead:
    arr: object
    idx: object
    tag: TypeTag


Expr = Union[Sym, Const, App, ArrSym, ArrWrite, ArrRead]

TRUE = Const(Literal(TypeTag.BOOL, True))
FALSE = Const(Literal(TypeTag.BOOL, False))


def const(value) -> Const:
    return Const(Literal.of(value))


def sort_key(e) -> tuple:
    if isinstance(e, Const):
        v = e.lit.value
        k = float_key(v) if e.lit.tag is TypeTag.FLOAT else v
        return (0, e.lit.tag.value, str(k))
    if isinstance(e, Sym):
        return (1, e.id)
    if isinstance(e, ArrSym):
        return (2, e.id)
    if isinstance(e, App):
        return (3, e.op, tuple(sort_key(a) for a in e.args))
    if isinstance(e, ArrRead):
        return (4, sort_key(e.arr), sort_key(e.idx))
    return (5, sort_key(e.arr), sort_key(e.idx), sort_key(e.val))


def _operand_is_float(e) -> bool:
    return expr_tag(e) is TypeTag.FLOAT


def expr_tag(e) -> TypeTag:
    if isinstance(e, Const):
        return e.lit.tag
    if isinstance(e, (Sym, App, ArrRead)):
        return e.tag
    raise TypeError(f"array expression has no scalar type: {e!r}")


def _fold(op: str, args) -> Const | None:
    lits = [a.lit for a in args]
    is_float = lits[0].tag is TypeTag.FLOAT
    try:
        if len(lits) == 1:
            r = unop_fn(op, is_float)(lits[0].value)
            tag = TypeTag.FLOAT if op == "int_to_float" else lits[0].tag
        else:
            r = binop_fn(op, is_float)(lits[0].value, lits[1].value)
            tag = lits[0].tag if op in ARITH_OPS else TypeTag.BOOL
    except EvalFault:
        return None
    return Const(Literal(tag, r))


def _simplify_app(e: App, assumptions) -> Expr:
    args = tuple(simplify(a, assumptions) for a in e.args)
    op = e.op
    if all(isinstance(a, Const) for a in args):
        folded = _fold(op, args)
        if folded is not None:
            return folded
        return App(op, e.tag, args)
    if op == "not":
        (a,) = args
        if isinstance(a, App) and a.op == "not":
            return a.args[0]
    elif op == "and":
        a, b = args
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE:
            return a
    elif op == "or":
        a, b = args
        if a == TRUE or b == TRUE:
            return TRUE
        if a == FALSE:
            return b
        if b == FALSE:
            return a
    if len(args) == 2:
        operand_tag = expr_tag(args[0])
        if (operand_tag is TypeTag.INT and op in COMMUTATIVE_INT) or (
            operand_tag is TypeTag.BOOL and op in COMMUTATIVE_BOOL
        ):
            args = tuple(sorted(args, key=sort_key))
    out = App(op, e.tag, args)
    if assumptions:
        hit = assumptions.get(out)
        if hit is not None:
            return Const(hit)
    return out


def simplify(e: Expr, assumptions: Mapping | None = None) -> Expr:
    """Normalise ``e``.

    ``assumptions`` maps symbols and boolean expressions (in normal form) to
    literals known to hold: bindings from constant atoms and branch
    conditions along the current path.
    """
    if isinstance(e, Const):
        return e
    if isinstance(e, Sym):
        if assumptions:
            hit = assumptions.get(e)
            if hit is not None:
                return Const(hit)
        return e
    if isinstance(e, App):
        return _simplify_app(e, assumptions)
    if isinstance(e, ArrSym):
        return e
    if isinstance(e, ArrWrite):
        return ArrWrite(
            simplify(e.arr, assumptions), simplify(e.idx, assumptions), simplify(e.val, assumptions)
        )
    if isinstance(e, ArrRead):
        arr, idx = simplify(e.arr, assumptions), simplify(e.idx, assumptions)
        # Reads past writes to distinct literal cells skip those writes.
        while isinstance(arr, ArrWrite) and isinstance(idx, Const) and isinstance(arr.idx, Const):
            if arr.idx == idx:
                return arr.val
            arr = arr.arr
        if isinstance(arr, ArrWrite) and arr.idx == idx:
            return arr.val
        return ArrRead(arr, idx, e.tag)
    raise TypeError(f"not a symbolic expression: {e!r}")


def assume(assumptions: dict, cond: Expr, value: bool) -> dict:
    """Extend ``assumptions`` with ``cond == value`` and its direct consequences."""
    out = dict(assumptions)
    pending = [(cond, value)]
    while pending:
        c, v = pending.pop()
        if isinstance(c, Const):
            continue
        out[c] = Literal(TypeTag.BOOL, v)
        if isinstance(c, App):
            if c.op == "not":
                pending.append((c.args[0], not v))
            elif c.op == "and" and v:
                pending.extend((a, True) for a in c.args)
            elif c.op == "or" and not v:
                pending.extend((a, False) for a in c.args)
    return out

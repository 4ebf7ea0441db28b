"""Scalar operator semantics shared by the interpreter, folding and the checker.

Integers are 64-bit two's complement and wrap on overflow. Integer division
truncates toward zero and the remainder takes the sign of the dividend.
Floats are binary64; dividing by a float zero faults just like the integer
case. Comparisons involving NaN are false except ``ne``.
"""

from __future__ import annotations

import math
import operator
import struct

INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1

ARITH_OPS = frozenset({"add", "sub", "mul", "div", "mod"})
COMPARE_OPS = frozenset({"lt", "le", "gt", "ge", "eq", "ne"})
BOOL_OPS = frozenset({"and", "or"})
BIN_OPS = ARITH_OPS | COMPARE_OPS | BOOL_OPS
UN_OPS = frozenset({"neg", "not", "int_to_float"})

# Operators whose operands can be swapped without changing the result
# bit-for-bit. Float add/mul are left out on purpose: NaN payloads follow
# operand order.
COMMUTATIVE_INT = frozenset({"add", "mul", "eq", "ne"})
COMMUTATIVE_BOOL = frozenset({"and", "or", "eq", "ne"})

# Fault kinds raised by evaluation.
DIV_BY_ZERO = "DivByZero"
MOD_BY_ZERO = "ModByZero"
OUT_OF_BOUNDS = "OutOfBounds"


class EvalFault(Exception):
    """Evaluation of an operator faulted (division or remainder by zero)."""

    def __init__(self, kind: str):
        super().__init__(kind)
        self.kind = kind


def wrap(n: int) -> int:
    """Reduce ``n`` to the signed 64-bit range."""
    n &= 0xFFFFFFFFFFFFFFFF
    return n - (1 << 64) if n >= 1 << 63 else n


def float_key(x: float):
    """Bit-level identity of a float, with all NaNs collapsed to one key."""
    if math.isnan(x):
        return "nan"
    return struct.unpack("<q", struct.pack("<d", x))[0]


def _int_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return wrap(q if (a < 0) == (b < 0) else -q)


def _int_mod(a: int, b: int) -> int:
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


def _float_mod(a: float, b: float) -> float:
    if math.isinf(a) or math.isnan(a) or math.isnan(b):
        return math.nan
    return math.fmod(a, b)


def _checked_div(div):
    def f(a, b):
        if b == 0:
            raise EvalFault(DIV_BY_ZERO)
        return div(a, b)
    return f


def _checked_mod(mod):
    def f(a, b):
        if b == 0:
            raise EvalFault(MOD_BY_ZERO)
        return mod(a, b)
    return f


def _w(f):
    def g(a, b):
        r = f(a, b)
        return r if INT_MIN <= r <= INT_MAX else wrap(r)
    return g


_SHARED = {
    "lt": operator.lt,
    "le": operator.le,
    "gt": operator.gt,
    "ge": operator.ge,
    "eq": operator.eq,
    "ne": operator.ne,
    "and": lambda a, b: a and b,
    "or": lambda a, b: a or b,
}
_INT_BIN = dict(
    _SHARED,
    add=_w(operator.add),
    sub=_w(operator.sub),
    mul=_w(operator.mul),
    div=_checked_div(_int_div),
    mod=_checked_mod(_int_mod),
)
_FLOAT_BIN = dict(
    _SHARED,
    add=operator.add,
    sub=operator.sub,
    mul=operator.mul,
    div=_checked_div(operator.truediv),
    mod=_checked_mod(_float_mod),
)
_INT_UN = {"neg": lambda a: wrap(-a), "not": operator.not_, "int_to_float": float}
_FLOAT_UN = {"neg": operator.neg, "not": operator.not_, "int_to_float": float}


def binop_fn(op: str, is_float: bool = False):
    """Concrete implementation of a binary operator.

    ``is_float`` selects float arithmetic for the overloaded arithmetic ops;
    comparisons and boolean ops behave the same either way.
    """
    return (_FLOAT_BIN if is_float else _INT_BIN)[op]


def unop_fn(op: str, is_float: bool = False):
    return (_FLOAT_UN if is_float else _INT_UN)[op]


def eval_binop(op: str, a, b, is_float: bool = False):
    return binop_fn(op, is_float)(a, b)


def eval_unop(op: str, a, is_float: bool = False):
    return unop_fn(op, is_float)(a)


def fault_kind(op: str) -> str | None:
    """Fault kind an operator can raise, if any."""
    if op == "div":
        return DIV_BY_ZERO
    if op == "mod":
        return MOD_BY_ZERO
    return None

"""Reference interpreter for TAC programs.

``step`` is the small-step semantics written for clarity; ``Machine`` compiles
a program to per-instruction closures for the differential tests, which run
hundreds of thousands of executions. Both share the operator tables in
``semantics`` and are checked against each other in the test suite.
"""

from __future__ import annotations

import operator
import os
from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Mapping, Union

from .semantics import (
    OUT_OF_BOUNDS,
    EvalFault,
    binop_fn,
    float_key,
    unop_fn,
)
from .tac import (
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
)

DEFAULT_FUEL = 1_000_000
FUEL_ENV = "CREDCOMP_FUEL"


def default_fuel() -> int:
    return int(os.environ.get(FUEL_ENV, DEFAULT_FUEL))


@dataclass(frozen=True)
class Halted:
    outputs: tuple  # ((name, value), ...) in Program.outputs order


@dataclass(frozen=True)
class Fault:
    kind: str
    at: int


@dataclass(frozen=True)
class OutOfFuel:
    pass


Outcome = Union[Halted, Fault, OutOfFuel]


@dataclass(frozen=True)
class Store:
    values: Mapping[str, Any]
    pc: int = 0


class InputError(ValueError):
    def __init__(self, name: str, msg: str):
        super().__init__(f"{name}: {msg}")
        self.name = name


def value_key(v):
    """Comparable identity of a runtime value (floats compared bitwise)."""
    if isinstance(v, bool):
        return ("b", v)
    if isinstance(v, int):
        return ("i", v)
    if isinstance(v, float):
        return ("f", float_key(v))
    return tuple(value_key(x) for x in v)


def same_outcome(a: Outcome, b: Outcome) -> bool:
    """Observational equivalence: termination class plus output values.

    Faults compare by kind only, since passes renumber instructions.
    """
    if isinstance(a, Halted) and isinstance(b, Halted):
        return [(n, value_key(v)) for n, v in a.outputs] == [
            (n, value_key(v)) for n, v in b.outputs
        ]
    if isinstance(a, Fault) and isinstance(b, Fault):
        return a.kind == b.kind
    return type(a) is type(b)


def _scalar_ok(tag: TypeTag, v) -> bool:
    if tag is TypeTag.BOOL:
        return isinstance(v, bool)
    if tag is TypeTag.INT:
        return isinstance(v, int) and not isinstance(v, bool)
    return isinstance(v, float)


def init_store(p: Program, inputs: Mapping[str, Any]) -> Store:
    """Initial store: inputs as given, everything else zero-filled."""
    expected = set(p.inputs)
    for name in inputs:
        if name not in expected:
            raise InputError(name, "not an input of this program")
    values: dict[str, Any] = {}
    for d in p.decls:
        if d.is_input:
            if d.name not in inputs:
                raise InputError(d.name, "missing input")
            v = inputs[d.name]
            if d.type.is_array:
                el = d.type.element
                if (
                    isinstance(v, (str, bytes))
                    or not hasattr(v, "__len__")
                    or len(v) != d.length
                    or not all(_scalar_ok(el, x) for x in v)
                ):
                    raise InputError(d.name, f"expected {el.value}[{d.length}]")
                v = tuple(v)
            elif not _scalar_ok(d.type, v):
                raise InputError(d.name, f"expected {d.type.value.capitalize()}")
            values[d.name] = v
        elif d.type.is_array:
            values[d.name] = (d.type.default(),) * d.length
        else:
            values[d.name] = d.type.default()
    return Store(MappingProxyType(values), 0)


def _is_float(p: Program, o) -> bool:
    if isinstance(o, Literal):
        return o.tag is TypeTag.FLOAT
    return p.vars[o.name].type is TypeTag.FLOAT


def _value(values, o):
    return o.value if isinstance(o, Literal) else values[o.name]


def eval_cond(p: Program, values, cond) -> bool:
    if isinstance(cond, CondExpr):
        args = [_value(values, a) for a in cond.args]
        if cond.op == "not":
            return not args[0]
        return binop_fn(cond.op, _is_float(p, cond.args[0]))(*args)
    return _value(values, cond)


def step(p: Program, s: Store) -> Union[Store, Outcome]:
    """Execute the instruction at ``s.pc``."""
    ins = p.instrs[s.pc]
    vals = s.values
    nxt = s.pc + 1

    def assign(name, v):
        new = dict(vals)
        new[name] = v
        return Store(MappingProxyType(new), nxt)

    try:
        if isinstance(ins, Copy):
            return assign(ins.dst, _value(vals, ins.src))
        if isinstance(ins, BinAssign):
            fn = binop_fn(ins.op, _is_float(p, ins.a))
            return assign(ins.dst, fn(_value(vals, ins.a), _value(vals, ins.b)))
        if isinstance(ins, UnAssign):
            fn = unop_fn(ins.op, _is_float(p, ins.a))
            return assign(ins.dst, fn(_value(vals, ins.a)))
        if isinstance(ins, ArrLoad):
            arr, i = vals[ins.arr], _value(vals, ins.idx)
            if not 0 <= i < len(arr):
                return Fault(OUT_OF_BOUNDS, s.pc)
            return assign(ins.dst, arr[i])
        if isinstance(ins, ArrStore):
            arr, i = vals[ins.arr], _value(vals, ins.idx)
            if not 0 <= i < len(arr):
                return Fault(OUT_OF_BOUNDS, s.pc)
            return assign(ins.arr, arr[:i] + (_value(vals, ins.src),) + arr[i + 1:])
    except EvalFault as f:
        return Fault(f.kind, s.pc)
    if isinstance(ins, Goto):
        return Store(vals, ins.target)
    if isinstance(ins, CondGoto):
        taken = eval_cond(p, vals, ins.cond)
        return Store(vals, ins.if_true if taken else ins.if_false)
    if isinstance(ins, Halt):
        return Halted(tuple((n, vals[n]) for n in p.outputs))
    if isinstance(ins, Noop):
        return Store(vals, nxt)
    raise TypeError(f"not an instruction: {ins!r}")


def run_stepwise(p: Program, inputs: Mapping[str, Any], fuel: int) -> Outcome:
    """``run`` implemented directly on ``step``; slow, used as a cross-check."""
    s = init_store(p, inputs)
    for _ in range(fuel):
        r = step(p, s)
        if not isinstance(r, Store):
            return r
        s = r
    return OutOfFuel()


# -- compiled execution ----------------------------------------------------------

_HALT = -1


def _getter(o):
    if isinstance(o, Literal):
        v = o.value
        return lambda env: v
    return operator.itemgetter(o.name)


def _compile(p: Program, i: int, ins):
    nxt = i + 1
    if isinstance(ins, Copy):
        g, dst = _getter(ins.src), ins.dst

        def f(env):
            env[dst] = g(env)
            return nxt
    elif isinstance(ins, BinAssign):
        ga, gb, dst = _getter(ins.a), _getter(ins.b), ins.dst
        fn = binop_fn(ins.op, _is_float(p, ins.a))

        def f(env):
            env[dst] = fn(ga(env), gb(env))
            return nxt
    elif isinstance(ins, UnAssign):
        ga, dst = _getter(ins.a), ins.dst
        fn = unop_fn(ins.op, _is_float(p, ins.a))

        def f(env):
            env[dst] = fn(ga(env))
            return nxt
    elif isinstance(ins, ArrLoad):
        gi, arr, dst = _getter(ins.idx), ins.arr, ins.dst

        def f(env):
            a, k = env[arr], gi(env)
            if not 0 <= k < len(a):
                raise EvalFault(OUT_OF_BOUNDS)
            env[dst] = a[k]
            return nxt
    elif isinstance(ins, ArrStore):
        gi, gs, arr = _getter(ins.idx), _getter(ins.src), ins.arr

        def f(env):
            a, k = env[arr], gi(env)
            if not 0 <= k < len(a):
                raise EvalFault(OUT_OF_BOUNDS)
            a[k] = gs(env)
            return nxt
    elif isinstance(ins, Goto):
        t = ins.target

        def f(env):
            return t
    elif isinstance(ins, CondGoto):
        tt, ff, c = ins.if_true, ins.if_false, ins.cond
        if isinstance(c, CondExpr) and c.op == "not":
            g = _getter(c.args[0])

            def f(env):
                return ff if g(env) else tt
        elif isinstance(c, CondExpr):
            ga, gb = _getter(c.args[0]), _getter(c.args[1])
            fn = binop_fn(c.op, _is_float(p, c.args[0]))

            def f(env):
                return tt if fn(ga(env), gb(env)) else ff
        else:
            g = _getter(c)

            def f(env):
                return tt if g(env) else ff
    elif isinstance(ins, Halt):

        def f(env):
            return _HALT
    elif isinstance(ins, Noop):

        def f(env):
            return nxt
    else:
        raise TypeError(f"not an instruction: {ins!r}")
    return f


class Machine:
    """A program compiled for repeated execution."""

    def __init__(self, program: Program):
        self.program = program
        self._code = [_compile(program, i, ins) for i, ins in enumerate(program.instrs)]
        self._arrays = program.arrays

    def run(self, inputs: Mapping[str, Any], fuel: int | None = None) -> Outcome:
        fuel = default_fuel() if fuel is None else fuel
        env = dict(init_store(self.program, inputs).values)
        for a in self._arrays:
            env[a] = list(env[a])
        code = self._code
        pc = 0
        try:
            for _ in range(fuel):
                pc = code[pc](env)
                if pc == _HALT:
                    return Halted(
                        tuple(
                            (n, tuple(env[n]) if isinstance(env[n], list) else env[n])
                            for n in self.program.outputs
                        )
                    )
        except EvalFault as f:
            return Fault(f.kind, pc)
        return OutOfFuel()


def run(p: Program, inputs: Mapping[str, Any] | None = None, fuel: int | None = None) -> Outcome:
    """Run ``p`` for at most ``fuel`` steps."""
    return Machine(p).run(inputs or {}, fuel)

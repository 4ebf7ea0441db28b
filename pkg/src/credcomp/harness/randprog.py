"""Seeded random TAC programs and inputs for differential testing.

Programs are built from structured fragments (straight-line code, diamonds,
counted loops) and then decorated with the shapes that have historically
tripped checkers: self loops guarded by a flag that is never set, branches
whose arms coincide, skipped-over regions and assignments nobody reads.
Every back edge is controlled by a private counter, so apart from the rare
faulting division or out-of-range index each program halts.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

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
)

INT, FLOAT, BOOL = TypeTag.INT, TypeTag.FLOAT, TypeTag.BOOL


@dataclass(frozen=True)
class GenConfig:
    """Rates of the special shapes; each applies per generated statement."""

    self_loop_rate: float = 0.06
    same_arms_rate: float = 0.05
    unreachable_rate: float = 0.06
    dead_rate: float = 0.15
    early_halt_rate: float = 0.03
    risky_rate: float = 0.01  # variable divisor or unchecked index
    max_loop_depth: int = 2
    max_trip: int = 4


DEFAULT_CONFIG = GenConfig()

_INT_VARS = ("v0", "v1", "v2", "v3")
_FLOAT_VARS = ("w0", "w1")
_BOOL_VARS = ("c0", "c1")
_COUNTERS = ("k0", "k1", "k2")
_ARR_LEN = {"A": 4, "F": 3}


def _decls(rng: random.Random) -> tuple:
    out_a = rng.random() < 0.5
    out_c = rng.random() < 0.3
    return (
        VarInfo("a0", INT, is_input=True),
        VarInfo("a1", INT, is_input=True),
        VarInfo("f0", FLOAT, is_input=True),
        VarInfo("b0", BOOL, is_input=True),
        VarInfo("A", TypeTag.ARR_INT, 4, is_input=True, is_output=out_a),
        VarInfo("F", TypeTag.ARR_FLOAT, 3),
        VarInfo("o0", INT, is_output=True),
        VarInfo("o1", FLOAT, is_output=True),
        *(VarInfo(v, INT) for v in _INT_VARS),
        *(VarInfo(v, FLOAT) for v in _FLOAT_VARS),
        VarInfo("c0", BOOL, is_output=out_c),
        VarInfo("c1", BOOL),
        VarInfo("g", BOOL),  # never assigned: always false
        VarInfo("junk", INT),  # written, never read
        *(VarInfo(k, INT) for k in _COUNTERS),
    )


class _Gen:
    def __init__(self, seed: int, budget: int, cfg: GenConfig):
        self.rng = random.Random(seed)
        self.cfg = cfg
        self.budget = budget
        self.code: list = []
        self.decls = _decls(self.rng)
        self.depth = 0
        # Counters of enclosing loops: readable, never written by the body.
        self.live_counters: list[str] = []
        self.trips: dict[str, int] = {}

    # -- operands ----------------------------------------------------------------

    def int_lit(self) -> Literal:
        r = self.rng.random()
        if r < 0.05:
            return Literal(INT, self.rng.choice([2**63 - 1, -(2**63), 2**40]))
        return Literal(INT, self.rng.randint(-5, 9))

    def float_lit(self) -> Literal:
        r = self.rng.random()
        if r < 0.04:
            return Literal(FLOAT, self.rng.choice([math.inf, -0.0, 1e300]))
        return Literal(FLOAT, self.rng.choice([0.0, 0.5, 1.0, 1.5, 2.0, -3.25, 10.0]))

    def operand(self, tag: TypeTag, lit_rate: float = 0.3):
        rng = self.rng
        if rng.random() < lit_rate:
            if tag is INT:
                return self.int_lit()
            if tag is FLOAT:
                return self.float_lit()
            return Literal(BOOL, rng.random() < 0.5)
        if tag is INT:
            pool = ("a0", "a1") + _INT_VARS + tuple(self.live_counters)
        elif tag is FLOAT:
            pool = ("f0",) + _FLOAT_VARS
        else:
            pool = ("b0",) + _BOOL_VARS
        return VarRef(rng.choice(pool))

    def dst(self, tag: TypeTag) -> str:
        rng = self.rng
        if tag is INT:
            return rng.choice(_INT_VARS + ("o0",))
        if tag is FLOAT:
            return rng.choice(_FLOAT_VARS + ("o1",))
        return rng.choice(_BOOL_VARS)

    def index(self, arr: str):
        rng = self.rng
        n = _ARR_LEN[arr]
        if rng.random() < self.cfg.risky_rate:
            return VarRef(rng.choice(("a0", "a1")))
        usable = [k for k in self.live_counters if self.trips[k] <= n]
        if usable and rng.random() < 0.5:
            return VarRef(rng.choice(usable))
        return Literal(INT, rng.randrange(n))

    def cond(self):
        rng = self.rng
        r = rng.random()
        if r < 0.15:
            return VarRef(rng.choice(("b0",) + _BOOL_VARS))
        if r < 0.2:
            return CondExpr("not", (VarRef(rng.choice(("b0",) + _BOOL_VARS)),))
        if r < 0.27:
            return CondExpr(rng.choice(("and", "or")), (self.operand(BOOL), self.operand(BOOL)))
        tag = INT if rng.random() < 0.8 else FLOAT
        op = rng.choice(("lt", "le", "gt", "ge", "eq", "ne"))
        return CondExpr(op, (self.operand(tag, 0.1), self.operand(tag, 0.5)))

    # -- statements ----------------------------------------------------------------

    def emit(self, ins) -> int:
        self.code.append(ins)
        return len(self.code) - 1

    def assignment(self):
        rng = self.rng
        r = rng.random()
        if r < 0.5:
            op = rng.choice(("add", "sub", "mul", "add", "div", "mod"))
            a = self.operand(INT)
            if op in ("div", "mod"):
                if rng.random() < self.cfg.risky_rate:
                    b = VarRef(rng.choice(("a0", "a1", "v0")))
                else:
                    b = Literal(INT, rng.choice([1, 2, 3, -2, 7]))
            else:
                b = self.operand(INT)
            self.emit(BinAssign(self.dst(INT), op, a, b))
        elif r < 0.6:
            self.emit(Copy(self.dst(INT), self.operand(INT, 0.6)))
        elif r < 0.72:
            op = rng.choice(("add", "sub", "mul", "div"))
            b = Literal(FLOAT, rng.choice([0.5, 2.0, 4.0])) if op == "div" else self.operand(FLOAT)
            self.emit(BinAssign(self.dst(FLOAT), op, self.operand(FLOAT), b))
        elif r < 0.76:
            self.emit(UnAssign(self.dst(FLOAT), "int_to_float", self.operand(INT, 0.2)))
        elif r < 0.8:
            tag = rng.choice((INT, FLOAT))
            self.emit(UnAssign(self.dst(tag), "neg", self.operand(tag, 0.1)))
        elif r < 0.88:
            op = rng.choice(("lt", "le", "eq", "ne", "and", "or"))
            tag = BOOL if op in ("and", "or") else INT
            self.emit(BinAssign(self.dst(BOOL), op, self.operand(tag), self.operand(tag)))
        elif r < 0.9:
            self.emit(UnAssign(self.dst(BOOL), "not", self.operand(BOOL, 0.1)))
        elif r < 0.95:
            arr = rng.choice(("A", "F"))
            tag = INT if arr == "A" else FLOAT
            self.emit(ArrStore(arr, self.index(arr), self.operand(tag)))
        else:
            arr = rng.choice(("A", "F"))
            tag = INT if arr == "A" else FLOAT
            self.emit(ArrLoad(self.dst(tag), arr, self.index(arr)))

    def decoration(self) -> bool:
        """Maybe emit one special shape; returns whether it did."""
        rng, cfg = self.rng, self.cfg
        r = rng.random()
        if r < cfg.self_loop_rate:
            i = len(self.code)
            if rng.random() < 0.5:
                # Guarded by a flag that is never set.
                self.emit(CondGoto(VarRef("g"), i + 1, i + 2))
                self.emit(Goto(i + 1))
            else:
                # Skipped over entirely.
                self.emit(Goto(i + 2))
                self.emit(Goto(i + 1))
            return True
        r -= cfg.self_loop_rate
        if r < cfg.same_arms_rate:
            i = len(self.code)
            self.emit(CondGoto(self.cond(), i + 1, i + 1))
            return True
        r -= cfg.same_arms_rate
        if r < cfg.unreachable_rate:
            jump = self.emit(None)
            for _ in range(rng.randint(1, 3)):
                self.assignment()
            self.code[jump] = Goto(len(self.code))
            return True
        r -= cfg.unreachable_rate
        if r < cfg.dead_rate:
            if rng.random() < 0.7:
                self.emit(BinAssign("junk", "add", self.operand(INT), self.operand(INT)))
            else:
                self.emit(Noop())
            return True
        r -= cfg.dead_rate
        if r < cfg.early_halt_rate:
            i = len(self.code)
            self.emit(CondGoto(self.cond(), i + 1, i + 2))
            self.emit(Halt())
            return True
        return False

    def block(self, size: int):
        end = len(self.code) + size
        while len(self.code) < end:
            self.statement(end - len(self.code))

    def statement(self, room: int):
        rng = self.rng
        if self.decoration():
            return
        r = rng.random()
        if room >= 4 and r < 0.15 and self.depth < self.cfg.max_loop_depth:
            self.loop(room)
        elif room >= 3 and r < 0.3:
            self.diamond(room)
        else:
            self.assignment()

    def diamond(self, room: int):
        rng = self.rng
        br = self.emit(None)
        inner = max(1, min(room - 2, rng.randint(1, 4)))
        self.depth += 1
        self.block(inner)
        if rng.random() < 0.6:
            jump = self.emit(None)
            else_start = len(self.code)
            self.block(max(1, rng.randint(1, 3)))
            self.code[jump] = Goto(len(self.code))
        else:
            else_start = len(self.code)
        self.depth -= 1
        self.code[br] = CondGoto(self.cond(), br + 1, else_start)

    def loop(self, room: int):
        rng = self.rng
        k = _COUNTERS[len(self.live_counters)]
        trip = rng.randint(0, self.cfg.max_trip)
        self.trips[k] = trip
        self.emit(Copy(k, Literal(INT, 0)))
        head = self.emit(None)
        self.live_counters.append(k)
        self.depth += 1
        self.block(max(1, min(room - 4, rng.randint(1, 5))))
        self.depth -= 1
        self.live_counters.pop()
        self.emit(BinAssign(k, "add", VarRef(k), Literal(INT, 1)))
        self.emit(Goto(head))
        self.code[head] = CondGoto(
            CondExpr("lt", (VarRef(k), Literal(INT, trip))), head + 1, len(self.code)
        )

    def program(self) -> Program:
        self.block(max(1, self.budget - 1))
        self.emit(Halt())
        return Program(tuple(self.code), self.decls)


def gen_random_program(seed: int, size_budget: int = 24, config: GenConfig = DEFAULT_CONFIG) -> Program:
    """Deterministic, always-valid random program of roughly ``size_budget`` instructions."""
    if size_budget < 2:
        raise ValueError("size_budget must be at least 2")
    return _Gen(seed, size_budget, config).program()


def random_value(rng: random.Random, tag: TypeTag):
    r = rng.random()
    if tag is INT:
        if r < 0.1:
            return rng.choice([0, 2**63 - 1, -(2**63), -1])
        return rng.randint(-10, 10)
    if tag is FLOAT:
        if r < 0.1:
            return rng.choice([0.0, -0.0, math.inf, -math.inf, math.nan, 5e-324])
        return rng.choice([-2.5, -1.0, 0.25, 1.0, 3.0, 7.5]) * rng.randint(1, 4)
    return rng.random() < 0.5


def random_inputs(p: Program, rng: random.Random) -> dict:
    """One random input assignment for every input of ``p``."""
    out = {}
    for d in p.decls:
        if not d.is_input:
            continue
        if d.type.is_array:
            out[d.name] = [random_value(rng, d.type.element) for _ in range(d.length)]
        else:
            out[d.name] = random_value(rng, d.type)
    return out


def input_suite(p: Program, seed: int, count: int = 50) -> list[dict]:
    """``count`` deterministic input assignments; the first one is all zeros."""
    rng = random.Random(seed)
    zero = {}
    for d in p.decls:
        if d.is_input:
            zero[d.name] = [d.type.element.default()] * d.length if d.type.is_array else d.type.default()
    return [zero] + [random_inputs(p, rng) for _ in range(count - 1)]

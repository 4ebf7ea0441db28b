"""Unreachable-code elimination, dead-assignment elimination and constant
propagation/folding.

Every pass returns a ``PassResult`` holding both programs, the map from
surviving source indices to target indices, and whatever analysis facts the
matching certificate generator needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from . import dataflow
from .dataflow import BACKWARD, FORWARD, LatticeSpec
from .semantics import ARITH_OPS, EvalFault, binop_fn, unop_fn
from .tac import (
    ArrLoad,
    ArrStore,
    BinAssign,
    CondExpr,
    CondGoto,
    Copy,
    Goto,
    Literal,
    Noop,
    Program,
    TypeTag,
    UnAssign,
    VarRef,
    defs_uses,
    relabel,
    retarget,
    successors,
)


@dataclass(frozen=True)
class PassResult:
    before: Program
    after: Program
    point_map: dict[int, int]
    facts: dict[str, Any] = field(default_factory=dict)


def compose(first: dict[int, int], second: dict[int, int]) -> dict[int, int]:
    return {s: second[m] for s, m in first.items() if m in second}


# -- unreachable code ------------------------------------------------------------


def reachable(p: Program) -> set[int]:
    """Indices reachable from the entry (iterative depth-first search)."""
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for s in successors(p, i):
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return seen


def uce(p: Program) -> PassResult:
    live = reachable(p)
    after, index = retarget(p, live)
    return PassResult(p, after, index, {"reachable": frozenset(live)})


# -- dead assignments ------------------------------------------------------------


def _live_transfer(p: Program, i: int, out: frozenset) -> frozenset:
    d, used, _ = defs_uses(p.instrs[i])
    if d is not None and d in out:
        out = out - {d}
    return out | used if used else out


def liveness_spec(p: Program) -> LatticeSpec:
    return LatticeSpec(
        direction=BACKWARD,
        bottom=frozenset(),
        join=frozenset.union,
        eq=frozenset.__eq__,
        transfer=_live_transfer,
        boundary=frozenset(p.outputs),
    )


def liveness(p: Program, solver=dataflow.solve_worklist) -> list[frozenset]:
    """Variables live after each instruction."""
    return solver(p, liveness_spec(p))


def live_before(p: Program, live_after: list[frozenset], i: int) -> frozenset:
    return _live_transfer(p, i, live_after[i])


def removable(ins) -> bool:
    """Assignments whose evaluation can never fault.

    Division and remainder only qualify with a nonzero literal divisor; array
    loads never do.
    """
    if isinstance(ins, (Copy, UnAssign)):
        return True
    if isinstance(ins, BinAssign):
        if ins.op in ("div", "mod"):
            return isinstance(ins.b, Literal) and ins.b.value != 0
        return True
    return False


def dead_assignments(p: Program, live_after: list[frozenset] | None = None) -> list[int]:
    if live_after is None:
        live_after = liveness(p)
    return [
        i
        for i, ins in enumerate(p.instrs)
        if removable(ins) and ins.dst not in live_after[i]
    ]


def strip_noops(p: Program) -> tuple[Program, dict[int, int]]:
    """Delete every ``noop``; branches into a deleted run land on its successor."""
    n = len(p)
    new_index: dict[int, int] = {}
    forward = [0] * n
    kept = [i for i, ins in enumerate(p.instrs) if not isinstance(ins, Noop)]
    for k, i in enumerate(kept):
        new_index[i] = k
    nxt = None
    for i in range(n - 1, -1, -1):
        if i in new_index:
            nxt = new_index[i]
        # A valid program never ends in a noop, so nxt is set by now.
        forward[i] = nxt
    return p.with_instrs(relabel(p.instrs[i], forward) for i in kept), new_index


def dae_once(p: Program) -> PassResult:
    live_after = liveness(p)
    dead = set(dead_assignments(p, live_after))
    staged = p.with_instrs(Noop() if i in dead else ins for i, ins in enumerate(p.instrs))
    after, index = strip_noops(staged)
    return PassResult(p, after, index, {"liveness": live_after, "removed": frozenset(dead)})


def dae_fixpoint(p: Program) -> PassResult:
    """Repeat single-round DAE until a round removes nothing."""
    current = p
    total = {i: i for i in range(len(p))}
    rounds = 0
    while True:
        rounds += 1
        r = dae_once(current)
        total = compose(total, r.point_map)
        if not r.facts["removed"] and len(r.after) == len(current):
            break
        current = r.after
    return PassResult(p, current, total, {"liveness": liveness(current), "rounds": rounds})


def uce_dae(p: Program) -> PassResult:
    u = uce(p)
    d = dae_fixpoint(u.after)
    return PassResult(
        p,
        d.after,
        compose(u.point_map, d.point_map),
        {"reachable": u.facts["reachable"], "liveness": d.facts["liveness"]},
    )


# -- constant propagation ----------------------------------------------------------


class _Undef:
    def __repr__(self):
        return "Undef"


class _Unknown:
    def __repr__(self):
        return "Unknown"


UNDEF = _Undef()
UNKNOWN = _Unknown()


@dataclass(frozen=True)
class Known:
    lit: Literal


def join_const(a, b):
    if a is UNDEF:
        return b
    if b is UNDEF:
        return a
    if a is UNKNOWN or b is UNKNOWN:
        return UNKNOWN
    return a if a == b else UNKNOWN


def join_env(a, b):
    """Pointwise join; ``None`` is the environment of an unreached point."""
    if a is None:
        return b
    if b is None:
        return a
    if a is b:
        return a
    return {v: join_const(a[v], b[v]) for v in a}


def _operand_value(env, o):
    if isinstance(o, Literal):
        return Known(o)
    return env.get(o.name, UNKNOWN)


def fold_binop(op: str, a: Literal, b: Literal) -> Literal | None:
    """Evaluate ``a op b`` on literals; None when evaluation faults."""
    is_float = a.tag is TypeTag.FLOAT
    try:
        r = binop_fn(op, is_float)(a.value, b.value)
    except EvalFault:
        return None
    tag = a.tag if op in ARITH_OPS else TypeTag.BOOL
    return Literal(tag, r)


def fold_unop(op: str, a: Literal) -> Literal:
    r = unop_fn(op, a.tag is TypeTag.FLOAT)(a.value)
    tag = TypeTag.FLOAT if op == "int_to_float" else a.tag
    return Literal(tag, r)


def fold_cond(cond) -> Literal | None:
    """Value of a branch condition whose operands are all literals."""
    if isinstance(cond, CondExpr):
        if not all(isinstance(a, Literal) for a in cond.args):
            return None
        if cond.op == "not":
            return fold_unop("not", cond.args[0])
        return fold_binop(cond.op, *cond.args)
    return cond if isinstance(cond, Literal) else None


def _subst(env, o):
    if isinstance(o, VarRef):
        v = env.get(o.name)
        if isinstance(v, Known):
            return v.lit
    return o


def _subst_cond(env, cond):
    if isinstance(cond, CondExpr):
        return CondExpr(cond.op, tuple(_subst(env, a) for a in cond.args))
    return _subst(env, cond)


def _assigned_value(ins, env):
    if isinstance(ins, Copy):
        return _operand_value(env, ins.src)
    if isinstance(ins, BinAssign):
        a, b = _operand_value(env, ins.a), _operand_value(env, ins.b)
        if isinstance(a, Known) and isinstance(b, Known):
            r = fold_binop(ins.op, a.lit, b.lit)
            return Known(r) if r is not None else UNKNOWN
        return UNKNOWN
    if isinstance(ins, UnAssign):
        a = _operand_value(env, ins.a)
        return Known(fold_unop(ins.op, a.lit)) if isinstance(a, Known) else UNKNOWN
    return UNKNOWN


def _cp_transfer(p: Program, i: int, env):
    if env is None:
        return None
    ins = p.instrs[i]
    if isinstance(ins, (Copy, BinAssign, UnAssign, ArrLoad)):
        v = _assigned_value(ins, env)
        if env.get(ins.dst) == v:
            return env
        out = dict(env)
        out[ins.dst] = v
        return out
    return env


def _cp_edges(p: Program, i: int, env):
    if env is None:
        return ()
    ins = p.instrs[i]
    if isinstance(ins, CondGoto):
        taken = fold_cond(_subst_cond(env, ins.cond))
        if taken is not None:
            return (ins.if_true if taken.value else ins.if_false,)
    return successors(p, i)


def entry_env(p: Program) -> dict:
    """Constants at entry: inputs unknown, everything else its zero default."""
    return {
        d.name: UNKNOWN if d.is_input else Known(Literal(d.type, d.type.default()))
        for d in p.decls
        if not d.type.is_array
    }


def cp_spec(p: Program) -> LatticeSpec:
    return LatticeSpec(
        direction=FORWARD,
        bottom=None,
        join=join_env,
        eq=lambda a, b: a == b,
        transfer=_cp_transfer,
        boundary=entry_env(p),
        edges=_cp_edges,
        # Each variable can move Undef -> Known -> Unknown, plus reaching the point.
        height=2 * len(p.scalars) + 3,
    )


def cp_analyze(p: Program, solver=dataflow.solve_worklist) -> list:
    """Constant environment before each instruction (None if unreachable)."""
    return solver(p, cp_spec(p))


def fold_instr(ins, env):
    """Rewrite ``ins`` using the constants known before it."""
    if env is None:
        return ins
    if isinstance(ins, Copy):
        return Copy(ins.dst, _subst(env, ins.src))
    if isinstance(ins, BinAssign):
        a, b = _subst(env, ins.a), _subst(env, ins.b)
        if isinstance(a, Literal) and isinstance(b, Literal):
            r = fold_binop(ins.op, a, b)
            if r is not None:
                return Copy(ins.dst, r)
        return BinAssign(ins.dst, ins.op, a, b)
    if isinstance(ins, UnAssign):
        a = _subst(env, ins.a)
        if isinstance(a, Literal):
            return Copy(ins.dst, fold_unop(ins.op, a))
        return UnAssign(ins.dst, ins.op, a)
    if isinstance(ins, ArrLoad):
        return ArrLoad(ins.dst, ins.arr, _subst(env, ins.idx))
    if isinstance(ins, ArrStore):
        return ArrStore(ins.arr, _subst(env, ins.idx), _subst(env, ins.src))
    if isinstance(ins, CondGoto):
        cond = _subst_cond(env, ins.cond)
        taken = fold_cond(cond)
        if taken is not None:
            return Goto(ins.if_true if taken.value else ins.if_false)
        return CondGoto(cond, ins.if_true, ins.if_false)
    return ins


def cp(p: Program) -> PassResult:
    envs = cp_analyze(p)
    after = p.with_instrs(fold_instr(ins, envs[i]) for i, ins in enumerate(p.instrs))
    return PassResult(p, after, {i: i for i in range(len(p))}, {"env": envs})


PASSES = {
    "uce": uce,
    "dae": dae_fixpoint,
    "dae_once": dae_once,
    "uce_dae": uce_dae,
    "cp": cp,
}

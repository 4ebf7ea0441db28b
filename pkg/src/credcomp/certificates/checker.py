"""Certificate checker.

Each entry ``(s, t)`` claims: whenever the source is at ``s`` and the target
at ``t`` with the entry's invariant holding, every target step can be matched
by a bounded, non-empty run of source steps that lands on another entry whose
invariant then holds (or both programs halt with equal outputs, or both
fault the same way). Together with the entry pair ``(0, 0)`` holding at start
this is a stuttering simulation, so an accepted target is observationally
equivalent to its source. Entries sharing a target point are also linked:
source-only steps from one to the other must establish the latter's
invariant.

Checking is symbolic. Variables equated by the invariant share one fresh
symbol, constant atoms bind literals, and anything not mentioned gets its own
symbol on each side, so the invariant is the only cross-program knowledge.
"""

from __future__ import annotations

import itertools
from collections import defaultdict

from ..passes import reachable
from ..semantics import OUT_OF_BOUNDS, fault_kind
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
    defs_uses,
)
from .model import (
    ATOM,
    FAULT,
    HALT,
    MALFORMED,
    NO_SUCCESSOR,
    STUTTER,
    UNRESOLVED,
    Accepted,
    Certificate,
    ConstS,
    ConstT,
    EqArr,
    EqVar,
    Rejected,
    Verdict,
    is_identity_atom,
)
from .symbolic import App, ArrRead, ArrSym, ArrWrite, Const, Sym, assume, simplify


class _Reject(Exception):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(reason)
        self.reason = reason
        self.detail = detail


# -- symbolic execution ------------------------------------------------------------


class _Side:
    """Symbolic store of one program plus the fault guards it has passed."""

    def __init__(self, prog: Program, vals: dict):
        self.prog = prog
        self.vals = vals
        self.guards: list = []
    def operand(self, o):
        if isinstance(o, Literal):
            return Const(o)
        return self.vals[o.name]

    def cond(self, c, assumptions):
        if isinstance(c, CondExpr):
            args = tuple(self.operand(a) for a in c.args)
            return simplify(App(c.op, TypeTag.BOOL, args), assumptions)
        return simplify(self.operand(c), assumptions)

    def guard(self, kind: str, idx, assumptions, length=None):
        idx = simplify(idx, assumptions)
        if isinstance(idx, Const):
            v = idx.lit.value
            if length is None and v != 0:
                return
            if length is not None and 0 <= v < length:
                return
        self.guards.append((kind, length, idx))

    def execute(self, pc: int, assumptions) -> int:
        """Run the non-branch instruction at ``pc``; return the next pc."""
        ins = self.prog.instrs[pc]
        vals = self.vals
        if isinstance(ins, Copy):
            vals[ins.dst] = self.operand(ins.src)
        elif isinstance(ins, BinAssign):
            a, b = self.operand(ins.a), self.operand(ins.b)
            kind = fault_kind(ins.op)
            if kind:
                self.guard(kind, b, assumptions)
            vals[ins.dst] = simplify(
                App(ins.op, self.prog.vars[ins.dst].type, (a, b)), assumptions
            )
        elif isinstance(ins, UnAssign):
            vals[ins.dst] = simplify(
                App(ins.op, self.prog.vars[ins.dst].type, (self.operand(ins.a),)), assumptions
            )
        elif isinstance(ins, ArrLoad):
            idx = self.operand(ins.idx)
            self.guard(OUT_OF_BOUNDS, idx, assumptions, self.prog.vars[ins.arr].length)
            vals[ins.dst] = simplify(
                ArrRead(vals[ins.arr], idx, self.prog.vars[ins.dst].type), assumptions
            )
        elif isinstance(ins, ArrStore):
            idx = self.operand(ins.idx)
            self.guard(OUT_OF_BOUNDS, idx, assumptions, self.prog.vars[ins.arr].length)
            vals[ins.arr] = simplify(
                ArrWrite(vals[ins.arr], idx, self.operand(ins.src)), assumptions
            )
        elif not isinstance(ins, Noop):
            raise TypeError(f"execute() on control instruction {ins!r}")
        return pc + 1


def _initial_stores(src: Program, tgt: Program, inv) -> tuple[dict, dict]:
    parent: dict = {}

    def find(x):
        while parent.get(x, x) != x:
            x = parent[x]
        return x

    for a in inv:
        if isinstance(a, (EqVar, EqArr)):
            ra, rb = find(("s", a.src)), find(("t", a.tgt))
            if ra != rb:
                parent[ra] = rb

    bound: dict = {}
    for a in inv:
        if isinstance(a, (ConstS, ConstT)):
            root = find(("s" if isinstance(a, ConstS) else "t", a.var))
            if bound.setdefault(root, a.lit) != a.lit:
                raise _Reject(MALFORMED, f"contradictory constants for {a.var}")

    ids = itertools.count()
    symbols: dict = {}

    def value(side, d):
        root = find((side, d.name))
        if root in bound:
            return Const(bound[root])
        if root not in symbols:
            n = next(ids)
            symbols[root] = (
                ArrSym(n, d.type.element, d.length) if d.type.is_array else Sym(n, d.type)
            )
        return symbols[root]

    return (
        {d.name: value("s", d) for d in src.decls},
        {d.name: value("t", d) for d in tgt.decls},
    )


def _holds(atom, sv: dict, tv: dict, assumptions) -> bool:
    if isinstance(atom, (EqVar, EqArr)):
        return simplify(sv[atom.src], assumptions) == simplify(tv[atom.tgt], assumptions)
    if isinstance(atom, ConstS):
        return simplify(sv[atom.var], assumptions) == Const(atom.lit)
    return simplify(tv[atom.var], assumptions) == Const(atom.lit)


def _branch(cond_value, ins: CondGoto):
    """Arm selected by a simplified condition, or None when unresolved."""
    if isinstance(cond_value, Const):
        return ins.if_true if cond_value.lit.value else ins.if_false
    if ins.if_true == ins.if_false:
        return ins.if_true
    return None


class _EntryChecker:
    def __init__(self, src: Program, tgt: Program, cert: Certificate):
        self.src, self.tgt, self.cert = src, tgt, cert
        self.by_target: dict[int, set[int]] = defaultdict(set)
        for s, t in cert.entries:
            self.by_target[t].add(s)

    # Source execution from s until it reaches an entry paired with t_next
    # (after at least one step), or until it halts when t_next is None.
    def _run_source(self, side: _Side, s: int, t_next, assumptions) -> int:
        src, bound = self.src, self.cert.stutter
        stops = self.by_target.get(t_next, ()) if t_next is not None else ()
        pc, steps = s, 0
        while True:
            if steps and pc in stops:
                return pc
            if steps >= bound:
                raise _Reject(STUTTER, f"source did not reach a match for target {t_next} "
                                       f"within {bound} steps")
            ins = src.instrs[pc]
            steps += 1
            if isinstance(ins, Halt):
                if t_next is None:
                    return pc
                raise _Reject(HALT, f"source halts at {pc} but target continues to {t_next}")
            if isinstance(ins, Goto):
                pc = ins.target
            elif isinstance(ins, CondGoto):
                nxt = _branch(side.cond(ins.cond, assumptions), ins)
                if nxt is None:
                    raise _Reject(UNRESOLVED, f"source branch at {pc}")
                pc = nxt
            else:
                pc = side.execute(pc, assumptions)

    def check(self, key) -> None:
        s, t = key
        src, tgt = self.src, self.tgt
        sv, tv = _initial_stores(src, tgt, self.cert.entries[key])
        ins = tgt.instrs[t]

        if isinstance(ins, Halt):
            side = _Side(src, dict(sv))
            self._run_source(side, s, None, {})
            if side.guards:
                raise _Reject(FAULT, "source may fault before halting; target halts")
            for name in tgt.outputs:
                if simplify(side.vals[name]) != simplify(tv[name]):
                    raise _Reject(HALT, f"output {name} differs at halt")
            return

        tside = _Side(tgt, dict(tv))
        if isinstance(ins, Goto):
            arms = [(ins.target, {})]
        elif isinstance(ins, CondGoto):
            c = tside.cond(ins.cond, None)
            if isinstance(c, Const):
                arms = [(_branch(c, ins), {})]
            else:
                # Split on the condition even when both arms coincide: the
                # source may still branch on the same test (DAE can empty
                # both arms of a diamond) and needs the assumption to decide.
                arms = [(ins.if_true, assume({}, c, True)), (ins.if_false, assume({}, c, False))]
        else:
            arms = [(tside.execute(t, {}), {})]

        for t_next, assumptions in arms:
            if not self.by_target.get(t_next):
                raise _Reject(NO_SUCCESSOR, f"no entry pairs with target point {t_next}")
            side = _Side(src, dict(sv))
            s_next = self._run_source(side, s, t_next, assumptions)
            if [(k, n, simplify(e, assumptions)) for k, n, e in tside.guards] != side.guards:
                raise _Reject(FAULT, f"fault conditions differ on the way to ({s_next}, {t_next})")
            for atom in self.cert.entries[(s_next, t_next)]:
                if not _holds(atom, side.vals, tside.vals, assumptions):
                    raise _Reject(ATOM, f"{atom} at ({s_next}, {t_next})")

    def check_stutter(self, key) -> None:
        """Source-only steps: when the source can advance from ``s`` to another
        entry ``(s2, t)`` while the target stays at ``t``, the invariant of
        that entry must follow. Paths that branch on unknown values or may
        fault carry no obligation."""
        s, t = key
        others = self.by_target[t] - {s}
        if not others:
            return
        sv, tv = _initial_stores(self.src, self.tgt, self.cert.entries[key])
        side = _Side(self.src, dict(sv))
        pc = s
        for _ in range(self.cert.stutter):
            ins = self.src.instrs[pc]
            if isinstance(ins, Halt):
                return
            if isinstance(ins, Goto):
                pc = ins.target
            elif isinstance(ins, CondGoto):
                pc = _branch(side.cond(ins.cond, {}), ins)
                if pc is None:
                    return
            else:
                pc = side.execute(pc, {})
                if side.guards:
                    return
            if pc == s:
                return
            if pc in others:
                for atom in self.cert.entries[(pc, t)]:
                    if not _holds(atom, side.vals, tv, {}):
                        raise _Reject(ATOM, f"{atom} at ({pc}, {t}) after source-only steps")
                return

    # Identity fast path: the invariant only equates same-named variables, the
    # two instructions are the same up to branch renumbering, everything the
    # instruction reads is equated, and each one-step successor entry asks for
    # nothing beyond what the step preserves.
    def fast(self, key) -> bool:
        s, t = key
        inv = self.cert.entries[key]
        if not all(is_identity_atom(a) for a in inv):
            return False
        names = {a.src for a in inv}
        S, T = self.src.instrs[s], self.tgt.instrs[t]
        if type(S) is not type(T):
            return False
        if isinstance(S, Halt):
            return set(self.tgt.outputs) <= names
        dst, used, _ = defs_uses(S)
        if isinstance(S, ArrStore):
            used = used | {S.arr}
        if not used <= names:
            return False
        if isinstance(S, Goto):
            pairs = [(S.target, T.target)]
        elif isinstance(S, CondGoto):
            if S.cond != T.cond:
                return False
            pairs = [(S.if_true, T.if_true), (S.if_false, T.if_false)]
        else:
            if S != T:
                return False
            pairs = [(s + 1, t + 1)]
        allowed = names | {dst} if dst else names
        for pair in pairs:
            succ = self.cert.entries.get(pair)
            if succ is None:
                return False
            for a in succ:
                if not is_identity_atom(a) or a.src not in allowed:
                    return False
        return True


# -- structural pre-checks -----------------------------------------------------------


def _signature(p: Program, names) -> list:
    return [(n, p.vars[n].type, p.vars[n].length) for n in names]


def _precheck(src: Program, tgt: Program, cert: Certificate) -> str | None:
    if Certificate.ENTRY not in cert.entries:
        return "missing entry pair (0, 0)"
    if not 1 <= cert.stutter <= len(src):
        return f"stutter bound {cert.stutter} outside [1, {len(src)}]"
    if _signature(src, src.inputs) != _signature(tgt, tgt.inputs):
        return "programs declare different inputs"
    if _signature(src, src.outputs) != _signature(tgt, tgt.outputs):
        return "programs declare different outputs"
    for (s, t), inv in cert.entries.items():
        if not (0 <= s < len(src) and 0 <= t < len(tgt)):
            return f"entry ({s}, {t}) out of range"
        seen_s: dict = {}
        seen_t: dict = {}
        for a in inv:
            if isinstance(a, (EqVar, EqArr)):
                ds, dt = src.vars.get(a.src), tgt.vars.get(a.tgt)
                if ds is None or dt is None:
                    return f"entry ({s}, {t}): undeclared name in {a}"
                if ds.type != dt.type or ds.length != dt.length:
                    return f"entry ({s}, {t}): type mismatch in {a}"
                if ds.type.is_array != isinstance(a, EqArr):
                    return f"entry ({s}, {t}): wrong atom kind in {a}"
            else:
                prog, seen = (src, seen_s) if isinstance(a, ConstS) else (tgt, seen_t)
                d = prog.vars.get(a.var)
                if d is None or d.type.is_array or d.type != a.lit.tag:
                    return f"entry ({s}, {t}): ill-typed {a}"
                if seen.setdefault(a.var, a.lit) != a.lit:
                    return f"entry ({s}, {t}): contradictory constants for {a.var}"
    # The entry invariant must follow from how both programs start: equal
    # inputs, every other variable zero-filled.
    for a in cert.entries[Certificate.ENTRY]:
        if isinstance(a, (EqVar, EqArr)):
            ds, dt = src.vars[a.src], tgt.vars[a.tgt]
            if ds.is_input or dt.is_input:
                if not (ds.is_input and dt.is_input and a.src == a.tgt):
                    return f"entry invariant {a} does not hold initially"
        else:
            d = (src if isinstance(a, ConstS) else tgt).vars[a.var]
            if d.is_input or a.lit != Literal(d.type, d.type.default()):
                return f"entry invariant {a} does not hold initially"
    return None


def check_entry(src: Program, tgt: Program, cert: Certificate, key) -> Verdict:
    """Check the transitions out of one entry by symbolic execution."""
    try:
        checker = _EntryChecker(src, tgt, cert)
        checker.check(key)
        checker.check_stutter(key)
    except _Reject as r:
        return Rejected(key, r.reason, r.detail)
    return Accepted()


def check(src: Program, tgt: Program, cert: Certificate, *, fast_path: bool = True) -> Verdict:
    """Validate ``cert`` as evidence that ``tgt`` preserves ``src``."""
    problem = _precheck(src, tgt, cert)
    if problem:
        return Rejected(None, MALFORMED, problem)
    checker = _EntryChecker(src, tgt, cert)
    for key in cert.keys():
        try:
            if not (fast_path and checker.fast(key)):
                checker.check(key)
            checker.check_stutter(key)
        except _Reject as r:
            return Rejected(key, r.reason, r.detail)
    covered = {t for _, t in cert.entries}
    missing = sorted(reachable(tgt) - covered)
    if missing:
        return Rejected(None, NO_SUCCESSOR, f"reachable target point {missing[0]} is uncovered")
    return Accepted()

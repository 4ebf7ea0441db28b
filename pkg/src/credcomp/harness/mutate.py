"""Adversarial edits to honest pass results and certificates."""

from __future__ import annotations

import dataclasses
import math
import random
from dataclasses import dataclass

from ..certificates import Certificate, ConstS, EqArr, EqVar
from ..frontend.tactext import program_hash
from ..passes import PassResult, liveness, reachable
from ..tac import (
    ArrLoad,
    BinAssign,
    CondExpr,
    CondGoto,
    Copy,
    Goto,
    Literal,
    Program,
    TypeTag,
    UnAssign,
)

FLIP_TARGET = "flip_target"
LITERAL = "literal"
SWAP_OP = "swap_op"
DELETE_ENTRY = "delete_entry"
GARBLE_ENTRY = "garble_entry"
FALSE_ATOM = "false_atom"

PROGRAM_KINDS = (FLIP_TARGET, LITERAL, SWAP_OP)
CERT_KINDS = (DELETE_ENTRY, GARBLE_ENTRY, FALSE_ATOM)
ALL_KINDS = PROGRAM_KINDS + CERT_KINDS
# The population measured for detection strength: edits that change what a
# reachable, live instruction computes or where control goes.
SEMANTIC_KINDS = (LITERAL, FLIP_TARGET)

_SWAP = {
    "add": "sub", "sub": "add", "mul": "add", "div": "mul", "mod": "div",
    "lt": "le", "le": "lt", "gt": "ge", "ge": "gt", "eq": "ne", "ne": "eq",
    "and": "or", "or": "and",
}


@dataclass(frozen=True)
class Mutation:
    kind: str
    site: tuple
    result: PassResult
    cert: Certificate
    semantic: bool = False  # edit lands on a reachable, live program point


def _other_literal(lit: Literal, rng: random.Random) -> Literal:
    if lit.tag is TypeTag.BOOL:
        return Literal(TypeTag.BOOL, not lit.value)
    if lit.tag is TypeTag.INT:
        delta = rng.choice([1, -1, 2, 7])
        v = lit.value + delta
        if v > 2**63 - 1 or v < -(2**63):
            v = lit.value - delta
        return Literal(TypeTag.INT, v)
    v = lit.value
    if math.isnan(v) or math.isinf(v):
        return Literal(TypeTag.FLOAT, 0.0)
    return Literal(TypeTag.FLOAT, v + rng.choice([1.0, -0.5, 2.0]))


def _literal_slots(ins) -> list[str]:
    """Names of the fields of ``ins`` holding a literal operand."""
    slots = []
    for f in dataclasses.fields(ins):
        v = getattr(ins, f.name)
        if isinstance(v, Literal):
            slots.append(f.name)
        elif isinstance(v, CondExpr):
            slots.extend(f"{f.name}.{k}" for k, a in enumerate(v.args) if isinstance(a, Literal))
    return slots


def _replace_literal(ins, slot: str, rng):
    if "." in slot:
        name, k = slot.split(".")
        c = getattr(ins, name)
        args = list(c.args)
        args[int(k)] = _other_literal(args[int(k)], rng)
        return dataclasses.replace(ins, **{name: CondExpr(c.op, tuple(args))})
    return dataclasses.replace(ins, **{slot: _other_literal(getattr(ins, slot), rng)})


def _live_site(p: Program, live_after, i: int) -> bool:
    ins = p.instrs[i]
    if isinstance(ins, (Copy, BinAssign, UnAssign, ArrLoad)):
        return ins.dst in live_after[i]
    return True


def _with_target(r: PassResult, cert: Certificate, after: Program, kind, site, semantic):
    r2 = PassResult(r.before, after, r.point_map, r.facts)
    cert2 = dataclasses.replace(cert, tgt_hash=program_hash(after))
    return Mutation(kind, site, r2, cert2, semantic)


def _mutate_program(kind: str, r: PassResult, cert: Certificate, rng) -> Mutation | None:
    p = r.after
    n = len(p)
    reach = reachable(p)
    live_after = liveness(p)
    instrs = list(p.instrs)
    if kind == FLIP_TARGET:
        sites = [i for i, ins in enumerate(instrs) if isinstance(ins, (Goto, CondGoto))]
        if not sites or n < 2:
            return None
        i = rng.choice(sites)
        ins = instrs[i]
        if isinstance(ins, Goto):
            field, old = "target", ins.target
        else:
            field = rng.choice(("if_true", "if_false"))
            old = getattr(ins, field)
        new = rng.choice([k for k in range(n) if k != old])
        instrs[i] = dataclasses.replace(ins, **{field: new})
        return _with_target(r, cert, p.with_instrs(instrs), kind, (i, field, old, new), i in reach)
    if kind == LITERAL:
        sites = [(i, s) for i, ins in enumerate(instrs) for s in _literal_slots(ins)]
        if not sites:
            return None
        i, slot = rng.choice(sites)
        instrs[i] = _replace_literal(instrs[i], slot, rng)
        semantic = i in reach and _live_site(p, live_after, i)
        return _with_target(r, cert, p.with_instrs(instrs), kind, (i, slot), semantic)
    if kind == SWAP_OP:
        sites = [
            i
            for i, ins in enumerate(instrs)
            if (isinstance(ins, BinAssign) and ins.op in _SWAP)
            or (isinstance(ins, CondGoto) and isinstance(ins.cond, CondExpr) and ins.cond.op in _SWAP)
        ]
        if not sites:
            return None
        i = rng.choice(sites)
        ins = instrs[i]
        if isinstance(ins, BinAssign):
            instrs[i] = dataclasses.replace(ins, op=_SWAP[ins.op])
            old = ins.op
        else:
            old = ins.cond.op
            instrs[i] = dataclasses.replace(ins, cond=CondExpr(_SWAP[old], ins.cond.args))
        semantic = i in reach and _live_site(p, live_after, i)
        return _with_target(r, cert, p.with_instrs(instrs), kind, (i, old), semantic)
    raise ValueError(kind)


def _false_atom(r: PassResult, inv: frozenset, rng):
    src, tgt = r.before, r.after
    named = {a.src for a in inv if isinstance(a, (EqVar, EqArr))}
    consts = {a.var for a in inv if isinstance(a, ConstS)}
    shared = [
        d for d in src.decls
        if d.name in tgt.vars and tgt.vars[d.name].type == d.type and d.name not in named
    ]
    options = []
    if shared:
        options.append("eq")
    scalars = [d for d in src.decls if not d.type.is_array and d.name not in consts]
    if scalars:
        options.append("const")
    if not options:
        return None
    if rng.choice(options) == "eq":
        d = rng.choice(shared)
        return EqArr(d.name, d.name) if d.type.is_array else EqVar(d.name, d.name)
    d = rng.choice(scalars)
    lit = _other_literal(Literal(d.type, d.type.default()), rng)
    return ConstS(d.name, lit)


def _mutate_cert(kind: str, r: PassResult, cert: Certificate, rng) -> Mutation | None:
    keys = sorted(cert.entries)
    entries = dict(cert.entries)
    if kind == DELETE_ENTRY:
        key = rng.choice(keys)
        del entries[key]
        return Mutation(kind, key, r, cert.with_entries(entries))
    if kind == GARBLE_ENTRY:
        key = rng.choice(keys)
        s, t = key
        if rng.random() < 0.5 and len(r.after) > 1:
            new = (s, rng.choice([k for k in range(len(r.after)) if k != t]))
        elif len(r.before) > 1:
            new = (rng.choice([k for k in range(len(r.before)) if k != s]), t)
        else:
            return None
        if new in entries:
            return None
        entries[new] = entries.pop(key)
        return Mutation(kind, (key, new), r, cert.with_entries(entries))
    if kind == FALSE_ATOM:
        key = rng.choice(keys)
        atom = _false_atom(r, entries[key], rng)
        if atom is None:
            return None
        entries[key] = entries[key] | {atom}
        return Mutation(kind, (key, atom), r, cert.with_entries(entries))
    raise ValueError(kind)


def mutate(r: PassResult, cert: Certificate, seed: int, kinds=ALL_KINDS) -> Mutation:
    """Apply one random mutation from ``kinds``; falls back to other kinds when
    the chosen one has no site. Raises ValueError when nothing applies."""
    rng = random.Random(seed)
    order = list(kinds)
    rng.shuffle(order)
    for kind in order:
        if kind in PROGRAM_KINDS:
            m = _mutate_program(kind, r, cert, rng)
        else:
            m = _mutate_cert(kind, r, cert, rng)
        if m is not None:
            return m
    raise ValueError("no applicable mutation site")

"""Certificate data model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from ..tac import Literal, Program, format_literal


@dataclass(frozen=True)
class EqVar:
    """Source scalar ``src`` equals target scalar ``tgt``."""

    src: str
    tgt: str


@dataclass(frozen=True)
class EqArr:
    src: str
    tgt: str


@dataclass(frozen=True)
class ConstS:
    """Source scalar ``var`` holds ``lit``."""

    var: str
    lit: Literal


@dataclass(frozen=True)
class ConstT:
    var: str
    lit: Literal


Atom = Union[EqVar, EqArr, ConstS, ConstT]
Invariant = frozenset

_ORDER = {EqVar: 0, EqArr: 1, ConstS: 2, ConstT: 3}


def atom_key(a: Atom):
    if isinstance(a, (EqVar, EqArr)):
        return (_ORDER[type(a)], a.src, a.tgt, "")
    return (_ORDER[type(a)], a.var, "", format_literal(a.lit) + a.lit.tag.value)


def is_identity_atom(a: Atom) -> bool:
    return isinstance(a, (EqVar, EqArr)) and a.src == a.tgt


def identity_invariant(src: Program, tgt: Program, names=None) -> Invariant:
    """Equate every same-named variable declared identically in both programs.

    With ``names`` given, scalars are restricted to that set; arrays are
    always included.
    """
    atoms = []
    for d in src.decls:
        other = tgt.vars.get(d.name)
        if other is None or other.type != d.type or other.length != d.length:
            continue
        if d.type.is_array:
            atoms.append(EqArr(d.name, d.name))
        elif names is None or d.name in names:
            atoms.append(EqVar(d.name, d.name))
    return frozenset(atoms)


@dataclass(frozen=True)
class Certificate:
    """Point pairs with relational invariants, plus the source stutter bound."""

    entries: Mapping[tuple[int, int], Invariant]
    stutter: int = 1
    src_hash: str | None = None
    tgt_hash: str | None = None

    ENTRY = (0, 0)

    def keys(self) -> list[tuple[int, int]]:
        return sorted(self.entries)

    def with_entries(self, entries) -> "Certificate":
        return Certificate(dict(entries), self.stutter, self.src_hash, self.tgt_hash)


@dataclass(frozen=True)
class Accepted:
    def __bool__(self):
        return True


# Rejection reasons.
NO_SUCCESSOR = "no successor entry"
STUTTER = "stutter bound exceeded"
UNRESOLVED = "unresolved source branch"
ATOM = "atom not established"
HALT = "halt mismatch"
FAULT = "fault divergence"
MALFORMED = "malformed certificate"


@dataclass(frozen=True)
class Rejected:
    entry: tuple[int, int] | None
    reason: str
    detail: str = field(default="", compare=False)

    def __bool__(self):
        return False

    def __str__(self):
        where = f"entry {self.entry}" if self.entry is not None else "certificate"
        return f"rejected at {where}: {self.reason}" + (f" ({self.detail})" if self.detail else "")


Verdict = Union[Accepted, Rejected]

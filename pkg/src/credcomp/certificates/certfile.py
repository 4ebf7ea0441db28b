"""Line-oriented certificate files.

    cert v1 stutter=2 src=<hash> tgt=<hash>
    map 0 0 : eq x x eqarr A A consts y i:7

Literals are written ``i:<n>``, ``f:<decimal>`` or ``b:true|false``. Entries
and atoms are printed in a canonical order so printing is byte-stable.
"""

from __future__ import annotations

import re

from ..tac import Literal, TypeTag
from .model import Certificate, ConstS, ConstT, EqArr, EqVar, atom_key

_HEADER = re.compile(r"^cert v1 stutter=(\d+)(?: src=([0-9a-f]+))?(?: tgt=([0-9a-f]+))?$")
_ARITY2 = {"eq": EqVar, "eqarr": EqArr, "consts": ConstS, "constt": ConstT}


class CertSyntaxError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def format_cert_literal(lit: Literal) -> str:
    if lit.tag is TypeTag.INT:
        return f"i:{lit.value}"
    if lit.tag is TypeTag.FLOAT:
        return f"f:{float(lit.value)!r}"
    return "b:true" if lit.value else "b:false"


def parse_cert_literal(tok: str, line: int = 0) -> Literal:
    kind, sep, body = tok.partition(":")
    try:
        if sep and kind == "i":
            return Literal(TypeTag.INT, int(body))
        if sep and kind == "f":
            return Literal(TypeTag.FLOAT, float(body))
        if sep and kind == "b" and body in ("true", "false"):
            return Literal(TypeTag.BOOL, body == "true")
    except ValueError:
        pass
    raise CertSyntaxError(line, f"bad literal {tok!r}")


def format_atom(a) -> str:
    if isinstance(a, EqVar):
        return f"eq {a.src} {a.tgt}"
    if isinstance(a, EqArr):
        return f"eqarr {a.src} {a.tgt}"
    if isinstance(a, ConstS):
        return f"consts {a.var} {format_cert_literal(a.lit)}"
    return f"constt {a.var} {format_cert_literal(a.lit)}"


def print_cert(c: Certificate) -> str:
    header = f"cert v1 stutter={c.stutter}"
    if c.src_hash:
        header += f" src={c.src_hash}"
    if c.tgt_hash:
        header += f" tgt={c.tgt_hash}"
    lines = [header]
    for s, t in c.keys():
        atoms = " ".join(format_atom(a) for a in sorted(c.entries[(s, t)], key=atom_key))
        lines.append(f"map {s} {t} :" + (f" {atoms}" if atoms else ""))
    return "\n".join(lines) + "\n"


def parse_cert(text: str) -> Certificate:
    lines = text.splitlines()
    if not lines:
        raise CertSyntaxError(1, "empty certificate")
    m = _HEADER.match(lines[0].strip())
    if not m:
        raise CertSyntaxError(1, f"bad header {lines[0]!r}")
    entries = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        toks = raw.split()
        if not toks:
            continue
        if len(toks) < 4 or toks[0] != "map" or toks[3] != ":":
            raise CertSyntaxError(lineno, "expected 'map <s> <t> : <atom>*'")
        try:
            key = (int(toks[1]), int(toks[2]))
        except ValueError:
            raise CertSyntaxError(lineno, "bad point indices") from None
        if key in entries:
            raise CertSyntaxError(lineno, f"duplicate entry {key}")
        rest = toks[4:]
        if len(rest) % 3:
            raise CertSyntaxError(lineno, "atoms take exactly two arguments")
        atoms = []
        for k in range(0, len(rest), 3):
            kind, x, y = rest[k : k + 3]
            cls = _ARITY2.get(kind)
            if cls is None:
                raise CertSyntaxError(lineno, f"unknown atom {kind!r}")
            if cls in (ConstS, ConstT):
                atoms.append(cls(x, parse_cert_literal(y, lineno)))
            else:
                atoms.append(cls(x, y))
        entries[key] = frozenset(atoms)
    return Certificate(entries, int(m.group(1)), m.group(2), m.group(3))

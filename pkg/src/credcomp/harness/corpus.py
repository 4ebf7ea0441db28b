"""Bundled-kernel helpers: canonical inputs and the expected-output fixture."""

from __future__ import annotations

import json
from pathlib import Path

from ..interp import Fault, Halted, run
from ..tac import Program, TypeTag
from .bench import kernel_files, load_program


def _element(tag: TypeTag, i: int):
    if tag is TypeTag.INT:
        return (i * 7) % 11 - 3
    if tag is TypeTag.FLOAT:
        return 1.0 + (i % 5) * 0.25
    return i % 2 == 0


def canonical_inputs(p: Program) -> dict:
    """Fixed, kernel-independent inputs: integer scalars 12, floats 1.5."""
    out = {}
    for d in p.decls:
        if not d.is_input:
            continue
        if d.type.is_array:
            out[d.name] = [_element(d.type.element, i) for i in range(d.length)]
        elif d.type is TypeTag.INT:
            out[d.name] = 12
        elif d.type is TypeTag.FLOAT:
            out[d.name] = 1.5
        else:
            out[d.name] = True
    return out


def outcome_record(outcome) -> dict:
    if isinstance(outcome, Halted):
        return {"halted": {n: list(v) if isinstance(v, tuple) else v for n, v in outcome.outputs}}
    if isinstance(outcome, Fault):
        return {"fault": outcome.kind}
    return {"out_of_fuel": True}


def expected_outputs(corpus_dir) -> dict:
    """Interpreter outcome of every kernel on its canonical inputs."""
    return {
        path.stem: outcome_record(run(p := load_program(path), canonical_inputs(p)))
        for path in kernel_files(corpus_dir)
    }


def write_expected(corpus_dir) -> Path:
    path = Path(corpus_dir) / "expected.json"
    path.write_text(json.dumps(expected_outputs(corpus_dir), indent=1, sort_keys=True) + "\n")
    return path

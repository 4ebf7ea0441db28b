"""Bug-injection fuzzing of passes and the checker.

Every trial runs an honest pass on a random program and checks its
certificate, then mutates the result. A mutant the checker accepts is run
against the source on a differential input suite; any observable difference
is a soundness violation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, fields
from typing import Callable

from ..certificates import GENERATORS, check
from ..interp import Machine, OutOfFuel, same_outcome
from ..passes import PASSES
from ..tac import Program
from .mutate import mutate
from .randprog import gen_random_program, input_suite

FUZZ_PASSES = ("uce", "dae", "uce_dae", "cp")
DIFF_INPUTS = 50
DIFF_FUEL = 100_000


def diverging_input(src: Program, tgt: Program, inputs, fuel: int = DIFF_FUEL):
    """First input on which the two programs are observably different.

    Inputs on which the source itself runs out of fuel say nothing about
    equivalence under a step bound and are skipped.
    """
    ms, mt = Machine(src), Machine(tgt)
    for inp in inputs:
        a = ms.run(inp, fuel)
        if isinstance(a, OutOfFuel):
            continue
        if not same_outcome(a, mt.run(inp, fuel)):
            return inp
    return None


@dataclass
class FuzzReport:
    trials: int = 0
    accepted_honest: int = 0
    rejected_honest: int = 0
    rejected_mutant: int = 0
    accepted_mutant_equivalent: int = 0
    soundness_violations: int = 0
    # (trial, pass, mutation kind, site) of each violation and honest rejection
    violations: list = field(default_factory=list)
    honest_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.soundness_violations == 0 and self.rejected_honest == 0

    def __add__(self, other: "FuzzReport") -> "FuzzReport":
        merged = FuzzReport()
        for f in fields(self):
            setattr(merged, f.name, getattr(self, f.name) + getattr(other, f.name))
        return merged

    def counters(self) -> dict:
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name not in ("violations", "honest_failures")
        }


def _default_program(seed: int) -> Program:
    return gen_random_program(seed, random.Random(seed).randint(6, 40))


def fuzz(
    trials: int,
    seed: int = 0,
    *,
    make_program: Callable[[int], Program] = _default_program,
    mutator: Callable = mutate,
    passes=FUZZ_PASSES,
    checker: Callable = check,
    fast_path: bool = True,
    inputs_per_trial: int = DIFF_INPUTS,
    start: int = 0,
) -> FuzzReport:
    """Run ``trials`` independent trials numbered from ``start``.

    Reports over disjoint trial ranges with the same ``seed`` add up to the
    report of the combined range.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rep = FuzzReport()
    for trial in range(start, start + trials):
        tseed = seed * 1_000_003 + trial
        rng = random.Random(tseed)
        p = make_program(tseed)
        name = rng.choice(passes)
        r = PASSES[name](p)
        cert = GENERATORS[name](r)
        rep.trials += 1
        if checker(r.before, r.after, cert, fast_path=fast_path):
            rep.accepted_honest += 1
        else:
            rep.rejected_honest += 1
            rep.honest_failures.append((trial, name))
        m = mutator(r, cert, rng.getrandbits(32))
        if not checker(m.result.before, m.result.after, m.cert, fast_path=fast_path):
            rep.rejected_mutant += 1
            continue
        suite = input_suite(p, tseed, inputs_per_trial)
        if diverging_input(m.result.before, m.result.after, suite) is None:
            rep.accepted_mutant_equivalent += 1
        else:
            rep.soundness_violations += 1
            rep.violations.append((trial, name, m.kind, m.site))
    return rep

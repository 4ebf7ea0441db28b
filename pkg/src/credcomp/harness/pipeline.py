"""Pass pipeline in credible-compilation or plain mode, with phase timings."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple, Sequence

from ..certificates import GENERATORS, Accepted, Verdict, check
from ..passes import PASSES
from ..tac import Program

CC = "cc"
PLAIN = "plain"


@dataclass(frozen=True)
class PhaseTimings:
    """Seconds spent in each phase of one pass.

    ``total`` is read by a separate, outer pair of clock reads around the whole
    stage, so ``opt + gen + chk <= total`` up to clock resolution.
    """

    pass_name: str
    opt: float
    gen: float = 0.0
    chk: float = 0.0
    total: float = 0.0


class PipelineResult(NamedTuple):
    program: Program
    verdicts: list
    timings: list


def normalize_pass(name: str) -> str:
    """Accept ``uce-dae`` as a spelling of ``uce_dae``."""
    key = name.strip().replace("-", "_")
    if key not in PASSES:
        raise ValueError(f"unknown pass {name!r}; choose from {', '.join(sorted(PASSES))}")
    return key


def pipeline(
    p: Program,
    passes: Sequence[str],
    mode: str = CC,
    *,
    generators: Mapping[str, Callable] | None = None,
    checker: Callable[..., Verdict] = check,
    fast_path: bool = True,
    on_pass: Callable | None = None,
) -> PipelineResult:
    """Apply ``passes`` in order.

    In ``cc`` mode each pass's certificate is generated and checked; a
    rejected pass is discarded and the next pass starts from its input.
    ``on_pass(name, result, cert, verdict)`` sees every pass; ``cert`` and
    ``verdict`` are None in plain mode.
    """
    if mode not in (CC, PLAIN):
        raise ValueError(f"mode must be {CC!r} or {PLAIN!r}")
    gens = dict(GENERATORS)
    if generators:
        gens.update(generators)
    clock = time.perf_counter
    verdicts: list = []
    timings: list = []
    cur = p
    for raw in passes:
        outer = clock()
        name = normalize_pass(raw)
        t0 = clock()
        r = PASSES[name](cur)
        t1 = clock()
        if mode == PLAIN:
            cur = r.after
            timings.append(PhaseTimings(name, t1 - t0, total=clock() - outer))
            if on_pass:
                on_pass(name, r, None, None)
            continue
        cert = gens[name](r)
        t2 = clock()
        verdict = checker(r.before, r.after, cert, fast_path=fast_path)
        t3 = clock()
        verdicts.append(verdict)
        if isinstance(verdict, Accepted):
            cur = r.after
        timings.append(PhaseTimings(name, t1 - t0, t2 - t1, t3 - t2, clock() - outer))
        if on_pass:
            on_pass(name, r, cert, verdict)
    return PipelineResult(cur, verdicts, timings)

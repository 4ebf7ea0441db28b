"""Generic dataflow solver with worklist and round-robin strategies.

Facts are indexed by instruction: for a forward problem ``facts[i]`` holds
before instruction ``i``; for a backward problem it holds after it. Backward
boundary facts attach to ``halt`` instructions, the only exits.

The two strategies compute the same least fixed point and are compared in
the tests, so each one serves as the other's oracle.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

from .tac import Halt, Program, predecessors, successors

FORWARD = "forward"
BACKWARD = "backward"


class DataflowDivergence(RuntimeError):
    """The solver exceeded its iteration budget (a non-monotone transfer)."""


@dataclass(frozen=True)
class LatticeSpec:
    direction: str
    bottom: Any
    join: Callable[[Any, Any], Any]
    eq: Callable[[Any, Any], bool]
    transfer: Callable[[Program, int, Any], Any]
    boundary: Any
    # Forward problems may prune control edges given the fact before an
    # instruction; defaults to all successors.
    edges: Optional[Callable[[Program, int, Any], Iterable[int]]] = None
    # Chain height used by the divergence guard; None means vars + 2.
    height: Optional[int] = None


def _budget(p: Program, spec: LatticeSpec) -> int:
    height = spec.height if spec.height is not None else len(p.decls) + 2
    return len(p) * max(height, 1)


def _edges(p: Program, spec: LatticeSpec, i: int, fact) -> Iterable[int]:
    return spec.edges(p, i, fact) if spec.edges else successors(p, i)


def solve_worklist(p: Program, spec: LatticeSpec) -> list:
    """FIFO worklist solver seeded with every instruction."""
    n = len(p)
    budget = _budget(p, spec)
    updates = 0
    work = deque(range(n))
    queued = set(work)

    if spec.direction == FORWARD:
        facts = [spec.bottom] * n
        facts[0] = spec.join(spec.bottom, spec.boundary)
        while work:
            i = work.popleft()
            queued.discard(i)
            out = spec.transfer(p, i, facts[i])
            for s in _edges(p, spec, i, facts[i]):
                new = spec.join(facts[s], out)
                if not spec.eq(new, facts[s]):
                    facts[s] = new
                    updates += 1
                    if updates > budget:
                        raise DataflowDivergence(
                            f"worklist exceeded {budget} updates on {n} instructions"
                        )
                    if s not in queued:
                        work.append(s)
                        queued.add(s)
        return facts

    preds = predecessors(p)
    facts = [spec.bottom] * n
    while work:
        i = work.popleft()
        queued.discard(i)
        if isinstance(p.instrs[i], Halt):
            new = spec.boundary
        else:
            new = spec.bottom
            for s in successors(p, i):
                new = spec.join(new, spec.transfer(p, s, facts[s]))
        if not spec.eq(new, facts[i]):
            facts[i] = new
            updates += 1
            if updates > budget:
                raise DataflowDivergence(
                    f"worklist exceeded {budget} updates on {n} instructions"
                )
            for q in preds[i]:
                if q not in queued:
                    work.append(q)
                    queued.add(q)
    return facts


def sweep(p: Program, spec: LatticeSpec, facts: list) -> list:
    """One full recomputation of every fact from ``facts``."""
    n = len(p)
    if spec.direction == FORWARD:
        incoming = [spec.bottom] * n
        incoming[0] = spec.join(spec.bottom, spec.boundary)
        for i in range(n):
            out = spec.transfer(p, i, facts[i])
            for s in _edges(p, spec, i, facts[i]):
                incoming[s] = spec.join(incoming[s], out)
        return incoming
    new = []
    for i in range(n):
        if isinstance(p.instrs[i], Halt):
            new.append(spec.boundary)
            continue
        acc = spec.bottom
        for s in successors(p, i):
            acc = spec.join(acc, spec.transfer(p, s, facts[s]))
        new.append(acc)
    return new


def solve_roundrobin(p: Program, spec: LatticeSpec) -> list:
    """Recompute every fact per sweep until a sweep changes nothing."""
    facts = [spec.bottom] * len(p)
    budget = _budget(p, spec) + 1
    for _ in range(budget):
        new = sweep(p, spec, facts)
        if all(spec.eq(a, b) for a, b in zip(new, facts)):
            return new
        facts = new
    raise DataflowDivergence(f"round-robin did not converge within {budget} sweeps")


def is_fixed_point(p: Program, spec: LatticeSpec, facts: list) -> bool:
    return all(spec.eq(a, b) for a, b in zip(sweep(p, spec, facts), facts))

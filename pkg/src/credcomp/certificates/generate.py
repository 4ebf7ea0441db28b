"""Certificate generators, one per pass family."""

from __future__ import annotations

from ..frontend.tactext import program_hash
from ..passes import Known, PassResult, live_before, liveness, reachable
from ..tac import successors
from .model import Certificate, ConstS, identity_invariant


def _cert(r: PassResult, entries: dict, stutter: int) -> Certificate:
    return Certificate(entries, stutter, program_hash(r.before), program_hash(r.after))


def gen_cert_uce(r: PassResult) -> Certificate:
    """Full identity at every surviving point; nothing is skipped."""
    inv = identity_invariant(r.before, r.after)
    return _cert(r, {(s, t): inv for s, t in r.point_map.items()}, 1)


def _removed_runs(n: int, survivors) -> dict[int, int]:
    """Length of the run of removed indices starting at each index."""
    runs = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        runs[i] = 0 if i in survivors else runs[i + 1] + 1
    return runs


def gen_cert_uce_dae(r: PassResult) -> Certificate:
    """Equate exactly what the optimized program still reads.

    The invariant at ``(s, t)`` equates the scalars live on entry to target
    point ``t`` plus every array. Liveness is taken on the target: with
    transitively dead assignments gone, source liveness can demand equalities
    the target never re-establishes.
    """
    src, tgt = r.before, r.after
    live_after = r.facts.get("liveness")
    if live_after is None or len(live_after) != len(tgt):
        live_after = liveness(tgt)
    invs: dict = {}

    def inv_at(t):
        live = live_before(tgt, live_after, t)
        key = frozenset(v for v in live if v in src.vars)
        # Identical invariants are shared rather than rebuilt.
        if key not in invs:
            invs[key] = identity_invariant(src, tgt, key)
        return invs[key]

    entries = {(s, t): inv_at(t) for s, t in r.point_map.items()}
    entries[(0, 0)] = inv_at(0)

    n = len(src)
    survivors = set(r.point_map)
    runs = _removed_runs(n, survivors)
    # One target step covers: any removed run in front of the source point
    # (only possible at the entry pair), the surviving instruction itself,
    # and the longest removed run after any of its successors.
    stutter = 1
    for s, _ in entries:
        first = s + runs[s]
        tail = max((runs[x] for x in successors(src, first)), default=0)
        stutter = max(stutter, runs[s] + 1 + tail)
    return _cert(r, entries, min(stutter, n))


def gen_cert_cp(r: PassResult) -> Certificate:
    """Identity plus the source-side constants at each reachable target point."""
    envs = r.facts["env"]
    base = identity_invariant(r.before, r.after)
    entries = {}
    for i in sorted(reachable(r.after)):
        env = envs[i] or {}
        consts = {ConstS(v, c.lit) for v, c in env.items() if isinstance(c, Known)}
        entries[(i, i)] = base | consts
    return _cert(r, entries, 1)


GENERATORS = {
    "uce": gen_cert_uce,
    "dae": gen_cert_uce_dae,
    "dae_once": gen_cert_uce_dae,
    "uce_dae": gen_cert_uce_dae,
    "cp": gen_cert_cp,
}

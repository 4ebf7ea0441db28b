import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

import pytest

from conftest import corpus_programs, tac
from credcomp.frontend import print_tac
from credcomp.harness.fuzz import diverging_input
from credcomp.harness.randprog import gen_random_program, input_suite
from credcomp.interp import Store, init_store, step
from credcomp.passes import (
    UNKNOWN,
    Known,
    cp,
    cp_analyze,
    dae_fixpoint,
    dae_once,
    dead_assignments,
    fold_instr,
    liveness,
    reachable,
    uce,
    uce_dae,
)
from credcomp.tac import (
    BinAssign,
    CondExpr,
    CondGoto,
    Copy,
    Goto,
    Literal,
    TypeTag,
    VarRef,
    successors,
    validate,
)

seeds = st.integers(0, 10**6)
sizes = st.integers(4, 60)


def int_(v):
    return Literal(TypeTag.INT, v)


def closure(p):
    """Reachable set by boolean matrix closure (independent of the DFS)."""
    n = len(p)
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for s in successors(p, i):
            adj[i, s] = True
    reach = np.eye(n, dtype=bool)
    while True:
        nxt = reach | (reach.astype(int) @ adj.astype(int) > 0)
        if (nxt == reach).all():
            return {int(j) for j in np.flatnonzero(reach[0])}
        reach = nxt


def body(p):
    return "".join(l + "\n" for l in print_tac(p).splitlines() if l[:1].isdigit())


# -- reachable / uce -------------------------------------------------------------


def test_reachable_examples(p1, p4, p5):
    assert reachable(p1) == {0, 1, 3}
    assert reachable(p5) == {0}
    assert reachable(p4) == set(range(6))


def test_reachable_handles_long_chains():
    p = tac("decl int x\n" + "".join(f"{i}: x := {i}\n" for i in range(5000)) + "5000: halt\n")
    assert len(reachable(p)) == 5001


@settings(max_examples=100, deadline=None)
@given(seeds, sizes)
def test_reachable_matches_closure(seed, size):
    p = gen_random_program(seed, size)
    assert reachable(p) == closure(p)


def test_uce_examples(p1, p4, p5):
    r = uce(p1)
    assert body(r.after) == "0: x := 3\n1: goto 2\n2: halt\n"
    assert r.point_map == {0: 0, 1: 1, 3: 2}
    assert uce(p4).after == p4 and uce(p4).point_map == {i: i for i in range(6)}
    assert uce(p5).after == p5


# -- liveness / dae --------------------------------------------------------------


def test_liveness_examples(p3):
    after = liveness(p3)
    assert "a" in after[0] and "b" not in after[1]
    halt_only = tac("decl int x\n0: halt\n")
    assert liveness(halt_only) == [frozenset()]


def test_array_stores_never_removed():
    # Out-of-bounds stores fault, so even an unread array keeps its stores.
    p = tac("decl int[2] A\ndecl int i in\n0: A[i] := 1\n1: halt\n")
    assert dae_fixpoint(p).after == p
    assert uce_dae(p).after == p


def test_dae_once_examples(p2, p3):
    assert body(dae_once(p2).after) == "0: x := 7\n1: halt\n"
    r = dae_once(p3)
    assert body(r.after) == "0: a := 1\n1: x := 2\n2: halt\n"
    assert r.point_map == {0: 0, 2: 1, 3: 2}
    clean = tac("decl int x out\n0: x := 1\n1: halt\n")
    assert dae_once(clean).after == clean


def test_dae_fixpoint_examples(p2, p3):
    assert body(dae_fixpoint(p3).after) == "0: x := 2\n1: halt\n"
    assert dae_fixpoint(p3).point_map == {2: 0, 3: 1}
    assert dae_fixpoint(p2).after == dae_once(p2).after


def test_dae_keeps_possible_faults():
    p = tac(
        "decl int a in\ndecl int[2] A\ndecl int d\ndecl int e\ndecl int f\n"
        "0: d := 5 / a\n1: e := A[a]\n2: f := 5 / 0\n3: halt\n"
    )
    assert dae_fixpoint(p).after == p


def test_dae_removes_safe_division():
    p = tac("decl int a in\ndecl int d\n0: d := a / 2\n1: halt\n")
    assert len(dae_fixpoint(p).after) == 1


def test_dae_branch_into_removed_run():
    p = tac("decl int d\ndecl bool c in\n0: if c goto 2 else 1\n1: d := 1\n2: d := 2\n3: halt\n")
    r = dae_fixpoint(p)
    assert body(r.after) == "0: if c goto 1 else 1\n1: halt\n"
    assert not validate(r.after)


def test_uce_dae_examples(p1, p4, p5):
    p = tac("decl int x out\ndecl int y\n0: x := 3\n1: goto 3\n2: y := 4\n3: y := 9\n4: halt\n")
    r = uce_dae(p)
    assert body(r.after) == "0: x := 3\n1: goto 2\n2: halt\n"
    assert r.point_map == {0: 0, 1: 1, 4: 2}
    assert uce_dae(p4).after == p4
    assert uce_dae(p5).after == p5


@settings(max_examples=60, deadline=None)
@given(seeds, sizes)
def test_uce_minimal(seed, size):
    after = uce(gen_random_program(seed, size)).after
    assert reachable(after) == set(range(len(after)))


@settings(max_examples=60, deadline=None)
@given(seeds, sizes)
def test_dae_fixpoint_leaves_nothing_dead(seed, size):
    after = dae_fixpoint(gen_random_program(seed, size)).after
    assert dead_assignments(after) == []


@settings(max_examples=60, deadline=None)
@given(seeds, sizes)
def test_dae_fixpoint_equals_external_iteration(seed, size):
    p = gen_random_program(seed, size)
    q, pm = p, {i: i for i in range(len(p))}
    while True:
        r = dae_once(q)
        if r.after == q:
            break
        pm = {s: r.point_map[m] for s, m in pm.items() if m in r.point_map}
        q = r.after
    got = dae_fixpoint(p)
    assert got.after == q and got.point_map == pm


@settings(max_examples=60, deadline=None)
@given(seeds, sizes, st.sampled_from([uce, dae_once, dae_fixpoint, uce_dae, cp]))
def test_point_map_invariants(seed, size, pass_fn):
    r = pass_fn(gen_random_program(seed, size))
    # Entry maps to entry unless DAE removed instruction 0 itself.
    assert r.point_map.get(0, 0) == 0
    assert 0 in r.point_map.values()
    assert len(set(r.point_map.values())) == len(r.point_map)
    assert validate(r.after) == []


# -- constant propagation --------------------------------------------------------


def test_cp_analyze_p4(p4):
    envs = cp_analyze(p4)
    assert envs[1]["x"] == Known(int_(3))
    assert envs[2]["y"] == Known(int_(7))
    # The branch is resolved, so 3 is infeasible.
    assert envs[3] is None


def test_cp_inputs_unknown(p6):
    assert all(e is None or e["b"] is UNKNOWN for e in cp_analyze(p6))


def test_cp_refuses_zero_division():
    p = tac("decl int x out\n0: x := 1 / 0\n1: halt\n")
    assert cp_analyze(p)[1]["x"] is UNKNOWN
    assert cp(p).after == p


def test_fold_instr_examples():
    assert fold_instr(BinAssign("y", "add", VarRef("x"), int_(4)), {"x": Known(int_(3))}) == Copy(
        "y", int_(7)
    )
    br = CondGoto(CondExpr("lt", (VarRef("y"), int_(10))), 4, 3)
    assert fold_instr(br, {"y": Known(int_(7))}) == Goto(4)
    ins = BinAssign("x", "add", VarRef("a"), VarRef("b"))
    assert fold_instr(ins, {"a": UNKNOWN, "b": UNKNOWN}) == ins


def test_fold_wraps():
    big = Literal(TypeTag.INT, 2**63 - 1)
    assert fold_instr(BinAssign("y", "add", big, int_(1)), {}) == Copy("y", int_(-(2**63)))


def test_cp_p4(p4, p6):
    r = cp(p4)
    assert body(r.after) == (
        "0: x := 3\n1: y := 7\n2: goto 4\n3: halt\n4: z := 7\n5: halt\n"
    )
    assert r.point_map == {i: i for i in range(6)}
    assert cp(p6).after == p6
    free = tac("decl int a in\ndecl int x out\n0: x := a + a\n1: halt\n")
    assert cp(free).after == free


@settings(max_examples=60, deadline=None)
@given(seeds, sizes)
def test_cp_idempotent(seed, size):
    once = cp(gen_random_program(seed, size)).after
    assert cp(once).after == once


@settings(max_examples=40, deadline=None)
@given(seeds, sizes)
def test_cp_analyze_sound_on_traces(seed, size):
    p = gen_random_program(seed, size)
    envs = cp_analyze(p)
    for inp in input_suite(p, seed, 5):
        s = init_store(p, inp)
        for _ in range(2000):
            env = envs[s.pc]
            assert env is not None, "concrete trace reached an infeasible point"
            for name, v in env.items():
                if isinstance(v, Known):
                    assert v.lit.value == s.values[name] or (v.lit.value != v.lit.value)
            s = step(p, s)
            if not isinstance(s, Store):
                break


# -- differential preservation ---------------------------------------------------

ALL_PASSES = [uce, dae_once, dae_fixpoint, uce_dae, cp]


@pytest.mark.parametrize("pass_fn", ALL_PASSES, ids=lambda f: f.__name__)
def test_preservation_on_corpus(pass_fn):
    for name, p in corpus_programs().items():
        r = pass_fn(p)
        assert diverging_input(r.before, r.after, input_suite(p, 7, 50)) is None, name


@settings(max_examples=60, deadline=None)
@given(seeds, sizes, st.sampled_from(ALL_PASSES))
def test_preservation_on_random_programs(seed, size, pass_fn):
    p = gen_random_program(seed, size)
    r = pass_fn(p)
    assert diverging_input(r.before, r.after, input_suite(p, seed, 50)) is None

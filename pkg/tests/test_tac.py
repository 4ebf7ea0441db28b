import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import tac
from credcomp.harness.randprog import gen_random_program
from credcomp.tac import (
    ArrStore,
    BinAssign,
    Goto,
    Halt,
    Literal,
    Program,
    RetargetError,
    TypeTag,
    VarRef,
    defs_uses,
    retarget,
    successors,
    validate,
)


def test_fixtures_validate(fixtures):
    for p in fixtures.values():
        assert validate(p) == []


def test_out_of_range_target(p1):
    bad = p1.with_instrs(p1.instrs[:1] + (Goto(9),) + p1.instrs[2:])
    assert validate(bad) == ["instr 1: target 9 out of range (N=4)"]


def test_undeclared_variable(p2):
    bad = Program(p2.instrs, tuple(d for d in p2.decls if d.name != "x"))
    assert validate(bad) == ["instr 1: undeclared variable x"]


def test_fall_through_is_invalid():
    p = tac("decl int x\n0: x := 1\n")
    assert validate(p) == ["instr 0: falls through past the end of the program"]


def test_type_errors_reported():
    p = tac("decl int x\ndecl bool b\n0: x := b + 1\n1: halt\n")
    assert validate(p)


def test_successors(p1, p5, p6, p4):
    assert successors(p1, 1) == (3,)
    assert set(successors(p6, 0)) == {1}
    assert successors(p5, 0) == (0,)
    assert successors(p4, 3) == ()
    assert successors(p1, 0) == (1,)


def test_defs_uses():
    assert defs_uses(BinAssign("x", "add", VarRef("a"), VarRef("b"))) == ("x", {"a", "b"}, None)
    assert defs_uses(ArrStore("A", VarRef("i"), VarRef("t"))) == (None, {"i", "t"}, "A")
    assert defs_uses(Halt()) == (None, frozenset(), None)


def test_array_load_uses_array():
    p = tac("decl int[2] A\ndecl int x\ndecl int i\n0: x := A[i]\n1: halt\n")
    assert defs_uses(p.instrs[0]) == ("x", {"A", "i"}, None)


def test_retarget_p1(p1):
    q, m = retarget(p1, [0, 1, 3])
    assert m == {0: 0, 1: 1, 3: 2}
    assert q.instrs == (p1.instrs[0], Goto(2), Halt())


def test_retarget_identity(p1):
    q, m = retarget(p1, range(4))
    assert q == p1
    assert m == {i: i for i in range(4)}


def test_retarget_closure_violation(p1):
    with pytest.raises(RetargetError):
        retarget(p1, [0, 2, 3])


def _closed_keep(p, rng):
    """A random successor-closed index set containing 0."""
    keep = {0}
    extra = {i for i in range(len(p)) if rng.random() < 0.5}
    keep |= extra
    changed = True
    while changed:
        changed = False
        for i in list(keep):
            for s in successors(p, i):
                if s not in keep:
                    keep.add(s)
                    changed = True
    return sorted(keep)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_retarget_preserves_validity(seed, rng):
    p = gen_random_program(seed, 20)
    keep = _closed_keep(p, rng)
    q, m = retarget(p, keep)
    assert validate(q) == []
    assert sorted(m) == keep and sorted(m.values()) == list(range(len(keep)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_successors_total_and_in_range(seed):
    p = gen_random_program(seed, 30)
    for i in range(len(p)):
        assert all(0 <= s < len(p) for s in successors(p, i))


def test_literal_float_identity_is_bitwise():
    assert Literal(TypeTag.FLOAT, 0.0) != Literal(TypeTag.FLOAT, -0.0)
    assert Literal(TypeTag.FLOAT, float("nan")) == Literal(TypeTag.FLOAT, float("nan"))
    assert Literal(TypeTag.INT, 1) != Literal(TypeTag.BOOL, True)


def test_programs_are_immutable(p1):
    with pytest.raises(dataclasses.FrozenInstanceError):
        p1.instrs = ()

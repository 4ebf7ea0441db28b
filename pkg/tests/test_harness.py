import json
import logging
import statistics

from hypothesis import given, settings
from hypothesis import strategies as st

import pytest

from conftest import CORPUS, tac
from credcomp.certificates import GENERATORS, Certificate, EqVar, check, print_cert
from credcomp.certificates import checker as checker_mod
from credcomp.certificates import symbolic
from credcomp.certificates.model import NO_SUCCESSOR
from credcomp.frontend import print_tac
from credcomp.harness.bench import (
    KernelLoadError,
    bench,
    bench_program,
    kernel_dominance,
    render_table,
    to_json,
    trimmed_stat,
)
from credcomp.harness.fuzz import FuzzReport, diverging_input, fuzz
from credcomp.harness.mutate import ALL_KINDS, FLIP_TARGET, Mutation, mutate
from credcomp.harness.pipeline import pipeline
from credcomp.harness.randprog import gen_random_program, input_suite
from credcomp.interp import Halted, run
from credcomp.passes import PASSES, PassResult, uce, uce_dae
from credcomp.tac import BinAssign, CondGoto, Copy, Goto, Literal, TypeTag, validate

# -- pipeline --------------------------------------------------------------------


def test_pipeline_p4(p4):
    res = pipeline(p4, ["cp", "uce_dae"], "cc")
    assert all(res.verdicts) and len(res.verdicts) == 2
    assert run(res.program, {}) == Halted((("z", 7),))
    assert len(res.program) < len(p4)


def test_pipeline_plain(p1):
    res = pipeline(p1, ["uce"], "plain")
    assert res.verdicts == []
    (t,) = res.timings
    assert t.opt >= 0 and t.gen == 0 and t.chk == 0


def test_pipeline_discards_rejected(p2):
    def broken(r):
        c = GENERATORS["dae"](r)
        entries = dict(c.entries)
        del entries[max(entries)]
        return c.with_entries(entries)

    seen = []
    res = pipeline(p2, ["dae"], "cc", generators={"dae": broken}, on_pass=lambda *a: seen.append(a))
    (v,) = res.verdicts
    assert not v
    assert res.program == p2
    assert len(seen) == 1 and seen[0][3] == v


def test_pipeline_continues_after_discard(p4):
    def broken(r):
        return Certificate({(0, 0): frozenset()})

    res = pipeline(p4, ["cp", "uce_dae"], "cc", generators={"cp": broken})
    assert not res.verdicts[0] and res.verdicts[1]
    assert res.program == uce_dae(p4).after


def test_pipeline_rejects_unknown_pass(p1):
    with pytest.raises(ValueError):
        pipeline(p1, ["cse"])
    assert pipeline(p1, ["uce-dae"]).verdicts


def test_timing_bracketing():
    p = gen_random_program(5, 60)
    for _ in range(5):
        for t in pipeline(p, ["cp", "uce_dae", "uce", "dae"], "cc").timings:
            assert min(t.opt, t.gen, t.chk) >= 0
            assert t.opt + t.gen + t.chk <= t.total * 1.05 + 1e-6


# -- statistics ------------------------------------------------------------------


def test_trimmed_stat_protocol():
    s = trimmed_stat([float(x) for x in range(1, 21)])
    kept = [float(x) for x in range(2, 20)]
    assert (s.reps, s.retained) == (20, 18)
    assert s.mean_ms == statistics.fmean(kept)
    assert s.stddev_ms == pytest.approx(statistics.stdev(kept))
    assert s.rsd_pct == pytest.approx(100 * s.stddev_ms / s.mean_ms)


def test_trimmed_stat_degenerate():
    s = trimmed_stat([5.0, 1.0, 9.0])
    assert (s.mean_ms, s.stddev_ms, s.retained) == (5.0, 0.0, 1)
    with pytest.raises(ValueError):
        trimmed_stat([1.0, 2.0])


def test_trimmed_stat_drops_one_extreme_each():
    s = trimmed_stat([1.0, 1.0, 2.0, 3.0, 3.0])
    assert s.mean_ms == 2.0


def test_bench_rows_and_json(tmp_path):
    (tmp_path / "k.knl").write_text((CORPUS / "k03_dot.knl").read_text())
    (tmp_path / "p.tac").write_text(print_tac(tac("decl int x out\n0: x := 1\n1: halt\n")))
    rows = bench(tmp_path, reps=3, passes=("uce", "cp"))
    assert [(r.kernel, r.pass_name) for r in rows] == [("k", "uce"), ("k", "cp"), ("p", "uce"), ("p", "cp")]
    doc = json.loads(to_json(rows))
    assert len(doc["records"]) == 12
    for rec in doc["records"]:
        assert set(rec) == {"kernel", "pass", "phase", "mean_ms", "stddev_ms", "rsd_pct", "reps", "retained"}
        assert rec["retained"] == 1 and rec["stddev_ms"] == 0.0
    assert {k["kernel"] for k in doc["kernels"]} == {"k", "p"}
    table = render_table(rows).splitlines()
    assert len(table) == 3 and "chk_dominates" in table[0]


def test_bench_skips_unreadable(tmp_path, caplog):
    (tmp_path / "bad.knl").write_text("var int x; begin x := ; end")
    (tmp_path / "good.tac").write_text("decl int x out\n0: halt\n")
    with caplog.at_level(logging.WARNING):
        rows = bench(tmp_path, reps=3, passes=("uce",))
    assert [r.kernel for r in rows] == ["good"]
    assert "bad.knl" in caplog.text


def test_bench_all_unreadable(tmp_path):
    (tmp_path / "bad.tac").write_text("0: frob\n")
    with pytest.raises(KernelLoadError):
        bench(tmp_path, reps=3)


def test_bench_retains_18_of_20():
    rows = bench_program("p", tac("decl int x out\n0: x := 1\n1: halt\n"), reps=20, passes=("cp",))
    assert all(s.reps == 20 and s.retained == 18 for s in rows[0].stats.values())
    assert set(kernel_dominance(rows)) == {"p"}


# -- random programs -------------------------------------------------------------


def test_generator_deterministic():
    assert gen_random_program(1, 10) == gen_random_program(1, 10)
    assert print_tac(gen_random_program(7, 50)) == print_tac(gen_random_program(7, 50))
    assert input_suite(gen_random_program(3, 20), 3) == input_suite(gen_random_program(3, 20), 3)


def test_generator_budget():
    with pytest.raises(ValueError):
        gen_random_program(0, 1)
    assert validate(gen_random_program(0, 2)) == []


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9), st.integers(2, 120))
def test_generator_always_valid(seed, size):
    assert validate(gen_random_program(seed, size)) == []


def test_generator_mostly_halts():
    halted = sum(isinstance(run(p := gen_random_program(s, 40), input_suite(p, s, 1)[0]), Halted)
                 for s in range(1000))
    assert halted >= 950


def test_generator_exercises_decorations():
    progs = [gen_random_program(s, 40) for s in range(300)]
    both = sum(any(isinstance(i, CondGoto) and i.if_true == i.if_false for i in p.instrs) for p in progs)
    self_loops = sum(any(isinstance(i, (CondGoto, Goto)) and k in (getattr(i, "if_true", None),
                                                                    getattr(i, "target", None))
                         for k, i in enumerate(p.instrs)) for p in progs)
    unreachable = sum(len(uce(p).after) < len(p) for p in progs)
    assert both > 0 and self_loops > 0 and unreachable > 0


# -- mutation --------------------------------------------------------------------


def test_mutate_false_atom_on_p2(p2):
    r = uce_dae(p2)
    c = GENERATORS["uce_dae"](r)
    bad = c.with_entries({**c.entries, (1, 0): c.entries[(1, 0)] | {EqVar("d", "d")}})
    assert not check(p2, r.after, bad)


def test_flip_goto_in_p1(p1):
    r = uce(p1)
    tgt = r.after.with_instrs([Goto(0) if isinstance(i, Goto) else i for i in r.after.instrs])
    # The flipped target spins forever; the certificate must not cover it.
    assert diverging_input(p1, tgt, [{}]) is not None
    assert not check(p1, tgt, GENERATORS["uce"](r))


def test_delete_p1_entry(p1):
    r = uce(p1)
    c = GENERATORS["uce"](r)
    entries = dict(c.entries)
    del entries[(3, 2)]
    assert check(p1, r.after, c.with_entries(entries)).reason == NO_SUCCESSOR


def test_mutate_records_site_and_is_deterministic():
    r = PASSES["uce_dae"](gen_random_program(4, 40))
    cert = GENERATORS["uce_dae"](r)
    for seed in range(30):
        a, b = mutate(r, cert, seed), mutate(r, cert, seed)
        assert a.kind in ALL_KINDS and a.site is not None
        assert (a.kind, a.site, a.result.after, print_cert(a.cert)) == (b.kind, b.site, b.result.after, print_cert(b.cert))


def test_mutate_program_updates_target_hash():
    from credcomp.frontend import program_hash

    r = PASSES["uce"](gen_random_program(9, 40))
    m = mutate(r, GENERATORS["uce"](r), 1, kinds=(FLIP_TARGET,))
    assert m.cert.tgt_hash == program_hash(m.result.after) != program_hash(r.after)


def test_mutate_without_sites(p5):
    r = uce(p5)
    with pytest.raises(ValueError):
        mutate(r, GENERATORS["uce"](r), 0, kinds=("swap_op",))


# -- fuzzing ---------------------------------------------------------------------


def test_fuzz_small_run_clean():
    rep = fuzz(40, seed=2)
    assert rep.ok and rep.trials == 40 and rep.accepted_honest == 40
    assert rep.rejected_mutant + rep.accepted_mutant_equivalent + rep.soundness_violations == 40


def test_fuzz_deterministic_and_additive():
    a = fuzz(30, seed=5)
    assert a == fuzz(30, seed=5)
    assert fuzz(12, seed=5) + fuzz(18, seed=5, start=12) == a


def test_fuzz_fast_path_parity():
    assert fuzz(30, seed=8, fast_path=True).counters() == fuzz(30, seed=8, fast_path=False).counters()


def test_fuzz_rejects_bad_trials():
    with pytest.raises(ValueError):
        fuzz(0)


def test_fuzz_report_counters():
    rep = FuzzReport(trials=2, accepted_honest=2, rejected_mutant=1, soundness_violations=1,
                     violations=[(0, "cp", "literal", (1, "b"))])
    assert not rep.ok
    assert "violations" not in rep.counters() and rep.counters()["soundness_violations"] == 1


# -- canary: a checker that trusts division by zero ------------------------------

CANARY = """\
decl int a in
decl int q
decl int x out
0: if a > 3 goto 1 else 2
1: q := 100 / 0
2: x := a + 1
3: halt
"""


def _canary_program(seed):
    return tac(CANARY)


def _fold_div_zero(r, cert, seed):
    """Replace ``v := n / 0`` with ``v := 0`` in the target."""
    instrs = [
        Copy(i.dst, Literal(TypeTag.INT, 0))
        if isinstance(i, BinAssign) and i.op == "div" and i.b == Literal(TypeTag.INT, 0)
        else i
        for i in r.after.instrs
    ]
    after = r.after.with_instrs(instrs)
    return Mutation("fold_div_zero", (), PassResult(r.before, after, r.point_map, r.facts), cert)


def test_healthy_checker_rejects_div_zero_fold():
    rep = fuzz(10, make_program=_canary_program, mutator=_fold_div_zero, passes=("uce", "cp"))
    assert rep.soundness_violations == 0
    assert rep.rejected_mutant == 10


def test_canary_broken_checker_is_caught(monkeypatch):
    real_fold = symbolic._fold

    def sloppy_fold(op, args):
        if op in ("div", "mod") and args[1].lit.value == 0:
            return symbolic.Const(Literal(TypeTag.INT, 0))
        return real_fold(op, args)

    monkeypatch.setattr(checker_mod._Side, "guard", lambda self, *a, **k: None)
    monkeypatch.setattr(symbolic, "_fold", sloppy_fold)
    rep = fuzz(10, make_program=_canary_program, mutator=_fold_div_zero, passes=("uce", "cp"))
    assert rep.soundness_violations > 0
    assert not rep.ok

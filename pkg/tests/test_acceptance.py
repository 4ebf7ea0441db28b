"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

The lines are printed live and repeated in the terminal summary.
"""

import contextlib
import json
import random
import sys
import time

from conftest import CORPUS, FIXTURES, corpus_programs, tac
from credcomp.certificates import GENERATORS, Certificate, EqVar, check, parse_cert, print_cert
from credcomp.dataflow import solve_roundrobin, solve_worklist
from credcomp.frontend import parse_tac, print_tac
from credcomp.harness.bench import bench, to_json
from credcomp.harness.fuzz import diverging_input, fuzz
from credcomp.harness.mutate import SEMANTIC_KINDS, mutate
from credcomp.harness.pipeline import pipeline
from credcomp.harness.randprog import gen_random_program, input_suite
from credcomp.interp import Halted, run
from credcomp.passes import (
    PASSES,
    cp,
    cp_spec,
    dae_fixpoint,
    dead_assignments,
    liveness_spec,
    reachable,
)
from credcomp.tac import successors

RESULTS: dict[str, str] = {}
CC_PASSES = ("uce", "dae", "uce_dae", "cp")


def _random_program(seed):
    return gen_random_program(seed, random.Random(seed).randint(4, 60))


@contextlib.contextmanager
def criterion(name):
    try:
        yield
    except BaseException as e:
        line = f"FAIL  {name}: {type(e).__name__}: {str(e).splitlines()[0] if str(e) else ''}"
        RESULTS[name] = line
        sys.__stdout__.write(f"\n[acceptance] {line}\n")
        raise
    line = f"PASS  {name}"
    RESULTS[name] = line
    sys.__stdout__.write(f"\n[acceptance] {line}\n")


def test_honest_certificate_completeness():
    with criterion("honest-certificate completeness (10 kernels + 1000 random, 4 passes, 100%)"):
        start = time.perf_counter()
        programs = list(corpus_programs().items())
        assert len(programs) >= 10
        programs += [(f"rand{s}", _random_program(s)) for s in range(1000)]
        failures = []
        for name, p in programs:
            for pass_name in CC_PASSES:
                r = PASSES[pass_name](p)
                v = check(r.before, r.after, GENERATORS[pass_name](r))
                if not v:
                    failures.append((name, pass_name, str(v)))
        elapsed = time.perf_counter() - start
        assert not failures, f"{len(failures)} honest rejections, first {failures[0]}"
        assert elapsed < 300, f"took {elapsed:.0f}s"


def test_tested_checker_soundness():
    with criterion("tested checker soundness (fuzz 1000 trials, 0 violations)"):
        rep = fuzz(1000, seed=0)
        assert rep.trials == 1000
        assert rep.soundness_violations == 0, rep.violations[:3]
        assert rep.accepted_honest == 1000, rep.honest_failures[:3]


def test_mutation_sensitivity():
    with criterion("mutation sensitivity (500 semantic mutants, 0 accepted-divergent, >=80% rejected)"):
        rejected = divergent = total = 0
        seed = 0
        while total < 500:
            seed += 1
            p = _random_program(seed)
            rng = random.Random(seed)
            name = rng.choice(CC_PASSES)
            r = PASSES[name](p)
            m = mutate(r, GENERATORS[name](r), rng.getrandbits(32), kinds=SEMANTIC_KINDS)
            if not m.semantic:
                continue
            total += 1
            if not check(m.result.before, m.result.after, m.cert):
                rejected += 1
            elif diverging_input(p, m.result.after, input_suite(p, seed, 50)) is not None:
                divergent += 1
        rate = rejected / total
        sys.__stdout__.write(f"\n[acceptance] mutants={total} rejected={rejected} ({rate:.1%}) "
                             f"accepted-divergent={divergent}\n")
        assert divergent == 0
        assert rate >= 0.80


def test_checker_regression_pair():
    with criterion("checker regression pair (P5 self-loop, P6 both arms) accepted"):
        p5, p6 = tac(FIXTURES["P5"]), tac(FIXTURES["P6"])
        assert check(p5, p5, Certificate({(0, 0): frozenset()}))
        assert check(p6, p6, Certificate({(0, 0): frozenset({EqVar("b", "b")}), (1, 1): frozenset()}))
        for pass_name in CC_PASSES:
            for p in (p5, p6):
                r = PASSES[pass_name](p)
                assert check(p, r.after, GENERATORS[pass_name](r))


def _closure(p):
    seen, frontier = {0}, {0}
    while frontier:
        frontier = {s for i in frontier for s in successors(p, i)} - seen
        seen |= frontier
    return seen


def test_pass_behavior_oracles():
    with criterion("pass-behavior oracles (reachable, dae fixpoint, cp idempotent, solver equality)"):
        for s in range(500):
            p = _random_program(s)
            assert reachable(p) == _closure(p), s
            assert dead_assignments(dae_fixpoint(p).after) == [], s
            once = cp(p).after
            assert cp(once).after == once, s
        for s in range(200):
            p = _random_program(10_000 + s)
            for spec in (liveness_spec(p), cp_spec(p)):
                assert solve_worklist(p, spec) == solve_roundrobin(p, spec), s


def test_p4_end_to_end():
    with criterion("P4 end-to-end (cp then uce_dae: Halted([z=7]), all accepted, 3 removed)"):
        p4 = tac(FIXTURES["P4"])
        res = pipeline(p4, ["cp", "uce_dae"], "cc")
        assert len(res.verdicts) == 2 and all(res.verdicts)
        assert run(res.program, {}) == Halted((("z", 7),))
        # Instruction 3 is the halt on the resolved branch's dead arm.
        r = PASSES["uce_dae"](cp(p4).after)
        assert 3 not in r.point_map
        assert r.point_map == {2: 0, 4: 1, 5: 2}
        assert print_tac(res.program).split("\n", 4)[4] == "0: goto 1\n1: z := 7\n2: halt\n"


_BENCH = {}


def _bench_rows():
    if "rows" not in _BENCH:
        _BENCH["rows"] = bench(CORPUS, reps=20)
    return _BENCH["rows"]


def test_table_shape():
    with criterion("phase breakdown shape (opt/gen/chk per kernel, chk-dominates column; non-blocking)"):
        rows = _bench_rows()
        doc = json.loads(to_json(rows))
        kernels = {k["kernel"]: k["chk_dominates"] for k in doc["kernels"]}
        assert len(kernels) >= 10
        assert {r["phase"] for r in doc["records"]} == {"opt", "gen", "chk"}
        dominated = sum(kernels.values())
        sys.__stdout__.write(f"\n[acceptance] chk dominates on {dominated}/{len(kernels)} kernels\n")


def test_statistics_protocol():
    with criterion("statistics protocol (reps=20 retains 18; mean, stddev, rsd present)"):
        doc = json.loads(to_json(_bench_rows()))
        for rec in doc["records"]:
            assert rec["reps"] == 20 and rec["retained"] == 18
            for key in ("mean_ms", "stddev_ms", "rsd_pct"):
                assert isinstance(rec[key], float)


def test_format_round_trips():
    with criterion("format round-trips (TAC and certificate files, byte-exact, all corpus artifacts)"):
        for name, p in corpus_programs().items():
            text = print_tac(p)
            assert parse_tac(text) == p and print_tac(parse_tac(text)) == text, name
            for pass_name in CC_PASSES:
                r = PASSES[pass_name](p)
                after = print_tac(r.after)
                assert print_tac(parse_tac(after)) == after
                ctext = print_cert(GENERATORS[pass_name](r))
                assert print_cert(parse_cert(ctext)) == ctext, (name, pass_name)
        for text in FIXTURES.values():
            assert print_tac(parse_tac(print_tac(parse_tac(text)))) == print_tac(parse_tac(text))

import sys
from pathlib import Path

import pytest

from credcomp.frontend import parse_tac

P1 = """\
decl int x out
decl int y
0: x := 3
1: goto 3
2: y := 4
3: halt
"""

P2 = """\
decl int d
decl int x out
0: d := 5
1: x := 7
2: halt
"""

P3 = """\
decl int a
decl int b
decl int x out
0: a := 1
1: b := a + 1
2: x := 2
3: halt
"""

P4 = """\
decl int x
decl int y
decl int z out
0: x := 3
1: y := x + 4
2: if y < 10 goto 4 else 3
3: halt
4: z := y
5: halt
"""

P5 = """\
0: goto 0
"""

P6 = """\
decl bool b in
0: if b goto 1 else 1
1: halt
"""

FIXTURES = {"P1": P1, "P2": P2, "P3": P3, "P4": P4, "P5": P5, "P6": P6}


def tac(text: str):
    return parse_tac(text)


@pytest.fixture
def fixtures():
    return {k: parse_tac(v) for k, v in FIXTURES.items()}


@pytest.fixture
def p1():
    return parse_tac(P1)


@pytest.fixture
def p2():
    return parse_tac(P2)


@pytest.fixture
def p3():
    return parse_tac(P3)


@pytest.fixture
def p4():
    return parse_tac(P4)


@pytest.fixture
def p5():
    return parse_tac(P5)


@pytest.fixture
def p6():
    return parse_tac(P6)


CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def corpus_programs():
    from credcomp.harness.bench import kernel_files, load_program

    return {f.stem: load_program(f) for f in kernel_files(CORPUS)}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS.values():
        terminalreporter.write_line(line)

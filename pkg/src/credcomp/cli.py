"""Command-line driver.

Exit status: 0 on success or acceptance, 1 on rejection or a fuzz failure,
2 on usage, parse and input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .certificates import CertSyntaxError, check, parse_cert, print_cert
from .frontend import SourceError, TacSyntaxError, compile_source, parse_tac, print_tac, program_hash
from .harness.bench import KernelLoadError, bench, render_table, to_json
from .harness.fuzz import fuzz
from .harness.pipeline import pipeline
from .interp import Fault, Halted, InputError, run
from .tac import Literal, Program, TypeTag, format_literal, validate

EXIT_OK, EXIT_REJECTED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror}") from e


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_program(path: str) -> Program:
    text = _read(path)
    try:
        p = compile_source(text) if path.endswith(".knl") else parse_tac(text)
    except (SourceError, TacSyntaxError) as e:
        raise UsageError(f"{path}:{e}") from e
    errs = validate(p)
    if errs:
        raise UsageError(f"{path}: invalid program: {errs[0]}")
    return p


def _parse_scalar(tag: TypeTag, text: str):
    if tag is TypeTag.BOOL:
        if text not in ("true", "false"):
            raise ValueError(f"expected true or false, got {text!r}")
        return text == "true"
    if tag is TypeTag.INT:
        return int(text)
    return float(text)


def parse_inputs(p: Program, pairs: list[str]) -> dict:
    """``k=v`` pairs typed by the declarations; arrays take comma lists."""
    out = {}
    for pair in pairs:
        name, sep, text = pair.partition("=")
        if not sep:
            raise UsageError(f"--input expects name=value, got {pair!r}")
        d = p.vars.get(name)
        if d is None or not d.is_input:
            raise UsageError(f"{name} is not an input of this program")
        try:
            if d.type.is_array:
                out[name] = [_parse_scalar(d.type.element, t.strip()) for t in text.split(",")]
            else:
                out[name] = _parse_scalar(d.type, text)
        except ValueError as e:
            raise UsageError(f"{name}: {e}") from e
    return out


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return "[" + ", ".join(_format_value(x) for x in v) + "]"
    return format_literal(Literal.of(v))


# -- commands ---------------------------------------------------------------------


def cmd_compile(args) -> int:
    p = _load_program(args.source)
    _write(args.output, print_tac(p))
    return EXIT_OK


def cmd_opt(args) -> int:
    p = _load_program(args.program)
    passes = [s for s in args.passes.split(",") if s.strip()]
    cert_dir = Path(args.emit_cert) if args.emit_cert else None
    if cert_dir:
        cert_dir.mkdir(parents=True, exist_ok=True)
    step = 0

    def emit(name, r, cert, verdict):
        nonlocal step
        if verdict is not None:
            print(f"{name}: {'accepted' if verdict else verdict}", file=sys.stderr)
        if cert_dir and cert is not None:
            stem = cert_dir / f"{step:02d}_{name}"
            Path(f"{stem}.src.tac").write_text(print_tac(r.before))
            Path(f"{stem}.tgt.tac").write_text(print_tac(r.after))
            Path(f"{stem}.cert").write_text(print_cert(cert))
        step += 1

    try:
        result = pipeline(p, passes, args.mode, on_pass=emit)
    except ValueError as e:
        raise UsageError(str(e)) from e
    _write(args.output, print_tac(result.program))
    return EXIT_OK if all(result.verdicts) else EXIT_REJECTED


def cmd_check(args) -> int:
    src, tgt = _load_program(args.src), _load_program(args.tgt)
    try:
        cert = parse_cert(_read(args.cert))
    except CertSyntaxError as e:
        raise UsageError(f"{args.cert}:{e}") from e
    for label, h, p in (("source", cert.src_hash, src), ("target", cert.tgt_hash, tgt)):
        if h is not None and h != program_hash(p):
            raise UsageError(f"certificate was issued for a different {label} program")
    verdict = check(src, tgt, cert, fast_path=not args.no_fast_path)
    print("accepted" if verdict else str(verdict))
    return EXIT_OK if verdict else EXIT_REJECTED


def cmd_run(args) -> int:
    p = _load_program(args.program)
    try:
        outcome = run(p, parse_inputs(p, args.input), args.fuel)
    except InputError as e:
        raise UsageError(str(e)) from e
    if isinstance(outcome, Halted):
        print("halted")
        for name, v in outcome.outputs:
            print(f"  {name} = {_format_value(v)}")
    elif isinstance(outcome, Fault):
        print(f"fault: {outcome.kind} at {outcome.at}")
    else:
        print("out of fuel")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.reps < 3:
        raise UsageError("--reps must be at least 3")
    passes = [s.strip().replace("-", "_") for s in args.passes.split(",")]
    try:
        rows = bench(args.corpus, args.reps, passes)
    except KernelLoadError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_REJECTED
    print(to_json(rows) if args.format == "json" else render_table(rows))
    return EXIT_OK


def cmd_fuzz(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    rep = fuzz(args.trials, args.seed, fast_path=not args.no_fast_path)
    print(json.dumps(rep.counters(), indent=2))
    for v in rep.violations:
        print(f"violation: trial {v[0]} pass {v[1]} mutation {v[2]} at {v[3]}", file=sys.stderr)
    for t, name in rep.honest_failures:
        print(f"honest certificate rejected: trial {t} pass {name}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_REJECTED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="credcomp", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="lower a .knl kernel to TAC")
    c.add_argument("source")
    c.add_argument("-o", "--output")
    c.set_defaults(fn=cmd_compile)

    o = sub.add_parser("opt", help="run passes, optionally certifying each one")
    o.add_argument("program")
    o.add_argument("--passes", default="cp,uce-dae")
    o.add_argument("--mode", choices=("cc", "plain"), default="cc")
    o.add_argument("--emit-cert", metavar="DIR")
    o.add_argument("-o", "--output")
    o.set_defaults(fn=cmd_opt)

    k = sub.add_parser("check", help="check a certificate for a source/target pair")
    k.add_argument("src")
    k.add_argument("tgt")
    k.add_argument("cert")
    k.add_argument("--no-fast-path", action="store_true")
    k.set_defaults(fn=cmd_check)

    r = sub.add_parser("run", help="interpret a program")
    r.add_argument("program")
    r.add_argument("--input", action="append", default=[], metavar="NAME=VALUE")
    r.add_argument("--fuel", type=int)
    r.set_defaults(fn=cmd_run)

    b = sub.add_parser("bench", help="opt/gen/chk timing breakdown over a corpus")
    b.add_argument("corpus")
    b.add_argument("--reps", type=int, default=20)
    b.add_argument("--format", choices=("table", "json"), default="table")
    b.add_argument("--passes", default="uce,dae,uce_dae,cp")
    b.set_defaults(fn=cmd_bench)

    f = sub.add_parser("fuzz", help="mutation fuzzing of passes and checker")
    f.add_argument("--trials", type=int, default=1000)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--no-fast-path", action="store_true")
    f.set_defaults(fn=cmd_fuzz)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s"
    )
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

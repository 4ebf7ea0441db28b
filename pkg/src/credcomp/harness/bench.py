"""Per-phase compile-time breakdown over a kernel corpus.

Each (kernel, pass) cell is timed ``reps`` times after one discarded warm-up
run. Per phase, the single fastest and slowest samples are dropped and the
rest are summarised by their mean and sample standard deviation.
"""

from __future__ import annotations

import json
import logging
import statistics
from dataclasses import dataclass
from pathlib import Path

from ..frontend import compile_source, parse_tac
from ..tac import Program, validate
from .pipeline import CC, pipeline

log = logging.getLogger(__name__)

PHASES = ("opt", "gen", "chk")
BENCH_PASSES = ("uce", "dae", "uce_dae", "cp")


@dataclass(frozen=True)
class PhaseStat:
    mean_ms: float
    stddev_ms: float
    rsd_pct: float
    reps: int
    retained: int


@dataclass(frozen=True)
class BenchRow:
    kernel: str
    pass_name: str
    stats: dict  # phase -> PhaseStat

    @property
    def chk_dominates(self) -> bool:
        chk = self.stats["chk"].mean_ms
        return chk > self.stats["opt"].mean_ms and chk > self.stats["gen"].mean_ms


def trimmed_stat(samples_ms: list[float]) -> PhaseStat:
    """Drop one min and one max, then mean and n-1 stddev of the rest."""
    reps = len(samples_ms)
    if reps < 3:
        raise ValueError("need at least 3 samples")
    kept = sorted(samples_ms)[1:-1]
    mean = statistics.fmean(kept)
    sd = statistics.stdev(kept) if len(kept) > 1 else 0.0
    rsd = 100.0 * sd / mean if mean > 0 else 0.0
    return PhaseStat(mean, sd, rsd, reps, len(kept))


class KernelLoadError(Exception):
    pass


def load_program(path: Path) -> Program:
    """Read a ``.knl`` source (lowered) or a ``.tac`` listing."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise KernelLoadError(f"{path}: {e}") from e
    try:
        p = compile_source(text) if Path(path).suffix == ".knl" else parse_tac(text)
    except ValueError as e:
        raise KernelLoadError(f"{path}: {e}") from e
    errs = validate(p)
    if errs:
        raise KernelLoadError(f"{path}: {errs[0]}")
    return p


def kernel_files(corpus_dir) -> list[Path]:
    root = Path(corpus_dir)
    return sorted(list(root.glob("*.knl")) + list(root.glob("*.tac")))


def bench_program(name: str, p: Program, reps: int = 20, passes=BENCH_PASSES) -> list[BenchRow]:
    if reps < 3:
        raise ValueError("reps must be at least 3")
    rows = []
    for pass_name in passes:
        pipeline(p, [pass_name], CC)  # warm-up, not recorded
        samples = {ph: [] for ph in PHASES}
        for _ in range(reps):
            (t,) = pipeline(p, [pass_name], CC).timings
            for ph in PHASES:
                samples[ph].append(getattr(t, ph) * 1000.0)
        rows.append(BenchRow(name, pass_name, {ph: trimmed_stat(samples[ph]) for ph in PHASES}))
    return rows


def bench(corpus_dir, reps: int = 20, passes=BENCH_PASSES) -> list[BenchRow]:
    """Benchmark every kernel in ``corpus_dir``; unreadable ones are skipped.

    Raises KernelLoadError when no kernel could be loaded.
    """
    rows: list[BenchRow] = []
    files = kernel_files(corpus_dir)
    loaded = 0
    for path in files:
        try:
            p = load_program(path)
        except KernelLoadError as e:
            log.warning("skipping %s", e)
            continue
        loaded += 1
        rows.extend(bench_program(path.stem, p, reps, passes))
    if not loaded:
        raise KernelLoadError(f"no loadable kernels in {corpus_dir}")
    return rows


def kernel_dominance(rows: list[BenchRow]) -> dict[str, bool]:
    """Per kernel: does chk exceed both opt and gen, summed over passes?"""
    sums: dict[str, dict[str, float]] = {}
    for r in rows:
        acc = sums.setdefault(r.kernel, dict.fromkeys(PHASES, 0.0))
        for ph in PHASES:
            acc[ph] += r.stats[ph].mean_ms
    return {k: v["chk"] > v["opt"] and v["chk"] > v["gen"] for k, v in sums.items()}


def to_json(rows: list[BenchRow]) -> str:
    records = [
        {"kernel": r.kernel, "pass": r.pass_name, "phase": ph, **vars(r.stats[ph])}
        for r in rows
        for ph in PHASES
    ]
    kernels = [{"kernel": k, "chk_dominates": v} for k, v in kernel_dominance(rows).items()]
    return json.dumps({"records": records, "kernels": kernels}, indent=2)


def render_table(rows: list[BenchRow]) -> str:
    """One line per kernel: mean ms (rsd %) for each pass and phase."""
    passes = list(dict.fromkeys(r.pass_name for r in rows))
    by_kernel: dict[str, dict[str, BenchRow]] = {}
    for r in rows:
        by_kernel.setdefault(r.kernel, {})[r.pass_name] = r
    dom = kernel_dominance(rows)
    header = ["kernel"] + [f"{p}.{ph}" for p in passes for ph in PHASES] + ["chk_dominates"]
    lines = [header]
    for k, cells in by_kernel.items():
        line = [k]
        for p in passes:
            for ph in PHASES:
                s = cells[p].stats[ph]
                line.append(f"{s.mean_ms:.3f} ({s.rsd_pct:.0f}%)")
        line.append("yes" if dom[k] else "no")
        lines.append(line)
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in lines)

from .bench import BenchRow, PhaseStat, bench, render_table, to_json, trimmed_stat
from .fuzz import FuzzReport, diverging_input, fuzz
from .mutate import Mutation, mutate
from .pipeline import PhaseTimings, PipelineResult, pipeline
from .randprog import gen_random_program, input_suite, random_inputs

__all__ = [
    "BenchRow",
    "FuzzReport",
    "Mutation",
    "PhaseStat",
    "PhaseTimings",
    "PipelineResult",
    "bench",
    "diverging_input",
    "fuzz",
    "gen_random_program",
    "input_suite",
    "mutate",
    "pipeline",
    "random_inputs",
    "render_table",
    "to_json",
    "trimmed_stat",
]

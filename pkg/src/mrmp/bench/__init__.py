"""Benchmark harness: instance generation, independent verification,
suite running, hyperparameter search, and SVG rendering."""

from .generate import GenerationFailure, gen_instance, scenario_config
from .render import render
from .runner import BenchResult, run_one, run_suite, summarize
from .tuning import TuneSpec, tune
from .verify import Violation, verify

__all__ = [
    "BenchResult",
    "GenerationFailure",
    "TuneSpec",
    "Violation",
    "gen_instance",
    "render",
    "run_one",
    "run_suite",
    "scenario_config",
    "summarize",
    "tune",
    "verify",
]

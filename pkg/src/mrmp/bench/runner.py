"""Suite runner: (instance, solver) pairs under wall-clock limits, with
optional process-level parallelism across instances, crash capture,
streamed JSON-lines results, and summary tables."""

from __future__ import annotations

import json
import math
import random
import time
import traceback
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from ..baselines import SOLVER_FUNCS, BaselineParams
from ..instance import Instance, canonical_json
from ..postprocess import total_traveling_time
from ..solution import OUTCOME_SOLVED, OUTCOME_TIMEOUT, Solution, SolveResult
from ..sssp import SsspParams, solve
from .verify import verify

ALL_SOLVERS = ("sssp", "prm", "rrt", "rrtc", "pp", "cbs")


@dataclass
class BenchResult:
    instance_id: str
    solver: str
    outcome: str
    wall_time: float
    seed: int
    T: int | None = None
    total_travel_time: float | None = None
    total_travel_time_normalized: float | None = None
    verified: bool | None = None
    crash: bool = False
    error: str | None = None

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, d: dict) -> "BenchResult":
        return cls(**{k: d.get(k) for k in cls.__dataclass_fields__})


def _metric_seed(instance_id: str, solver: str, seed: int) -> int:
    return zlib.crc32(f"{instance_id}:{solver}:{seed}".encode()) & 0x7FFFFFFF


def dispatch_solver(instance: Instance, solver: str, time_limit: float,
                    seed: int, overrides: dict | None = None) -> SolveResult:
    overrides = dict(overrides or {})
    if solver == "sssp":
        params = SsspParams(time_limit=time_limit, seed=seed, **overrides)
        return solve(instance, params)
    if solver in SOLVER_FUNCS:
        params = BaselineParams(time_limit=time_limit, seed=seed, **overrides)
        return SOLVER_FUNCS[solver](instance, params)
    raise ValueError(f"unknown solver {solver!r}")


def run_one(instance: Instance, solver: str, time_limit: float, seed: int = 0,
            overrides: dict | None = None, verify_solution: bool = True,
            smoothing_iterations: int | None = None):
    """Run one (instance, solver) pair; returns (BenchResult, Solution|None)."""
    t0 = time.monotonic()
    try:
        result = dispatch_solver(instance, solver, time_limit, seed, overrides)
    except Exception:
        return (
            BenchResult(instance.id, solver, OUTCOME_TIMEOUT,
                        time.monotonic() - t0, seed, crash=True,
                        error=traceback.format_exc(limit=4)),
            None,
        )
    row = BenchResult(instance.id, solver, result.outcome, result.wall_time, seed)
    solution = result.solution
    if result.solved and solution is not None:
        row.T = solution.T
        rng = random.Random(_metric_seed(instance.id, solver, seed))
        raw, norm, _ = total_traveling_time(solution, instance.models,
                                            instance.obstacles, rng,
                                            smoothing_iterations)
        row.total_travel_time = raw
        row.total_travel_time_normalized = norm
        solution.metrics["total_travel_time"] = raw
        solution.metrics["total_travel_time_normalized"] = norm
        if verify_solution:
            row.verified = not verify(instance, solution)
    return row, solution


def _task(job: dict):
    instance = Instance.from_json_dict(job["instance"])
    row, solution = run_one(instance, job["solver"], job["time_limit"],
                            job["seed"], job.get("overrides"),
                            job.get("verify", True),
                            job.get("smoothing_iterations"))
    sol_dict = solution.to_json_dict() if solution is not None else None
    return row.to_json_dict(), sol_dict


def run_suite(instances, solvers, time_limit: float, workers: int = 1,
              seed: int = 0, out_path=None, overrides: dict | None = None,
              solutions_dir=None, verify_solutions: bool = True,
              smoothing_iterations: int | None = None,
              progress=None) -> list[BenchResult]:
    """Every (instance, solver) pair in isolated workers, streamed to JSONL.

    Outcomes are worker-count-invariant: each task's randomness is fully
    determined by (instance, solver, seed). `overrides` maps solver name to
    a dict of parameter overrides.
    """
    overrides = overrides or {}
    jobs = [
        {
            "instance": inst.to_json_dict(),
            "solver": solver,
            "time_limit": time_limit,
            "seed": seed,
            "overrides": overrides.get(solver),
            "verify": verify_solutions,
            "smoothing_iterations": smoothing_iterations,
        }
        for inst in instances
        for solver in solvers
    ]
    results: list[BenchResult] = []
    sink = open(out_path, "a") if out_path else None

    def consume(row_dict, sol_dict):
        row = BenchResult.from_json_dict(row_dict)
        results.append(row)
        if sink is not None:
            sink.write(canonical_json(row_dict))
            sink.write("\n")
            sink.flush()
        if solutions_dir is not None and sol_dict is not None:
            path = f"{solutions_dir}/{row.instance_id}__{row.solver}.json"
            with open(path, "w") as fh:
                fh.write(canonical_json(sol_dict))
        if progress is not None:
            progress(row)

    try:
        if workers <= 1:
            for job in jobs:
                row_dict, sol_dict = _task(job)
                consume(row_dict, sol_dict)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for row_dict, sol_dict in pool.map(_task, jobs):
                    consume(row_dict, sol_dict)
    finally:
        if sink is not None:
            sink.close()
    return results


def read_jsonl(path) -> list[BenchResult]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(BenchResult.from_json_dict(json.loads(line)))
    return out


def _mean_ci(values):
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, mean, mean
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    half = 1.96 * math.sqrt(var / n)
    return mean, mean - half, mean + half


def summarize(results: list[BenchResult]) -> dict:
    """Solved counts, solved-vs-time curves, and the travel-time table over
    the instances solved by every solver (with 95% confidence intervals)."""
    solvers = sorted({r.solver for r in results})
    instances = sorted({r.instance_id for r in results})
    by_solver: dict[str, list[BenchResult]] = {s: [] for s in solvers}
    for r in results:
        by_solver[r.solver].append(r)

    summary: dict = {"solvers": solvers, "n_instances": len(instances), "per_solver": {}}
    solved_sets = {}
    for s in solvers:
        rows = by_solver[s]
        solved = [r for r in rows if r.outcome == OUTCOME_SOLVED]
        solved_sets[s] = {r.instance_id for r in solved}
        times = sorted(r.wall_time for r in solved)
        curve = [[t, k + 1] for k, t in enumerate(times)]
        summary["per_solver"][s] = {
            "solved": len(solved),
            "total": len(rows),
            "crashes": sum(1 for r in rows if r.crash),
            "unverified": sum(1 for r in solved if r.verified is False),
            "mean_wall_time_solved": (sum(times) / len(times)) if times else None,
            "solved_vs_time": curve,
        }

    common = set(instances)
    for s in solvers:
        common &= solved_sets[s]
    summary["solved_by_all"] = sorted(common)
    table = {}
    for s in solvers:
        vals = [r.total_travel_time_normalized for r in by_solver[s]
                if r.instance_id in common and r.outcome == OUTCOME_SOLVED
                and r.total_travel_time_normalized is not None]
        if vals:
            mean, lo, hi = _mean_ci(vals)
            table[s] = {"mean": mean, "ci95": [lo, hi], "n": len(vals)}
    summary["travel_time_normalized"] = table
    return summary

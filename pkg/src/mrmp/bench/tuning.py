"""Hyperparameter random search.

Each trial draws one parameter set, evaluates it on a shared batch of fresh
instances under a per-run time limit, and the winner maximizes the solved
count with mean runtime as the tie-break. The full trial log is returned
(and written) so searches are auditable.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field

from ..instance import canonical_json
from .generate import gen_instance
from .runner import run_suite

PARAM_SPACES = {
    "sssp": {
        "m_samples": ("int", 1, 30),
        "theta": ("logfloat", 0.005, 0.3),
        "eps": ("logfloat", 0.05, 0.6),
        "gamma": ("float", 0.5, 0.99),
    },
    "prm": {
        "prm_batch": ("int", 50, 400),
        "prm_k": ("int", 4, 16),
    },
    "rrt": {
        "eps": ("logfloat", 0.05, 0.8),
        "goal_bias": ("float", 0.0, 0.3),
    },
    "rrtc": {
        "eps": ("logfloat", 0.05, 0.8),
    },
    "pp": {
        "prm_samples": ("int", 100, 1500),
        "prm_radius": ("logfloat", 0.03, 0.4),
    },
    "cbs": {
        "prm_samples": ("int", 100, 1500),
        "prm_radius": ("logfloat", 0.03, 0.4),
    },
}


@dataclass
class TuneSpec:
    solver: str = "sssp"
    scenario: str = "point2d"
    trials: int = 100
    n_instances: int = 50
    per_run_limit: float = 30.0
    seed: int = 0
    profile: str = "standard"
    n_robots: int | None = None
    param_space: dict | None = None


def best_trial(trials: list) -> dict:
    """Maximize solved count; break ties by lower mean runtime."""
    return max(trials, key=lambda t: (t["solved"], -t["mean_wall_time"]))


def draw_params(space: dict, rng: random.Random) -> dict:
    out = {}
    for name, (kind, lo, hi) in space.items():
        if kind == "int":
            out[name] = rng.randint(lo, hi)
        elif kind == "float":
            out[name] = rng.uniform(lo, hi)
        elif kind == "logfloat":
            out[name] = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        else:
            raise ValueError(f"unknown draw kind {kind!r}")
    return out


def tune(spec: TuneSpec, workers: int = 1, out_path=None) -> dict:
    rng = random.Random(spec.seed)
    space = spec.param_space or PARAM_SPACES[spec.solver]
    instances = [
        gen_instance(spec.scenario, spec.n_robots,
                     seed=spec.seed * 1_000_000 + 7919 * i,
                     profile=spec.profile)
        for i in range(spec.n_instances)
    ]
    trials = []
    for k in range(spec.trials):
        params = draw_params(space, rng)
        results = run_suite(instances, [spec.solver], spec.per_run_limit,
                            workers=workers, seed=spec.seed,
                            overrides={spec.solver: params},
                            verify_solutions=False, smoothing_iterations=0)
        solved = sum(1 for r in results if r.outcome == "SOLVED")
        mean_wall = sum(r.wall_time for r in results) / len(results)
        trials.append({"trial": k, "params": params, "solved": solved,
                       "mean_wall_time": mean_wall})
    best = best_trial(trials)
    report = {
        "spec": asdict(spec),
        "best": best,
        "trials": trials,
    }
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(canonical_json(report))
            fh.write("\n")
    return report

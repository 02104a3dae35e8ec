"""Random instance generation.

Starts, goals, obstacle layouts, and per-robot body parameters are
rejection-sampled until the instance invariants hold: every start/goal is
obstacle-free, the team is pairwise non-colliding at the starts and at the
goals, and the instance is "sufficiently dense" in the sense that at least
two robots' solo start-to-goal motions sweep through each other (otherwise
instances are trivially decoupled). Body parameters differ between robots,
so every team is heterogeneous.
"""

from __future__ import annotations

import random

import numpy as np

from ..collision import collide_pair, static_config_clear
from ..geometry import SphereObstacle
from ..instance import Instance
from ..robots import RobotModel, sample, state_valid, vertex_margin


class GenerationFailure(Exception):
    """Rejection sampling exhausted its round budget (density infeasible)."""


# Declared density defaults per (scenario, profile). "standard" aims at the
# dense desk-scale suites (N in 2..8); "scalability" shrinks bodies and
# obstacles for large teams.
DEFAULT_CONFIGS = {
    ("point2d", "standard"): {
        "n_obstacles": 6, "obstacle_radius": (0.03, 0.09),
        "radius": (0.025, 0.06),
    },
    ("point2d", "scalability"): {
        "n_obstacles": 5, "obstacle_radius": (0.02, 0.04),
        "radius": (0.01, 0.025),
    },
    ("point3d", "standard"): {
        "n_obstacles": 8, "obstacle_radius": (0.05, 0.14),
        "radius": (0.05, 0.10),
    },
    ("line2d", "standard"): {
        "n_obstacles": 6, "obstacle_radius": (0.03, 0.08),
        "length": (0.10, 0.22), "radius": (0.01, 0.02),
    },
    ("capsule3d", "standard"): {
        "n_obstacles": 6, "obstacle_radius": (0.04, 0.10),
        "length": (0.10, 0.25), "radius": (0.03, 0.06),
    },
    ("arm22", "standard"): {
        "n_obstacles": 3, "obstacle_radius": (0.02, 0.06),
        "root_box": (0.25, 0.75), "link_length": (0.10, 0.18),
        "radius": (0.01, 0.02),
    },
    ("arm33", "standard"): {
        "n_obstacles": 3, "obstacle_radius": (0.03, 0.07),
        "root_box": (0.25, 0.75), "link_length": (0.09, 0.16),
        "radius": (0.015, 0.03),
    },
    ("dubins2d", "standard"): {
        "n_obstacles": 6, "obstacle_radius": (0.03, 0.08),
        "radius": (0.03, 0.06), "turning_radius": (0.05, 0.12),
    },
    ("snake2d", "standard"): {
        "n_obstacles": 4, "obstacle_radius": (0.03, 0.07),
        "link_length": (0.05, 0.10), "radius": (0.008, 0.015),
    },
}


def scenario_config(scenario: str, profile: str = "standard",
                    overrides: dict | None = None) -> dict:
    key = (scenario, profile)
    if key not in DEFAULT_CONFIGS:
        if (scenario, "standard") not in DEFAULT_CONFIGS:
            raise ValueError(f"unknown scenario {scenario!r}")
        raise ValueError(f"no {profile!r} profile for {scenario!r}")
    cfg = dict(DEFAULT_CONFIGS[key])
    if overrides:
        cfg.update(overrides)
    return cfg


def _sample_model(scenario: str, cfg: dict, rng: random.Random) -> RobotModel:
    def u(key):
        lo, hi = cfg[key]
        return rng.uniform(lo, hi)

    if scenario in ("point2d", "point3d"):
        return RobotModel(scenario, radius=u("radius"))
    if scenario in ("line2d", "capsule3d"):
        return RobotModel(scenario, radius=u("radius"), length=u("length"))
    if scenario == "arm22":
        lo, hi = cfg["root_box"]
        return RobotModel(scenario, radius=u("radius"),
                          link_lengths=(u("link_length"), u("link_length")),
                          root=(rng.uniform(lo, hi), rng.uniform(lo, hi)))
    if scenario == "arm33":
        lo, hi = cfg["root_box"]
        return RobotModel(scenario, radius=u("radius"),
                          link_lengths=tuple(u("link_length") for _ in range(3)),
                          root=(rng.uniform(lo, hi), rng.uniform(lo, hi),
                                rng.uniform(lo, hi)))
    if scenario == "dubins2d":
        return RobotModel(scenario, radius=u("radius"),
                          turning_radius=u("turning_radius"))
    if scenario == "snake2d":
        return RobotModel(scenario, radius=u("radius"),
                          link_lengths=tuple(u("link_length") for _ in range(4)))
    raise ValueError(f"unknown scenario {scenario!r}")


def _sample_obstacles(scenario: str, cfg: dict, rng: random.Random, wd: int):
    lo, hi = cfg["obstacle_radius"]
    return [
        SphereObstacle(tuple(rng.random() for _ in range(wd)),
                       rng.uniform(lo, hi))
        for _ in range(cfg["n_obstacles"])
    ]


def _place_team(models, obstacles, margins, rng, tries_per_robot=100):
    states = []
    for model, margin in zip(models, margins):
        placed = None
        for _ in range(tries_per_robot):
            q = sample(model, rng)
            if not state_valid(model, q, obstacles, margin):
                continue
            if static_config_clear(models[: len(states)] + [model], states + [q]):
                placed = q
                break
        if placed is None:
            return None
        states.append(placed)
    return states


def _solo_paths_interact(models, starts, goals, resolution) -> bool:
    n = len(models)
    for i in range(n):
        for j in range(i + 1, n):
            if collide_pair(models[i], models[j], starts[i], goals[i],
                            starts[j], goals[j], resolution):
                return True
    return False


def gen_instance(scenario: str, n_robots: int | None = None, seed: int = 0,
                 profile: str = "standard", config: dict | None = None,
                 max_rounds: int = 100_000) -> Instance:
    """Deterministic rejection-sampled instance. N defaults to uniform 2..8."""
    rng = random.Random(seed)
    cfg = scenario_config(scenario, profile, config)
    n = n_robots if n_robots is not None else rng.randint(2, 8)
    wd = 3 if scenario in ("point3d", "capsule3d", "arm33") else 2
    for _ in range(max_rounds):
        obstacles = _sample_obstacles(scenario, cfg, rng, wd)
        models = [_sample_model(scenario, cfg, rng) for _ in range(n)]
        margins = [vertex_margin(m) for m in models]
        starts = _place_team(models, obstacles, margins, rng)
        if starts is None:
            continue
        goals = _place_team(models, obstacles, margins, rng)
        if goals is None:
            continue
        if not _solo_paths_interact(models, starts, goals, 0.02):
            continue
        return Instance(scenario=scenario, models=models, starts=starts,
                        goals=goals, obstacles=obstacles, seed=seed,
                        id=f"{scenario}-{profile}-n{n}-s{seed}")
    raise GenerationFailure(
        f"no valid {scenario} instance with N={n} in {max_rounds} rounds")

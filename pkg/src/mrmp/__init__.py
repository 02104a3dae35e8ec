"""Multi-robot motion planning toolkit.

Core solver: simultaneous roadmap growth and operator-decomposed best-first
search over the product of per-robot roadmaps. Includes five baseline
solvers, eight robot scenario models, conservative swept-volume collision
checking, solution smoothing via temporal plan graphs, and a reproducible
benchmark harness with an independent solution verifier.
"""

from .baselines import (
    BaselineParams,
    cbs_solve,
    pp_solve,
    prm_solve,
    rrt_solve,
    rrtc_solve,
)
from .bench import gen_instance, render, run_suite, summarize, tune, verify
from .geometry import Capsule, Segment, SphereObstacle
from .instance import Instance
from .roadmap import InitFailure, Roadmap, init_roadmap
from .robots import (
    DELTA_CC,
    RobotModel,
    connect,
    dist,
    forward_kinematics,
    sample,
    state_valid,
    steer,
)
from .solution import Solution, SolveResult
from .sssp import SsspParams, solve, solve_on_roadmaps

__version__ = "0.1.0"

__all__ = [
    "BaselineParams",
    "Capsule",
    "DELTA_CC",
    "Instance",
    "InitFailure",
    "Roadmap",
    "RobotModel",
    "Segment",
    "Solution",
    "SolveResult",
    "SphereObstacle",
    "SsspParams",
    "cbs_solve",
    "connect",
    "dist",
    "forward_kinematics",
    "gen_instance",
    "init_roadmap",
    "pp_solve",
    "prm_solve",
    "render",
    "rrt_solve",
    "rrtc_solve",
    "run_suite",
    "sample",
    "solve",
    "solve_on_roadmaps",
    "state_valid",
    "steer",
    "summarize",
    "tune",
    "verify",
]

"""Independent solution checker.

Re-validates every solution condition from scratch, sharing only the
geometric kernels and trajectory geometry with the planners (never the
planners' collision code path): endpoint equality, per-edge obstacle/
self-collision/containment validity at twice the planning resolution, and
all-pairs swept-volume collision freedom per timestep. Point robots on
linear motions are checked exactly via capsule hulls, which subsumes any
sampling resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import (
    Capsule,
    body_obstacle_clear,
    capsule_capsule_intersect,
    segment_segment_distance,
)
from ..instance import Instance
from ..robots import DELTA_CC, connect_geometry, forward_kinematics, self_collision_free
from ..solution import Solution

VERIFY_RESOLUTION = DELTA_CC / 2


@dataclass(frozen=True)
class Violation:
    kind: str
    robot: int = -1
    other: int = -1
    step: int = -1
    detail: str = ""


def _exact_hull(model, q_from, q_to):
    """Capsule containing the whole sweep, when one exists exactly."""
    if np.array_equal(q_from, q_to):
        body = forward_kinematics(model, q_from)
        if len(body) == 1:
            return body[0]
        return None
    if model.is_point_body:
        wd = model.workspace_dim
        return Capsule(tuple(q_from[:wd]), tuple(q_to[:wd]), model.radius)
    return None


def _motion_samples(model, q_from, q_to, resolution):
    traj = connect_geometry(model, q_from, q_to)
    n = max(1, math.ceil(traj.cc_length / resolution - 1e-9))
    return [traj.evaluate(k / n) for k in range(n + 1)]


def _bodies_intersect(body_a, body_b) -> bool:
    for ca in body_a:
        for cb in body_b:
            if capsule_capsule_intersect(ca, cb):
                return True
    return False


def verify(instance: Instance, solution: Solution,
           resolution: float = VERIFY_RESOLUTION) -> list[Violation]:
    """All violations of the solution conditions; empty list means OK."""
    out: list[Violation] = []
    models = instance.models
    n = instance.n_robots

    if solution.n_robots != n:
        return [Violation("shape", detail=f"{solution.n_robots} paths for {n} robots")]
    lengths = {len(p) for p in solution.paths}
    if len(lengths) != 1 or min(lengths) < 1:
        return [Violation("shape", detail=f"path lengths {sorted(lengths)}")]

    for i in range(n):
        if not np.array_equal(solution.paths[i][0], instance.starts[i]):
            out.append(Violation("endpoint", robot=i, step=0, detail="start mismatch"))
        if not np.array_equal(solution.paths[i][-1], instance.goals[i]):
            out.append(Violation("endpoint", robot=i, step=solution.T, detail="goal mismatch"))

    # static overlap at the initial configuration (covers T = 0 solutions)
    bodies0 = [forward_kinematics(m, p[0]) for m, p in zip(models, solution.paths)]
    for i in range(n):
        for j in range(i + 1, n):
            if _bodies_intersect(bodies0[i], bodies0[j]):
                out.append(Violation("static", robot=i, other=j, step=0))

    # per-edge obstacle / containment / self-collision validity
    sample_cache: dict = {}
    for i, (model, path) in enumerate(zip(models, solution.paths)):
        for t in range(solution.T):
            a, b = path[t], path[t + 1]
            hull = _exact_hull(model, a, b)
            if hull is not None and not model.ang_idx:
                if not body_obstacle_clear([hull], instance.obstacles,
                                           model.workspace_dim):
                    out.append(Violation("edge", robot=i, step=t + 1,
                                         detail="swept capsule not obstacle-free"))
                continue
            states = _motion_samples(model, a, b, resolution)
            sample_cache[(i, t)] = states
            for q in states:
                body = forward_kinematics(model, q)
                if not body_obstacle_clear(body, instance.obstacles,
                                           model.workspace_dim):
                    out.append(Violation("edge", robot=i, step=t + 1,
                                         detail="sampled state not obstacle-free"))
                    break
                if not self_collision_free(model, body):
                    out.append(Violation("self_collision", robot=i, step=t + 1))
                    break

    # all-pairs swept-volume checks per timestep
    for t in range(solution.T):
        hulls = []
        samples = []
        for i, (model, path) in enumerate(zip(models, solution.paths)):
            hull = _exact_hull(model, path[t], path[t + 1])
            hulls.append(hull)
            if hull is None:
                states = sample_cache.get((i, t))
                if states is None:
                    states = _motion_samples(model, path[t], path[t + 1], resolution)
                samples.append([forward_kinematics(model, q) for q in states])
            else:
                samples.append(None)
        for i in range(n):
            for j in range(i + 1, n):
                if hulls[i] is not None and hulls[j] is not None:
                    hit = capsule_capsule_intersect(hulls[i], hulls[j])
                else:
                    caps_i = [hulls[i]] if hulls[i] is not None else \
                        [c for body in samples[i] for c in body]
                    caps_j = [hulls[j]] if hulls[j] is not None else \
                        [c for body in samples[j] for c in body]
                    hit = any(
                        segment_segment_distance(ci.a, ci.b, cj.a, cj.b)
                        < ci.radius + cj.radius
                        for ci in caps_i for cj in caps_j
                    )
                if hit:
                    out.append(Violation("collision", robot=i, other=j, step=t + 1))
    return out

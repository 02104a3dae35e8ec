"""Inter-robot collision predicates with conservative swept-volume semantics.

Two motions collide when the region swept by robot i over its whole
trajectory intersects the region swept by robot j over its whole trajectory
(time parameters are independent). For point robots on linear motions the
swept region is exactly a capsule, so the test is exact. Other scenarios are
sampled so no body point moves more than `resolution` between samples, with
the clearance threshold inflated by the per-side displacement bound; an
accepting (non-colliding) answer therefore implies the continuous motions
are clear, while collisions may be reported up to one resolution band early.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Capsule, capsule_capsule_intersect, segment_segment_distance
from .robots import DELTA_CC, RobotModel, connect_geometry, forward_kinematics


@dataclass(frozen=True)
class MotionPair:
    """One simultaneous state change for robots i and j."""

    i: int
    j: int
    qi_from: np.ndarray
    qi_to: np.ndarray
    qj_from: np.ndarray
    qj_to: np.ndarray


def swept_capsule(model: RobotModel, q_from, q_to):
    """Exact swept volume as a single capsule, or None if not representable.

    Covers stationary single-capsule bodies and point bodies on linear
    motions (a disk/ball translated along a segment sweeps a capsule).
    """
    if q_from is q_to or np.array_equal(q_from, q_to):
        body = forward_kinematics(model, q_from)
        if len(body) == 1:
            return body[0]
        return None
    if model.is_point_body:
        wd = model.workspace_dim
        return Capsule(tuple(q_from[:wd]), tuple(q_to[:wd]), model.radius)
    return None


def _sampled_bodies(model, q_from, q_to, resolution):
    traj = connect_geometry(model, q_from, q_to)
    n = max(1, math.ceil(traj.cc_length / resolution - 1e-9))
    return [forward_kinematics(model, traj.evaluate(k / n)) for k in range(n + 1)]


def _bounding_sphere(bodies):
    pts = []
    max_r = 0.0
    for body in bodies:
        for cap in body:
            pts.append(cap.a)
            pts.append(cap.b)
            if cap.radius > max_r:
                max_r = cap.radius
    arr = np.asarray(pts)
    center = 0.5 * (arr.min(axis=0) + arr.max(axis=0))
    rad = math.sqrt(((arr - center) ** 2).sum(axis=1).max()) + max_r
    return center, rad


def _swept_side(model, q_from, q_to, resolution):
    """(list of sampled bodies, clearance margin) for one robot's motion.

    Exact sides (capsule hull or stationary body) carry zero margin; sampled
    sides carry half a resolution of displacement slack.
    """
    cap = swept_capsule(model, q_from, q_to)
    if cap is not None:
        return [[cap]], 0.0
    if np.array_equal(q_from, q_to):
        return [forward_kinematics(model, q_from)], 0.0
    return _sampled_bodies(model, q_from, q_to, resolution), 0.5 * resolution


def collide_pair(model_i: RobotModel, model_j: RobotModel,
                 qi_from, qi_to, qj_from, qj_to,
                 resolution: float = DELTA_CC) -> bool:
    """True iff the two swept regions intersect (strict at contact)."""
    cap_i = swept_capsule(model_i, qi_from, qi_to)
    cap_j = swept_capsule(model_j, qj_from, qj_to)
    if cap_i is not None and cap_j is not None:
        return capsule_capsule_intersect(cap_i, cap_j)

    bodies_i, margin_i = _swept_side(model_i, qi_from, qi_to, resolution)
    bodies_j, margin_j = _swept_side(model_j, qj_from, qj_to, resolution)
    margin = margin_i + margin_j

    if len(bodies_i) * len(bodies_j) > 4:
        ci, ri = _bounding_sphere(bodies_i)
        cj, rj = _bounding_sphere(bodies_j)
        if math.dist(ci, cj) >= ri + rj + margin:
            return False

    for body_i in bodies_i:
        for ci in body_i:
            for body_j in bodies_j:
                for cj in body_j:
                    d = segment_segment_distance(ci.a, ci.b, cj.a, cj.b)
                    if d < ci.radius + cj.radius + margin:
                        return True
    return False


def collide_pair_mp(model_i, model_j, mp: MotionPair, resolution: float = DELTA_CC) -> bool:
    return collide_pair(model_i, model_j, mp.qi_from, mp.qi_to, mp.qj_from, mp.qj_to, resolution)


def collide_config(models, q_from_list, q_to_list, resolution: float = DELTA_CC) -> bool:
    """True iff some pair (i, j), i < j, collides under collide_pair."""
    n = len(models)
    for i in range(n):
        for j in range(i + 1, n):
            if collide_pair(models[i], models[j],
                            q_from_list[i], q_to_list[i],
                            q_from_list[j], q_to_list[j], resolution):
                return True
    return False


def collide_config_moving(models, q_from_list, q_to_list, moving: int,
                          resolution: float = DELTA_CC) -> bool:
    """collide_config when only robot `moving` changes state.

    Pairs not involving the mover are stationary-vs-stationary; when the
    predecessor configuration was pairwise collision-free those pairs stay
    clear, so checking the mover against everyone else is equivalent.
    """
    qi_from = q_from_list[moving]
    qi_to = q_to_list[moving]
    mi = models[moving]
    for j in range(len(models)):
        if j == moving:
            continue
        if collide_pair(mi, models[j], qi_from, qi_to,
                        q_from_list[j], q_to_list[j], resolution):
            return True
    return False


def static_config_clear(models, states) -> bool:
    """True iff all robot bodies are pairwise disjoint (no motion)."""
    bodies = [forward_kinematics(m, q) for m, q in zip(models, states)]
    n = len(models)
    for i in range(n):
        for j in range(i + 1, n):
            for ci in bodies[i]:
                for cj in bodies[j]:
                    if capsule_capsule_intersect(ci, cj):
                        return False
    return True

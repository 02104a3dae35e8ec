"""Exact low-level geometric kernels: points, segments, spheres, capsules.

All distances are closed-form (no iterative minimization) and work for both
2D and 3D points. Intersection tests use strict inequality everywhere, so two
bodies that exactly touch do NOT count as colliding; this keeps analytically
tangent fixtures deterministic.

The workspace is the closed unit box [0, 1]^d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

Point = Sequence[float]

_EPS_SQ = 1e-18  # squared-length cutoff for degenerate segments


@dataclass(frozen=True)
class Segment:
    a: tuple
    b: tuple


@dataclass(frozen=True)
class SphereObstacle:
    center: tuple
    radius: float


@dataclass(frozen=True)
class Capsule:
    """Swept sphere: all points within `radius` of the segment a-b."""

    a: tuple
    b: tuple
    radius: float


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    """Minimum distance from point p to segment a-b (2D or 3D)."""
    d = len(p)
    ab2 = 0.0
    ap_ab = 0.0
    for k in range(d):
        e = b[k] - a[k]
        ab2 += e * e
        ap_ab += (p[k] - a[k]) * e
    if ab2 <= _EPS_SQ:
        t = 0.0
    else:
        t = ap_ab / ab2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    acc = 0.0
    for k in range(d):
        diff = p[k] - (a[k] + t * (b[k] - a[k]))
        acc += diff * diff
    return math.sqrt(acc)


def segment_segment_distance(p1: Point, q1: Point, p2: Point, q2: Point) -> float:
    """Minimum distance between segments p1-q1 and p2-q2 (2D or 3D).

    Closed form via closest-point parameters, covering degenerate (point)
    and parallel segments.
    """
    d = len(p1)
    a = e = f = c = b = 0.0
    for k in range(d):
        d1 = q1[k] - p1[k]
        d2 = q2[k] - p2[k]
        r = p1[k] - p2[k]
        a += d1 * d1
        e += d2 * d2
        f += d2 * r
        c += d1 * r
        b += d1 * d2
    if a <= _EPS_SQ and e <= _EPS_SQ:
        s = t = 0.0
    elif a <= _EPS_SQ:
        s = 0.0
        t = min(1.0, max(0.0, f / e))
    elif e <= _EPS_SQ:
        t = 0.0
        s = min(1.0, max(0.0, -c / a))
    else:
        denom = a * e - b * b
        if denom > 0.0:
            s = min(1.0, max(0.0, (b * f - c * e) / denom))
        else:
            s = 0.0  # parallel: any s works, clamp t below
        t = (b * s + f) / e
        if t < 0.0:
            t = 0.0
            s = min(1.0, max(0.0, -c / a))
        elif t > 1.0:
            t = 1.0
            s = min(1.0, max(0.0, (b - c) / a))
    acc = 0.0
    for k in range(d):
        diff = (p1[k] + s * (q1[k] - p1[k])) - (p2[k] + t * (q2[k] - p2[k]))
        acc += diff * diff
    return math.sqrt(acc)


def capsule_capsule_intersect(c1: Capsule, c2: Capsule) -> bool:
    """True iff the two capsules overlap; touching is non-colliding."""
    return (
        segment_segment_distance(c1.a, c1.b, c2.a, c2.b)
        < c1.radius + c2.radius
    )


def capsule_in_box(cap: Capsule, dim: int, margin: float = 0.0) -> bool:
    """True iff the capsule lies inside the unit box, inflated by its radius.

    `margin` shrinks the box further; used for conservative planning checks.
    """
    r = cap.radius + margin
    for k in range(dim):
        lo = cap.a[k] if cap.a[k] < cap.b[k] else cap.b[k]
        hi = cap.a[k] if cap.a[k] > cap.b[k] else cap.b[k]
        if lo - r < 0.0 or hi + r > 1.0:
            return False
    return True


def capsule_clear_of_obstacle(cap: Capsule, obs: SphereObstacle, margin: float = 0.0) -> bool:
    """True iff capsule and sphere are disjoint (touching counts as clear)."""
    return (
        point_segment_distance(obs.center, cap.a, cap.b)
        >= cap.radius + obs.radius + margin
    )


def body_obstacle_clear(
    body: list[Capsule],
    obstacles: list[SphereObstacle],
    workspace_dim: int,
    margin: float = 0.0,
) -> bool:
    """True iff every body capsule avoids all obstacles and stays in the box.

    Single source of truth for "obstacle-free": containment in the unit box
    (inflated by the capsule radius) is enforced here, not in the samplers.
    """
    for cap in body:
        if not capsule_in_box(cap, workspace_dim, margin):
            return False
        for obs in obstacles:
            if not capsule_clear_of_obstacle(cap, obs, margin):
                return False
    return True

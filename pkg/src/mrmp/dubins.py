"""Shortest bounded-curvature (Dubins) paths between planar poses.

A pose is (x, y, heading). The shortest path is the minimum over the six
words LSL, RSR, LSR, RSL, RLR, LRL, each computed in closed form on the
normalized problem (unit turning radius, start at origin). Evaluation walks
the three segments at a given arc length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")


def _mod2pi(x: float) -> float:
    return x % TWO_PI


def _lsl(alpha: float, beta: float, d: float):
    tmp0 = d + math.sin(alpha) - math.sin(beta)
    p_sq = 2.0 + d * d - 2.0 * math.cos(alpha - beta) + 2.0 * d * (math.sin(alpha) - math.sin(beta))
    if p_sq < 0.0:
        return None
    tmp1 = math.atan2(math.cos(beta) - math.cos(alpha), tmp0)
    return (_mod2pi(-alpha + tmp1), math.sqrt(p_sq), _mod2pi(beta - tmp1))


def _rsr(alpha: float, beta: float, d: float):
    tmp0 = d - math.sin(alpha) + math.sin(beta)
    p_sq = 2.0 + d * d - 2.0 * math.cos(alpha - beta) + 2.0 * d * (math.sin(beta) - math.sin(alpha))
    if p_sq < 0.0:
        return None
    tmp1 = math.atan2(math.cos(alpha) - math.cos(beta), tmp0)
    return (_mod2pi(alpha - tmp1), math.sqrt(p_sq), _mod2pi(-beta + tmp1))


def _lsr(alpha: float, beta: float, d: float):
    p_sq = -2.0 + d * d + 2.0 * math.cos(alpha - beta) + 2.0 * d * (math.sin(alpha) + math.sin(beta))
    if p_sq < 0.0:
        return None
    p = math.sqrt(p_sq)
    tmp2 = math.atan2(-math.cos(alpha) - math.cos(beta), d + math.sin(alpha) + math.sin(beta)) - math.atan2(-2.0, p)
    return (_mod2pi(-alpha + tmp2), p, _mod2pi(-_mod2pi(beta) + tmp2))


def _rsl(alpha: float, beta: float, d: float):
    p_sq = d * d - 2.0 + 2.0 * math.cos(alpha - beta) - 2.0 * d * (math.sin(alpha) + math.sin(beta))
    if p_sq < 0.0:
        return None
    p = math.sqrt(p_sq)
    tmp2 = math.atan2(math.cos(alpha) + math.cos(beta), d - math.sin(alpha) - math.sin(beta)) - math.atan2(2.0, p)
    return (_mod2pi(alpha - tmp2), p, _mod2pi(beta - tmp2))


def _rlr(alpha: float, beta: float, d: float):
    tmp = (6.0 - d * d + 2.0 * math.cos(alpha - beta) + 2.0 * d * (math.sin(alpha) - math.sin(beta))) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = _mod2pi(TWO_PI - math.acos(tmp))
    t = _mod2pi(alpha - math.atan2(math.cos(alpha) - math.cos(beta), d - math.sin(alpha) + math.sin(beta)) + _mod2pi(p / 2.0))
    return (t, p, _mod2pi(alpha - beta - t + _mod2pi(p)))


def _lrl(alpha: float, beta: float, d: float):
    tmp = (6.0 - d * d + 2.0 * math.cos(alpha - beta) + 2.0 * d * (math.sin(beta) - math.sin(alpha))) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = _mod2pi(TWO_PI - math.acos(tmp))
    t = _mod2pi(-alpha - math.atan2(math.cos(alpha) - math.cos(beta), d + math.sin(alpha) - math.sin(beta)) + p / 2.0)
    return (t, p, _mod2pi(_mod2pi(beta) - alpha - t + _mod2pi(p)))


_WORD_FNS = {"LSL": _lsl, "RSR": _rsr, "LSR": _lsr, "RSL": _rsl, "RLR": _rlr, "LRL": _lrl}


def word_length(word: str, alpha: float, beta: float, d: float) -> float:
    """Normalized (unit-radius) length of one word, or +inf if infeasible."""
    seg = _WORD_FNS[word](alpha, beta, d)
    if seg is None:
        return math.inf
    return seg[0] + seg[1] + seg[2]


@dataclass(frozen=True)
class DubinsPath:
    """Shortest Dubins path from pose q0 to pose q1 with turning radius rho."""

    q0: tuple  # (x, y, heading)
    q1: tuple
    rho: float
    word: str
    segs: tuple  # normalized segment lengths (t, p, q)

    @property
    def length(self) -> float:
        return (self.segs[0] + self.segs[1] + self.segs[2]) * self.rho

    def evaluate(self, s: float) -> tuple:
        """Pose after arc length s from the start (s in [0, length])."""
        s_norm = min(max(s / self.rho, 0.0), self.segs[0] + self.segs[1] + self.segs[2])
        x, y, th = 0.0, 0.0, self.q0[2]
        for seg_len, seg_type in zip(self.segs, self.word):
            step = min(s_norm, seg_len)
            x, y, th = _advance(x, y, th, step, seg_type)
            s_norm -= step
            if s_norm <= 0.0:
                break
        return (self.q0[0] + x * self.rho, self.q0[1] + y * self.rho, th)


def _advance(x: float, y: float, th: float, step: float, seg_type: str):
    if seg_type == "L":
        return (
            x + math.sin(th + step) - math.sin(th),
            y - math.cos(th + step) + math.cos(th),
            th + step,
        )
    if seg_type == "R":
        return (
            x - math.sin(th - step) + math.sin(th),
            y + math.cos(th - step) - math.cos(th),
            th - step,
        )
    return (x + math.cos(th) * step, y + math.sin(th) * step, th)


def shortest_path(q0, q1, rho: float) -> DubinsPath:
    """Minimum-length Dubins path among all six words.

    At least one word is always feasible (Dubins' theorem), so this never
    fails for rho > 0.
    """
    dx = q1[0] - q0[0]
    dy = q1[1] - q0[1]
    d = math.hypot(dx, dy) / rho
    phi = math.atan2(dy, dx)
    alpha = _mod2pi(q0[2] - phi)
    beta = _mod2pi(q1[2] - phi)
    best = None
    best_len = math.inf
    for word, fn in _WORD_FNS.items():
        seg = fn(alpha, beta, d)
        if seg is None:
            continue
        total = seg[0] + seg[1] + seg[2]
        if total < best_len:
            best_len = total
            best = (word, seg)
    assert best is not None, "no feasible Dubins word (rho <= 0?)"
    return DubinsPath(q0=tuple(q0), q1=tuple(q1), rho=rho, word=best[0], segs=best[1])

"""Robot scenario models: configuration spaces, body maps, samplers,
metrics, local planners (linear and Dubins), and steering.

Eight scenarios, state layouts (positions in workspace units, angles in
radians, wrapped to (-pi, pi]):

    point2d   (x, y)                          disk, radius r
    point3d   (x, y, z)                       ball, radius r
    line2d    (x, y, th)                      free segment of given length
    capsule3d (x, y, z, yaw, pitch, spin)     capsule along (yaw, pitch);
                                              spin kept for DOF parity,
                                              geometry-inert
    arm22     (th1, th2)                      planar 2-link arm, fixed root
    arm33     (y1, p1, y2, p2, y3, p3)        spatial 3-link arm, universal
                                              (yaw+pitch) joints, fixed root
    dubins2d  (x, y, th)                      disk that moves on Dubins paths
    snake2d   (x, y, th, a1, a2, a3)          4-link chain, base pose plus
                                              relative joint angles

Distances are weighted Euclidean: positional components raw, each wrapped
angular difference scaled by the robot's characteristic length (total body
length; turning radius for dubins2d), which makes angles and positions
commensurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import dubins as _dubins
from .geometry import Capsule, SphereObstacle, body_obstacle_clear, segment_segment_distance

TWO_PI = 2.0 * math.pi

#: Default collision-check resolution: trajectories are sampled so that no
#: body point moves more than this distance (workspace units) between samples.
DELTA_CC = 0.01

SCENARIOS = (
    "point2d",
    "point3d",
    "line2d",
    "capsule3d",
    "arm22",
    "arm33",
    "dubins2d",
    "snake2d",
)

# scenario -> (dof, workspace_dim, num positional components, angular indices)
_LAYOUT = {
    "point2d": (2, 2, 2, ()),
    "point3d": (3, 3, 3, ()),
    "line2d": (3, 2, 2, (2,)),
    "capsule3d": (6, 3, 3, (3, 4, 5)),
    "arm22": (2, 2, 0, (0, 1)),
    "arm33": (6, 3, 0, (0, 1, 2, 3, 4, 5)),
    "dubins2d": (3, 2, 2, (2,)),
    "snake2d": (6, 2, 2, (2, 3, 4, 5)),
}

# non-adjacent link pairs that must not self-collide (adjacent links share a
# joint and always touch, so they are exempt)
_SELF_COLLISION_PAIRS = {
    "arm33": ((0, 2),),
    "snake2d": ((0, 2), (0, 3), (1, 3)),
}


def wrap_angle(x: float) -> float:
    """Wrap to (-pi, pi]; exactly pi stays positive."""
    w = x % TWO_PI
    return w - TWO_PI if w > math.pi else w


@dataclass(frozen=True)
class RobotModel:
    scenario: str
    radius: float
    length: float = 0.0
    link_lengths: tuple = ()
    root: tuple = ()
    turning_radius: float = 0.0

    def __post_init__(self):
        if self.scenario not in _LAYOUT:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.radius < 0.0:
            raise ValueError("radius must be >= 0")
        if self.scenario in ("line2d", "capsule3d") and self.length <= 0.0:
            raise ValueError("length must be > 0")
        if self.scenario == "dubins2d" and self.turning_radius <= 0.0:
            raise ValueError("turning_radius must be > 0")
        n_links = {"arm22": 2, "arm33": 3, "snake2d": 4}.get(self.scenario)
        if n_links is not None and len(self.link_lengths) != n_links:
            raise ValueError(f"{self.scenario} needs {n_links} link lengths")

    @property
    def dof(self) -> int:
        return _LAYOUT[self.scenario][0]

    @property
    def workspace_dim(self) -> int:
        return _LAYOUT[self.scenario][1]

    @property
    def num_pos(self) -> int:
        return _LAYOUT[self.scenario][2]

    @property
    def ang_idx(self) -> tuple:
        return _LAYOUT[self.scenario][3]

    @cached_property
    def char_length(self) -> float:
        """Scale for angular components of the metric."""
        if self.scenario in ("line2d", "capsule3d"):
            return self.length
        if self.scenario in ("arm22", "arm33", "snake2d"):
            return float(sum(self.link_lengths))
        if self.scenario == "dubins2d":
            return self.turning_radius
        return 1.0

    @cached_property
    def cc_factor(self) -> float:
        """Bound on body-point displacement per unit of metric distance."""
        return math.sqrt(1.0 + len(self.ang_idx))

    @property
    def is_point_body(self) -> bool:
        return self.scenario in ("point2d", "point3d")

    @property
    def has_symmetric_connect(self) -> bool:
        return self.scenario != "dubins2d"

    def to_params(self) -> dict:
        out: dict = {"radius": self.radius}
        if self.scenario in ("line2d", "capsule3d"):
            out["length"] = self.length
        if self.link_lengths:
            out["link_lengths"] = list(self.link_lengths)
        if self.root:
            out["root"] = list(self.root)
        if self.scenario == "dubins2d":
            out["turning_radius"] = self.turning_radius
        return out

    @classmethod
    def from_params(cls, scenario: str, params: dict) -> "RobotModel":
        return cls(
            scenario=scenario,
            radius=float(params["radius"]),
            length=float(params.get("length", 0.0)),
            link_lengths=tuple(float(v) for v in params.get("link_lengths", ())),
            root=tuple(float(v) for v in params.get("root", ())),
            turning_radius=float(params.get("turning_radius", 0.0)),
        )


def normalize_state(model: RobotModel, q) -> np.ndarray:
    """Copy with angular components wrapped to (-pi, pi]."""
    out = np.asarray(q, dtype=float).copy()
    for k in model.ang_idx:
        out[k] = wrap_angle(out[k])
    return out


def sample(model: RobotModel, rng) -> np.ndarray:
    """Uniform over [0,1]^positions x (-pi, pi]^angles; not necessarily free."""
    q = np.empty(model.dof)
    npos = model.num_pos
    for k in range(npos):
        q[k] = rng.random()
    for k in range(npos, model.dof):
        q[k] = math.pi - TWO_PI * rng.random()
    return q


def dist(model: RobotModel, p, q) -> float:
    """Weighted Euclidean metric; zero iff equal, triangle inequality holds."""
    acc = 0.0
    for k in range(model.num_pos):
        d = p[k] - q[k]
        acc += d * d
    c = model.char_length
    for k in model.ang_idx:
        d = wrap_angle(p[k] - q[k]) * c
        acc += d * d
    return math.sqrt(acc)


def dist_batch(model: RobotModel, q, mat: np.ndarray) -> np.ndarray:
    """Vectorized dist(model, q, row) over the rows of mat."""
    npos = model.num_pos
    acc = np.zeros(mat.shape[0])
    if npos:
        diff = mat[:, :npos] - np.asarray(q)[:npos]
        acc += np.einsum("ij,ij->i", diff, diff)
    if model.ang_idx:
        idx = list(model.ang_idx)
        ad = mat[:, idx] - np.asarray(q)[idx]
        ad = (ad + math.pi) % TWO_PI - math.pi
        acc += (model.char_length ** 2) * np.einsum("ij,ij->i", ad, ad)
    return np.sqrt(acc)


# ---------------------------------------------------------------------------
# Forward kinematics
# ---------------------------------------------------------------------------

def forward_kinematics(model: RobotModel, q) -> list:
    """Body of the robot at state q, as a list of capsules.

    Point robots yield one degenerate capsule; chains yield one capsule per
    link, with link k's base equal to link k-1's tip.
    """
    s = model.scenario
    r = model.radius
    if s == "point2d" or s == "dubins2d":
        p = (q[0], q[1])
        return [Capsule(p, p, r)]
    if s == "point3d":
        p = (q[0], q[1], q[2])
        return [Capsule(p, p, r)]
    if s == "line2d":
        a = (q[0], q[1])
        b = (q[0] + model.length * math.cos(q[2]), q[1] + model.length * math.sin(q[2]))
        return [Capsule(a, b, r)]
    if s == "capsule3d":
        a = (q[0], q[1], q[2])
        cp = math.cos(q[4])
        direction = (cp * math.cos(q[3]), cp * math.sin(q[3]), math.sin(q[4]))
        b = (
            a[0] + model.length * direction[0],
            a[1] + model.length * direction[1],
            a[2] + model.length * direction[2],
        )
        return [Capsule(a, b, r)]
    if s == "arm22":
        x, y = model.root
        a1 = q[0]
        a2 = q[0] + q[1]
        l1, l2 = model.link_lengths
        p1 = (x + l1 * math.cos(a1), y + l1 * math.sin(a1))
        p2 = (p1[0] + l2 * math.cos(a2), p1[1] + l2 * math.sin(a2))
        return [Capsule((x, y), p1, r), Capsule(p1, p2, r)]
    if s == "arm33":
        return _arm33_body(model, q)
    if s == "snake2d":
        caps = []
        px, py = q[0], q[1]
        ang = q[2]
        for k, lk in enumerate(model.link_lengths):
            if k > 0:
                ang += q[2 + k]
            nx = px + lk * math.cos(ang)
            ny = py + lk * math.sin(ang)
            caps.append(Capsule((px, py), (nx, ny), r))
            px, py = nx, ny
        return caps
    raise AssertionError(s)


def _arm33_body(model: RobotModel, q) -> list:
    # universal joints: each applies yaw about local z then pitch about local y
    rot = np.eye(3)
    p = np.asarray(model.root, dtype=float)
    caps = []
    for k, lk in enumerate(model.link_lengths):
        yaw, pitch = q[2 * k], q[2 * k + 1]
        cy, sy = math.cos(yaw), math.sin(yaw)
        cp, sp = math.cos(pitch), math.sin(pitch)
        rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
        ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
        rot = rot @ rz @ ry
        tip = p + lk * rot[:, 0]
        caps.append(Capsule(tuple(p), tuple(tip), model.radius))
        p = tip
    return caps


def self_collision_free(model: RobotModel, body: list, margin: float = 0.0) -> bool:
    """True iff no two non-adjacent links intersect as capsules."""
    pairs = _SELF_COLLISION_PAIRS.get(model.scenario)
    if not pairs:
        return True
    for i, j in pairs:
        ci, cj = body[i], body[j]
        if segment_segment_distance(ci.a, ci.b, cj.a, cj.b) < ci.radius + cj.radius + margin:
            return False
    return True


def state_valid(model: RobotModel, q, obstacles, margin: float = 0.0) -> bool:
    """Obstacle-free: body clear of obstacles, inside the box, no self-collision."""
    body = forward_kinematics(model, q)
    if not body_obstacle_clear(body, obstacles, model.workspace_dim, margin):
        return False
    return self_collision_free(model, body, margin)


def vertex_margin(model: RobotModel, resolution: float = DELTA_CC) -> float:
    """Clearance margin roadmap vertices need so local plans through them
    can pass the conservative sampled validation (exact scenarios need none)."""
    return 0.0 if model.is_point_body else 0.5 * resolution


# ---------------------------------------------------------------------------
# Trajectories and the local planner
# ---------------------------------------------------------------------------

class Trajectory:
    """Deterministic motion between two states, evaluable at tau in [0, 1].

    kind "linear": component-wise interpolation, angles along the shorter arc
    (exact pi differences break toward the positive direction).
    kind "dubins": shortest Dubins path in (x, y), heading follows the path.

    `length` is the path length in the model's metric (equal to the
    positional path length for point robots; arc length for Dubins paths).
    """

    __slots__ = ("model", "q_from", "q_to", "length", "_delta", "_dpath")

    def __init__(self, model: RobotModel, q_from: np.ndarray, q_to: np.ndarray,
                 delta=None, dpath=None):
        self.model = model
        self.q_from = q_from
        self.q_to = q_to
        self._delta = delta
        self._dpath = dpath
        if dpath is not None:
            self.length = dpath.length
        else:
            self.length = dist(model, q_from, q_to)

    @property
    def kind(self) -> str:
        return "linear" if self._dpath is None else "dubins"

    @property
    def dubins_word(self):
        return None if self._dpath is None else self._dpath.word

    @property
    def cc_length(self) -> float:
        """Length whose division by delta_cc bounds body displacement per sample."""
        if self._dpath is not None:
            return self.length
        return self.length * self.model.cc_factor

    def evaluate(self, tau: float) -> np.ndarray:
        if tau <= 0.0:
            return self.q_from.copy()
        if tau >= 1.0:
            return self.q_to.copy()
        if self._dpath is not None:
            x, y, th = self._dpath.evaluate(tau * self._dpath.length)
            return np.array([x, y, wrap_angle(th)])
        q = self.q_from + tau * self._delta
        for k in self.model.ang_idx:
            q[k] = wrap_angle(q[k])
        return q


def connect_geometry(model: RobotModel, q_from, q_to) -> Trajectory:
    """Trajectory geometry between two states, ignoring obstacles.

    Stationary motions (q_from == q_to) are always a zero-length linear
    trajectory, even for dubins2d.
    """
    q_from = np.asarray(q_from, dtype=float)
    q_to = np.asarray(q_to, dtype=float)
    if model.scenario == "dubins2d" and not np.array_equal(q_from, q_to):
        dpath = _dubins.shortest_path(
            (q_from[0], q_from[1], q_from[2]),
            (q_to[0], q_to[1], q_to[2]),
            model.turning_radius,
        )
        return Trajectory(model, q_from, q_to, dpath=dpath)
    delta = q_to - q_from
    for k in model.ang_idx:
        delta[k] = wrap_angle(delta[k])
    return Trajectory(model, q_from, q_to, delta=delta)


def trajectory_valid(model: RobotModel, traj: Trajectory, obstacles,
                     resolution: float = DELTA_CC, margin: float | None = None) -> bool:
    """Obstacle validity of a whole trajectory.

    Point robots on linear motions are checked exactly (the swept volume of a
    moving disk/ball is a capsule). Stationary motions check the single state
    exactly. Everything else is sampled so no body point moves more than
    `resolution` between samples; `margin` (default resolution/2) inflates
    the clearance so that an accepting answer implies the continuous motion
    is valid, not just the sampled states.
    """
    if traj.length == 0.0:
        return state_valid(model, traj.q_from, obstacles, 0.0)
    if model.is_point_body and traj.kind == "linear":
        wd = model.workspace_dim
        cap = Capsule(tuple(traj.q_from[:wd]), tuple(traj.q_to[:wd]), model.radius)
        return body_obstacle_clear([cap], obstacles, wd, 0.0)
    if margin is None:
        margin = 0.5 * resolution
    n = max(1, math.ceil(traj.cc_length / resolution - 1e-9))
    for k in range(n + 1):
        if not state_valid(model, traj.evaluate(k / n), obstacles, margin):
            return False
    return True


def connect(model: RobotModel, q_from, q_to, obstacles,
            resolution: float = DELTA_CC, margin: float | None = None):
    """Local planner: a valid trajectory from q_from to q_to, or None.

    connect(q, q) always succeeds with a zero-length trajectory when q is
    obstacle-free (stationary motions are allowed in every scenario).
    """
    traj = connect_geometry(model, q_from, q_to)
    if trajectory_valid(model, traj, obstacles, resolution, margin):
        return traj
    return None


# ---------------------------------------------------------------------------
# Steering
# ---------------------------------------------------------------------------

_STEER_BACKOFF = 1e-9  # keeps returned states strictly clear of tangency


def steer(model: RobotModel, q_from, q_target, eps: float, obstacles,
          resolution: float = DELTA_CC, margin: float | None = None):
    """Move from q_from toward q_target, truncated to metric range eps.

    Walks the connect geometry, backing off to the last valid state at
    resolution `resolution`. If q_target is within eps and fully
    connectable, returns q_target exactly. Returns None if even the first
    step is invalid. The result always satisfies
    connect(q_from, result) != None.
    """
    q_from = np.asarray(q_from, dtype=float)
    q_target = np.asarray(q_target, dtype=float)
    if q_from[0] == q_target[0] and np.array_equal(q_from, q_target):
        return q_target.copy()
    traj = connect_geometry(model, q_from, q_target)
    total = dist(model, q_from, q_target)
    if total <= eps and trajectory_valid(model, traj, obstacles, resolution, margin):
        return q_target.copy()
    if model.is_point_body and traj.kind == "linear":
        return _steer_point(model, q_from, q_target, traj, total, eps, obstacles, resolution)
    return _steer_walk(model, q_from, traj, total, eps, obstacles, resolution, margin)


def _steer_point(model, q_from, q_target, traj, total, eps, obstacles, resolution):
    clear = _point_clear_length(model, q_from, q_target, total, obstacles)
    limit = min(total, eps)
    if clear >= limit:
        return traj.evaluate(limit / total)
    k = int((clear - _STEER_BACKOFF) / resolution)
    if k <= 0:
        return None
    return traj.evaluate(k * resolution / total)


def _point_clear_length(model, q_from, q_target, total, obstacles) -> float:
    """Largest t such that the swept disk over [0, t] (metric units) is valid."""
    r = model.radius
    inv = 1.0 / total
    px, py = float(q_from[0]), float(q_from[1])
    ux = (float(q_target[0]) - px) * inv
    uy = (float(q_target[1]) - py) * inv
    t_max = total
    if ux > 1e-15:
        t_max = min(t_max, (1.0 - r - px) / ux)
    elif ux < -1e-15:
        t_max = min(t_max, (r - px) / ux)
    if uy > 1e-15:
        t_max = min(t_max, (1.0 - r - py) / uy)
    elif uy < -1e-15:
        t_max = min(t_max, (r - py) / uy)
    if model.workspace_dim == 2:
        for obs in obstacles:
            c = obs.center
            rr = r + obs.radius
            wx = c[0] - px
            wy = c[1] - py
            wu = wx * ux + wy * uy
            disc = wu * wu - (wx * wx + wy * wy - rr * rr)
            if disc > 0.0:
                root = wu - math.sqrt(disc)
                if 0.0 <= root < t_max:
                    t_max = root
    else:
        pz = float(q_from[2])
        uz = (float(q_target[2]) - pz) * inv
        if uz > 1e-15:
            t_max = min(t_max, (1.0 - r - pz) / uz)
        elif uz < -1e-15:
            t_max = min(t_max, (r - pz) / uz)
        for obs in obstacles:
            c = obs.center
            rr = r + obs.radius
            wx = c[0] - px
            wy = c[1] - py
            wz = c[2] - pz
            wu = wx * ux + wy * uy + wz * uz
            disc = wu * wu - (wx * wx + wy * wy + wz * wz - rr * rr)
            if disc > 0.0:
                root = wu - math.sqrt(disc)
                if 0.0 <= root < t_max:
                    t_max = root
    return t_max if t_max > 0.0 else 0.0


def _steer_walk(model, q_from, traj, total, eps, obstacles, resolution, margin):
    if margin is None:
        margin = 0.5 * resolution
    n = max(1, math.ceil(traj.cc_length / resolution - 1e-9))
    last_ok = 0
    clean_to_eps = False
    for k in range(1, n + 1):
        state = traj.evaluate(k / n)
        if dist(model, q_from, state) > eps:
            clean_to_eps = True
            break
        if not state_valid(model, state, obstacles, margin):
            break
        last_ok = k
    candidates = []
    if clean_to_eps and traj.kind == "linear":
        # metric distance grows linearly along the path: exact eps point
        candidates.append(traj.evaluate(eps / total))
    for k in range(last_ok, 0, -1):
        candidates.append(traj.evaluate(k / n))
    for cand in candidates:
        if connect(model, q_from, cand, obstacles, resolution, margin) is not None:
            return cand
    return None

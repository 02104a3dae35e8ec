"""Solution smoothing and the total-traveling-time metric.

A temporal plan graph (TPG) records, for a synchronized solution, the
per-robot motion chains plus inter-robot precedence: whenever robot j's
motion at a later step would collide (swept-volume sense) with robot i's
motion at an earlier step, j's arrival is ordered after i's. Shortcutting
straightens per-robot subpaths in place without touching any event another
robot depends on, and a simple temporal network over the (smoothed) TPG
yields the earliest event times under unit speed, whose per-robot final
arrivals sum to the total traveling time.
"""

from __future__ import annotations

import math
import random

import numpy as np

from .collision import collide_pair
from .robots import DELTA_CC, connect, connect_geometry
from .solution import Solution


class TemporalPlanGraph:
    """Events are (robot, step); step 0 is the initial event of each robot.

    durations[i][t] is the length of robot i's motion from step t-1 to t
    (index 0 unused). Inter edges (i, t, j, t2) with t < t2 order robot i's
    arrival at step t before robot j's departure into step t2.
    """

    def __init__(self, n_robots: int, horizon: int, durations, inter_edges):
        self.n_robots = n_robots
        self.T = horizon
        self.durations = durations
        self.inter_edges = inter_edges
        self.dependent_events = set()
        for i, t, j, t2 in inter_edges:
            self.dependent_events.add((i, t))
            self.dependent_events.add((j, t2))

    @property
    def n_events(self) -> int:
        return self.n_robots * (self.T + 1)


def _motion_bounds(model, path, durations):
    """Per-step bounding spheres of each motion's swept set.

    Any body point stays within half the trajectory length (times the
    displacement factor) of its pose at the nearer endpoint, so the sphere
    around the reference midpoint with that much slack contains the sweep
    for every trajectory kind, Dubins arcs included.
    """
    extent = model.radius + (model.char_length if model.ang_idx else 0.0)
    wd = model.workspace_dim
    if len(path) < 2:
        return np.zeros((0, wd)), np.zeros(0)
    if model.num_pos:
        ref = [np.asarray(q[:wd]) for q in path]
    else:
        ref = [np.asarray(model.root, dtype=float)] * len(path)
    centers = []
    radii = []
    for t, (a, b) in enumerate(zip(ref, ref[1:])):
        centers.append(0.5 * (a + b))
        slack = 0.5 * model.cc_factor * durations[t + 1]
        radii.append(0.5 * float(np.linalg.norm(b - a)) + extent + slack)
    return np.asarray(centers), np.asarray(radii)


def build_tpg(solution: Solution, models, resolution: float = DELTA_CC) -> TemporalPlanGraph:
    """Temporal dependencies of a verifier-clean synchronized solution."""
    n = solution.n_robots
    horizon = solution.T
    durations = []
    for model, path in zip(models, solution.paths):
        row = [0.0]
        for a, b in zip(path, path[1:]):
            row.append(connect_geometry(model, a, b).length)
        durations.append(row)

    inter = []
    bounds = [_motion_bounds(m, p, d)
              for m, p, d in zip(models, solution.paths, durations)]
    for i in range(n):
        ci, ri = bounds[i]
        for j in range(i + 1, n):
            cj, rj = bounds[j]
            # bounding-sphere prefilter over all step pairs
            dmat = np.linalg.norm(ci[:, None, :] - cj[None, :, :], axis=2)
            near = dmat < (ri[:, None] + rj[None, :])
            for ta, tb in zip(*np.nonzero(near)):
                ta, tb = int(ta) + 1, int(tb) + 1
                if ta == tb:
                    continue  # same-step pairs are the solution's own checks
                if collide_pair(models[i], models[j],
                                solution.paths[i][ta - 1], solution.paths[i][ta],
                                solution.paths[j][tb - 1], solution.paths[j][tb],
                                resolution):
                    if ta < tb:
                        inter.append((i, ta, j, tb))
                    else:
                        inter.append((j, tb, i, ta))
    return TemporalPlanGraph(n, horizon, durations, inter)


def earliest_schedule(tpg: TemporalPlanGraph):
    """Earliest event times: longest paths through the precedence DAG.

    Every edge strictly increases the step index, so processing steps in
    ascending order is a topological order.
    """
    times = [[0.0] * (tpg.T + 1) for _ in range(tpg.n_robots)]
    incoming: dict = {}
    for i, t, j, t2 in tpg.inter_edges:
        incoming.setdefault((j, t2), []).append((i, t))
    for step in range(1, tpg.T + 1):
        for i in range(tpg.n_robots):
            t_arr = times[i][step - 1] + tpg.durations[i][step]
            for (src_i, src_t) in incoming.get((i, step), ()):
                cand = times[src_i][src_t] + tpg.durations[i][step]
                if cand > t_arr:
                    t_arr = cand
            times[i][step] = t_arr
    return times


def path_length(model, path) -> float:
    """Sum of per-step trajectory lengths (metric dist for linear motions)."""
    return sum(connect_geometry(model, a, b).length for a, b in zip(path, path[1:]))


def shortcut(solution: Solution, tpg: TemporalPlanGraph, models, obstacles,
             rng: random.Random, iterations: int | None = None,
             resolution: float = DELTA_CC) -> Solution:
    """Dependency-guarded per-robot shortcutting.

    Repeatedly straightens a random subpath onto the direct local plan
    (keeping the same number of timesteps, so the solution stays
    synchronized). A candidate is rejected unless (a) the direct connect is
    obstacle-valid, (b) no inter-robot TPG dependency touches the replaced
    interior events, and (c) the new motions stay collision-free against
    every other robot at the same timesteps, which keeps the result
    verifier-clean. Per-robot path length never increases.
    """
    n = solution.n_robots
    horizon = solution.T
    paths = [[q.copy() for q in path] for path in solution.paths]
    if horizon < 2:
        return Solution(solution.instance_id, solution.solver, paths,
                        dict(solution.metrics))
    if iterations is None:
        iterations = min(100 * n * horizon, 20_000)
    for _ in range(iterations):
        r = rng.randrange(n)
        a = rng.randrange(0, horizon - 1)
        b = rng.randrange(a + 2, horizon + 1)
        path = paths[r]
        model = models[r]
        old_len = path_length(model, path[a:b + 1])
        traj = connect_geometry(model, path[a], path[b])
        if traj.length >= old_len - 1e-12:
            continue
        if any((r, t) in tpg.dependent_events for t in range(a + 1, b)):
            continue
        if connect(model, path[a], path[b], obstacles, resolution) is None:
            continue
        steps = b - a
        new_states = [traj.evaluate(k / steps) for k in range(1, steps)]
        cand = [path[a]] + new_states + [path[b]]
        if not _replacement_ok(r, a, cand, paths, models, obstacles, resolution):
            continue
        for k, q in enumerate(new_states):
            path[a + 1 + k] = q
    return Solution(solution.instance_id, solution.solver, paths,
                    dict(solution.metrics))


def _replacement_ok(r, a, cand, paths, models, obstacles, resolution) -> bool:
    """Validate the straightened window: per-step local plans exist and the
    new motions are collision-free against all other robots at those steps."""
    model = models[r]
    for k in range(len(cand) - 1):
        if model.scenario == "dubins2d":
            # interior states sit on the original curve, but consecutive
            # shortest Dubins connects may trace different arcs: re-validate
            if connect(model, cand[k], cand[k + 1], obstacles, resolution) is None:
                return False
        t = a + k + 1
        for j in range(len(paths)):
            if j == r:
                continue
            if collide_pair(model, models[j], cand[k], cand[k + 1],
                            paths[j][t - 1], paths[j][t], resolution):
                return False
    return True


def total_traveling_time(solution: Solution, models, obstacles,
                         rng: random.Random | None = None,
                         iterations: int | None = None,
                         resolution: float = DELTA_CC):
    """(raw, N-normalized, smoothed solution) under unit speed.

    Builds the TPG, shortcuts, rebuilds the TPG on the smoothed solution,
    and sums each robot's earliest final-event time.
    """
    rng = rng or random.Random(0)
    tpg = build_tpg(solution, models, resolution)
    if iterations == 0:
        smoothed = solution
    else:
        smoothed = shortcut(solution, tpg, models, obstacles, rng, iterations,
                            resolution)
        tpg = build_tpg(smoothed, models, resolution)
    times = earliest_schedule(tpg)
    raw = float(sum(times[i][solution.T] for i in range(solution.n_robots)))
    return raw, raw / solution.n_robots, smoothed

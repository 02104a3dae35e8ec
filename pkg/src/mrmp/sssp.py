"""Simultaneous sampling-and-search planning.

The solver grows per-robot roadmaps and searches their Cartesian product at
the same time. Search nodes hold one roadmap vertex per robot plus the index
of the robot that acts next; expanding a node first grows that robot's
roadmap by steering toward random samples (vertex expansion), then pushes
one successor per outgoing roadmap edge (search node expansion), so the
branching factor stays per-robot instead of exponential in the team size.
Each outer search iteration runs best-first to exhaustion over the current
roadmaps, then shrinks the vertex-spacing thresholds and restarts with fresh
search state; roadmaps persist across iterations. Within one iteration the
reachable search space is finite, so a solution on the frozen roadmaps is
always found if one exists.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from .collision import collide_pair
from .geometry import point_segment_distance
from .instance import Instance
from .roadmap import InitFailure, Roadmap, SolveTimeout, init_roadmap
from .robots import DELTA_CC, RobotModel, dist, sample, steer
from .solution import (
    OUTCOME_INIT_FAILURE,
    OUTCOME_SOLVED,
    OUTCOME_TIMEOUT,
    OUTCOME_UNSOLVABLE,
    Solution,
    SolveResult,
)


@dataclass(frozen=True)
class SsspParams:
    m_samples: int = 10            # steering samples per vertex expansion
    theta: float | tuple | None = None  # vertex spacing threshold(s); None = per-scenario default
    gamma: float = 0.8             # threshold decay per outer iteration
    eps: float = 0.2               # steering range (also edge-connect radius)
    time_limit: float = 60.0
    seed: int = 0
    resolution: float = DELTA_CC
    collision_mode: str = "stationary"  # "stationary" | "block"
    score_mode: str = "goal_dist"       # "goal_dist" | "random" (ablation)
    init_budget: int = 100_000
    vertex_expansion: bool = True       # ablation switch
    distance_check: bool = True         # ablation switch
    initial_roadmap: bool = True        # ablation switch
    max_iterations: int | None = None   # cap on outer iterations (None = until timeout)

    def __post_init__(self):
        if self.m_samples < 1:
            raise ValueError("m_samples must be >= 1")
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must be in (0, 1)")
        if self.eps <= 0.0:
            raise ValueError("eps must be > 0")
        if self.collision_mode not in ("stationary", "block"):
            raise ValueError(f"bad collision_mode {self.collision_mode!r}")
        if self.score_mode not in ("goal_dist", "random"):
            raise ValueError(f"bad score_mode {self.score_mode!r}")


def default_theta(model: RobotModel) -> float:
    """Published point-robot default, scaled by body length elsewhere."""
    if model.scenario in ("point2d", "point3d", "dubins2d"):
        return 0.05
    return 0.05 * model.char_length


class SearchNode:
    __slots__ = ("config", "next_i", "parent", "depth")

    def __init__(self, config: tuple, next_i: int, parent, depth: int):
        self.config = config
        self.next_i = next_i
        self.parent = parent
        self.depth = depth


def score_config(config: tuple, roadmaps) -> float:
    """Sum of per-robot goal distances; +inf if any robot is disconnected."""
    total = 0.0
    for rm, vid in zip(roadmaps, config):
        d = rm.goal_dist[vid]
        if d == math.inf:
            return math.inf
        total += d
    return total


def retroactive_collide(models, roadmaps, node: SearchNode, new_config: tuple,
                        resolution: float = DELTA_CC) -> bool:
    """Block-mode collision check against earlier motions of the same block.

    Walks parent links back to the block boundary, testing the next robot's
    motion against each robot that already moved in this block.
    """
    i = node.next_i
    rm_i = roadmaps[i]
    qi_from = rm_i.states[node.config[i]]
    qi_to = rm_i.states[new_config[i]]
    last = len(models) - 1
    s = node
    while s.parent is not None and s.parent.next_i != last:
        s = s.parent
        j = s.next_i
        rm_j = roadmaps[j]
        if collide_pair(models[i], models[j], qi_from, qi_to,
                        rm_j.states[s.config[j]], rm_j.states[new_config[j]],
                        resolution):
            return True
    return False


def _point_move_blocked(models, roadmaps, config: tuple, i: int,
                        from_id: int, to_id: int) -> bool:
    """Exact single-mover check for all-point-body teams: the swept
    disk/ball is a capsule, everyone else a stationary disk/ball.

    Inlined scalar math with a cheap reach prefilter: a robot farther from
    the motion's start than motion length + radius sum cannot be touched.
    """
    ri = models[i].radius
    qa = roadmaps[i].states_f[from_id]
    qb = roadmaps[i].states_f[to_id]
    if len(qa) == 2:
        ax, ay = qa
        dx = qb[0] - ax
        dy = qb[1] - ay
        ab2 = dx * dx + dy * dy
        seg = math.sqrt(ab2)
        for j in range(len(models)):
            if j == i:
                continue
            qj = roadmaps[j].states_f[config[j]]
            px = qj[0] - ax
            py = qj[1] - ay
            rr = seg + ri + models[j].radius
            d2 = px * px + py * py
            if d2 > rr * rr:
                continue
            if ab2 > 1e-18:
                t = (px * dx + py * dy) / ab2
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                ex = px - t * dx
                ey = py - t * dy
                d2 = ex * ex + ey * ey
            rsum = ri + models[j].radius
            if d2 < rsum * rsum:
                return True
        return False
    for j in range(len(models)):
        if j == i:
            continue
        qj = roadmaps[j].states_f[config[j]]
        if point_segment_distance(qj, qa, qb) < ri + models[j].radius:
            return True
    return False


def _collides_stationary(models, roadmaps, config: tuple, i: int,
                         qi_from, qi_to, resolution: float) -> bool:
    # Only robot i moves; every configuration reached by the search is
    # pairwise statically clear by induction from the instance invariant,
    # so pairs not involving i cannot newly collide.
    for j in range(len(models)):
        if j == i:
            continue
        qj = roadmaps[j].states[config[j]]
        if collide_pair(models[i], models[j], qi_from, qi_to, qj, qj, resolution):
            return True
    return False


def expand_vertices(node: SearchNode, rm: Roadmap, obstacles, params: SsspParams,
                    theta: float, rng) -> int:
    """One round of vertex expansion from the node's active vertex."""
    i = node.next_i
    vid = node.config[i]
    q_from = rm.states[vid]
    threshold = theta if params.distance_check else None
    inserted = 0
    for _ in range(params.m_samples):
        q_rand = sample(rm.model, rng)
        q_new = steer(rm.model, q_from, q_rand, params.eps, obstacles, params.resolution)
        if q_new is None:
            continue
        if rm.add_vertex(q_new, vid, threshold, params.eps) is not None:
            inserted += 1
    return inserted


def expand_node(node: SearchNode, models, roadmaps, discovered: set,
                open_heap: list, counter: int, params: SsspParams, rng) -> int:
    """Push undiscovered, collision-free successors; returns new counter."""
    n = len(models)
    i = node.next_i
    nxt = i + 1 if i != n - 1 else 0
    rm = roadmaps[i]
    config = node.config
    vid = config[i]
    q_from = rm.states[vid]
    block = params.collision_mode == "block"
    all_points = all(m.is_point_body for m in models)
    for to_id, _w in rm.edges[vid]:
        new_config = config[:i] + (to_id,) + config[i + 1:]
        key = (new_config, nxt)
        if key in discovered:
            continue
        if block:
            if retroactive_collide(models, roadmaps, node, new_config, params.resolution):
                continue
        elif all_points:
            if _point_move_blocked(models, roadmaps, config, i, vid, to_id):
                continue
        else:
            if _collides_stationary(models, roadmaps, config, i, q_from,
                                    rm.states[to_id], params.resolution):
                continue
        discovered.add(key)
        child = SearchNode(new_config, nxt, node, node.depth + 1)
        if params.score_mode == "random":
            sc = rng.random()
        else:
            sc = score_config(new_config, roadmaps)
        heappush(open_heap, (sc, -child.depth, counter, child))
        counter += 1
    return counter


def _search_iteration(models, roadmaps, obstacles, params: SsspParams,
                      thetas, rng, deadline, expand: bool):
    """One best-first pass to OPEN exhaustion; returns goal node or None."""
    n = len(models)
    for rm in roadmaps:
        rm.rebuild_goal_dist()
    goal_ids = tuple(rm.goal_id for rm in roadmaps)
    start_cfg = tuple(rm.start_id for rm in roadmaps)
    root = SearchNode(start_cfg, 0, None, 0)
    if params.score_mode == "random":
        root_score = rng.random()
    else:
        root_score = score_config(start_cfg, roadmaps)
    open_heap = [(root_score, 0, 0, root)]
    discovered = {(start_cfg, 0)}
    counter = 1
    block = params.collision_mode == "block"
    pops = 0
    while open_heap:
        pops += 1
        if (pops & 15) == 0 and time.monotonic() > deadline:
            raise SolveTimeout
        _, _, _, node = heappop(open_heap)
        cfg = node.config
        if cfg == goal_ids and (not block or node.next_i == 0):
            return node
        i = node.next_i
        if expand and params.vertex_expansion:
            expand_vertices(node, roadmaps[i], obstacles, params, thetas[i], rng)
        counter = expand_node(node, models, roadmaps, discovered, open_heap,
                              counter, params, rng)
    return None


def backtrack(node: SearchNode, roadmaps, n_robots: int,
              collision_mode: str = "stationary"):
    """Per-robot state paths from a goal node.

    Stationary mode: one search node per timestep (one robot changes state,
    the rest repeat theirs via self-loops). Block mode: every run of
    n_robots successive nodes collapses into one timestep.
    """
    chain = []
    cur = node
    while cur is not None:
        chain.append(cur)
        cur = cur.parent
    chain.reverse()
    if collision_mode == "block":
        assert (len(chain) - 1) % n_robots == 0, "goal node must close a block"
        configs = [chain[k].config for k in range(0, len(chain), n_robots)]
    else:
        configs = [nd.config for nd in chain]
    return [
        [roadmaps[i].states[cfg[i]].copy() for cfg in configs]
        for i in range(n_robots)
    ]


def _resolve_thetas(params: SsspParams, models) -> list:
    if params.theta is None:
        return [default_theta(m) for m in models]
    if isinstance(params.theta, (int, float)):
        return [float(params.theta)] * len(models)
    thetas = [float(t) for t in params.theta]
    if len(thetas) != len(models):
        raise ValueError("theta sequence length must match robot count")
    return thetas


def _bare_roadmap(model, start, goal, obstacles, resolution) -> Roadmap:
    # ablation "no initial roadmap": vertices for start and goal only
    rm = Roadmap(model, obstacles, resolution)
    rm.start_id = rm.append_vertex(start)
    if np.array_equal(start, goal):
        rm.goal_id = rm.start_id
    else:
        rm.goal_id = rm.append_vertex(goal)
    rm.rebuild_goal_dist()
    return rm


def solve(instance: Instance, params: SsspParams | None = None) -> SolveResult:
    """Full solver: initial roadmaps, then outer search iterations with
    threshold decay until a solution, timeout, or init failure."""
    params = params or SsspParams()
    t0 = time.monotonic()
    deadline = t0 + params.time_limit
    models = instance.models
    obstacles = instance.obstacles
    n = instance.n_robots
    rng = random.Random(params.seed)
    init_seeds = [rng.randrange(2 ** 62) for _ in range(n)]
    roadmaps = []
    try:
        for i in range(n):
            if params.initial_roadmap:
                rm = init_roadmap(models[i], instance.starts[i], instance.goals[i],
                                  obstacles, random.Random(init_seeds[i]),
                                  eps=params.eps, budget=params.init_budget,
                                  resolution=params.resolution, deadline=deadline)
            else:
                rm = _bare_roadmap(models[i], instance.starts[i], instance.goals[i],
                                   obstacles, params.resolution)
            roadmaps.append(rm)
    except InitFailure as exc:
        return SolveResult(OUTCOME_INIT_FAILURE, None, time.monotonic() - t0,
                           {"reason": str(exc)})
    except SolveTimeout:
        return SolveResult(OUTCOME_TIMEOUT, None, time.monotonic() - t0,
                           {"phase": "init"})

    thetas = _resolve_thetas(params, models)
    iteration = 0
    try:
        while True:
            iteration += 1
            goal_node = _search_iteration(models, roadmaps, obstacles, params,
                                          thetas, rng, deadline, expand=True)
            if goal_node is not None:
                return _result_from_goal(instance, params, roadmaps, goal_node,
                                         iteration, t0)
            if params.max_iterations is not None and iteration >= params.max_iterations:
                return SolveResult(OUTCOME_UNSOLVABLE, None, time.monotonic() - t0,
                                   {"iterations": iteration, "thetas": list(thetas)})
            thetas = [t * params.gamma for t in thetas]
    except SolveTimeout:
        return SolveResult(OUTCOME_TIMEOUT, None, time.monotonic() - t0,
                           {"iterations": iteration, "thetas": list(thetas)})


def solve_on_roadmaps(instance: Instance, roadmaps, params: SsspParams | None = None) -> SolveResult:
    """Single best-first pass over frozen roadmaps (no vertex expansion).

    Returns UNSOLVABLE when the search space of the given roadmaps admits no
    solution; used by the product-graph oracle suite and baseline studies.
    """
    params = params or SsspParams()
    t0 = time.monotonic()
    deadline = t0 + params.time_limit
    rng = random.Random(params.seed)
    try:
        goal_node = _search_iteration(instance.models, roadmaps, instance.obstacles,
                                      params, _resolve_thetas(params, instance.models),
                                      rng, deadline, expand=False)
    except SolveTimeout:
        return SolveResult(OUTCOME_TIMEOUT, None, time.monotonic() - t0, {})
    if goal_node is None:
        return SolveResult(OUTCOME_UNSOLVABLE, None, time.monotonic() - t0, {})
    return _result_from_goal(instance, params, roadmaps, goal_node, 1, t0)


def _result_from_goal(instance, params, roadmaps, goal_node, iteration, t0) -> SolveResult:
    paths = backtrack(goal_node, roadmaps, instance.n_robots, params.collision_mode)
    wall = time.monotonic() - t0
    metrics = {
        "makespan": len(paths[0]) - 1,
        "sum_path_length": path_length_total(instance.models, paths),
        "search_iterations": iteration,
        "roadmap_sizes": [len(rm) for rm in roadmaps],
    }
    solution = Solution(instance.id, "sssp", paths, metrics)
    return SolveResult(OUTCOME_SOLVED, solution, wall,
                       {"iterations": iteration}, roadmaps=list(roadmaps))


def path_length_total(models, paths) -> float:
    total = 0.0
    for model, path in zip(models, paths):
        for a, b in zip(path, path[1:]):
            total += dist(model, a, b)
    return total

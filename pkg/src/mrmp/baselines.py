"""Baseline multi-robot solvers for comparison.

Composite-space samplers treat the team as one robot in the product
configuration space:

  * prm_solve  - batched k-nearest probabilistic roadmap + graph search
  * rrt_solve  - tree rooted at the start configuration
  * rrtc_solve - bidirectional trees with a greedy connect heuristic

Two-phase MAPF-style solvers run on robot-wise PRMs with space-time A*:

  * pp_solve  - prioritized planning, repeated with random priorities
  * cbs_solve - greedy conflict-based search (conflict-count-first ordering)

All five share the (instance, params) -> SolveResult interface and the same
collision semantics as the main solver.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from .collision import collide_config, collide_pair, static_config_clear
from .instance import Instance
from .roadmap import Roadmap, SolveTimeout
from .robots import (
    DELTA_CC,
    connect,
    connect_geometry,
    dist,
    dist_batch,
    sample,
    state_valid,
    steer,
    vertex_margin,
)
from .solution import OUTCOME_SOLVED, OUTCOME_TIMEOUT, Solution, SolveResult


@dataclass(frozen=True)
class BaselineParams:
    time_limit: float = 60.0
    seed: int = 0
    resolution: float = DELTA_CC
    eps: float = 0.2              # composite steer budget / connect radius scale
    goal_bias: float = 0.05       # RRT sampling bias toward the goal config
    prm_batch: int = 100          # composite PRM samples per growth round
    prm_k: int = 10               # composite PRM neighbor count
    prm_samples: int = 500        # robot-wise PRM size (PP/CBS)
    prm_radius: float = 0.1       # robot-wise PRM connect radius (PP/CBS)
    pp_perm_rounds: int = 50      # priority permutations per roadmap build
    cbs_node_budget: int = 50_000


def _deadline_of(params: BaselineParams) -> float:
    return time.monotonic() + params.time_limit


def _timeout(t0: float) -> SolveResult:
    return SolveResult(OUTCOME_TIMEOUT, None, time.monotonic() - t0, {})


def _solution_from_configs(instance, solver, config_path, t0, extra=None) -> SolveResult:
    paths = [
        [np.asarray(cfg[i], dtype=float).copy() for cfg in config_path]
        for i in range(instance.n_robots)
    ]
    metrics = {"makespan": len(config_path) - 1}
    if extra:
        metrics.update(extra)
    sol = Solution(instance.id, solver, paths, metrics)
    return SolveResult(OUTCOME_SOLVED, sol, time.monotonic() - t0, {})


# ---------------------------------------------------------------------------
# Composite-space helpers
# ---------------------------------------------------------------------------

class _CompositeSpace:
    def __init__(self, instance, params):
        self.models = instance.models
        self.obstacles = instance.obstacles
        self.res = params.resolution
        self.n = instance.n_robots
        self.offsets = []
        off = 0
        for m in self.models:
            self.offsets.append((off, off + m.dof))
            off += m.dof
        self.total_dof = off
        self.margins = [vertex_margin(m, self.res) for m in self.models]

    def concat(self, cfg) -> np.ndarray:
        return np.concatenate([np.asarray(q, dtype=float) for q in cfg])

    def dist(self, a, b) -> float:
        return sum(dist(m, qa, qb) for m, qa, qb in zip(self.models, a, b))

    def dist_batch(self, cfg, mat: np.ndarray) -> np.ndarray:
        acc = np.zeros(mat.shape[0])
        for m, q, (lo, hi) in zip(self.models, cfg, self.offsets):
            acc += dist_batch(m, q, mat[:, lo:hi])
        return acc

    def sample_valid(self, rng, deadline, tries=2000):
        for k in range(tries):
            if (k & 63) == 0 and time.monotonic() > deadline:
                raise SolveTimeout
            cfg = [sample(m, rng) for m in self.models]
            if all(state_valid(m, q, self.obstacles, mg)
                   for m, q, mg in zip(self.models, cfg, self.margins)):
                if static_config_clear(self.models, cfg):
                    return cfg
        return None

    def edge_valid(self, a, b) -> bool:
        """Simultaneous per-robot connects, collision-checked pairwise."""
        for m, qa, qb in zip(self.models, a, b):
            if connect(m, qa, qb, self.obstacles, self.res) is None:
                return False
        return not collide_config(self.models, a, b, self.res)

    def steer(self, q_from_cfg, q_to_cfg, eps):
        """Per-robot steers with a jointly truncated budget; None if stuck."""
        ds = [dist(m, qa, qb) for m, qa, qb in zip(self.models, q_from_cfg, q_to_cfg)]
        total = sum(ds)
        if total < 1e-15:
            return None
        scale = min(1.0, eps / total)
        out = []
        moved = False
        for m, qa, qb, d in zip(self.models, q_from_cfg, q_to_cfg, ds):
            if d < 1e-15:
                out.append(qa.copy())
                continue
            r = steer(m, qa, qb, scale * d, self.obstacles, self.res)
            if r is None:
                r = qa.copy()
            elif not np.array_equal(r, qa):
                moved = True
            out.append(r)
        if not moved:
            return None
        if collide_config(self.models, q_from_cfg, out, self.res):
            return None
        return out

    def steer_backward(self, q_tree_cfg, q_to_cfg, eps):
        """Like steer, but edges must be valid INTO the tree configuration."""
        ds = [dist(m, qa, qb) for m, qa, qb in zip(self.models, q_tree_cfg, q_to_cfg)]
        total = sum(ds)
        if total < 1e-15:
            return None
        scale = min(1.0, eps / total)
        out = []
        moved = False
        for m, qt, qb, d in zip(self.models, q_tree_cfg, q_to_cfg, ds):
            if d < 1e-15:
                out.append(qt.copy())
                continue
            r = _backward_steer(m, qt, qb, scale * d, self.obstacles, self.res)
            if r is None:
                r = qt.copy()
            elif not np.array_equal(r, qt):
                moved = True
            out.append(r)
        if not moved:
            return None
        if collide_config(self.models, out, q_tree_cfg, self.res):
            return None
        return out


def _backward_steer(model, q_tree, q_target, eps, obstacles, resolution):
    """State q_new with connect(q_new, q_tree) valid, pulled toward q_target."""
    if model.has_symmetric_connect:
        return steer(model, q_tree, q_target, eps, obstacles, resolution)
    if np.array_equal(q_tree, q_target):
        return q_target.copy()
    if dist(model, q_target, q_tree) <= eps and \
            connect(model, q_target, q_tree, obstacles, resolution) is not None:
        return q_target.copy()
    geo = connect_geometry(model, q_target, q_tree)
    length = geo.length
    if length <= 0.0:
        return None
    margin = vertex_margin(model, resolution)
    for frac in (1.0, 0.5, 0.25, 0.1):
        s = max(0.0, length - eps * frac)
        cand = geo.evaluate(s / length)
        if state_valid(model, cand, obstacles, margin) and \
                connect(model, cand, q_tree, obstacles, resolution) is not None:
            return cand
    return None


class _ConfigTree:
    def __init__(self, space: _CompositeSpace, root_cfg):
        self.space = space
        self.configs = [root_cfg]
        self.parents = [-1]
        self._mat = np.empty((64, space.total_dof))
        self._mat[0] = space.concat(root_cfg)

    def __len__(self):
        return len(self.configs)

    def add(self, cfg, parent: int) -> int:
        idx = len(self.configs)
        self.configs.append(cfg)
        self.parents.append(parent)
        if idx >= self._mat.shape[0]:
            grown = np.empty((2 * self._mat.shape[0], self.space.total_dof))
            grown[:idx] = self._mat[:idx]
            self._mat = grown
        self._mat[idx] = self.space.concat(cfg)
        return idx

    def nearest(self, cfg) -> int:
        d = self.space.dist_batch(cfg, self._mat[: len(self.configs)])
        return int(np.argmin(d))

    def chain(self, idx: int):
        out = []
        while idx != -1:
            out.append(self.configs[idx])
            idx = self.parents[idx]
        return out


def _cfg_equal(a, b) -> bool:
    return all(np.array_equal(x, y) for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Composite PRM
# ---------------------------------------------------------------------------

def prm_solve(instance: Instance, params: BaselineParams | None = None) -> SolveResult:
    """k-nearest PRM over the composite space, grown until solved or timeout."""
    params = params or BaselineParams()
    t0 = time.monotonic()
    deadline = t0 + params.time_limit
    rng = random.Random(params.seed)
    space = _CompositeSpace(instance, params)

    configs = [list(instance.starts), list(instance.goals)]
    mat = np.empty((256, space.total_dof))
    mat[0] = space.concat(configs[0])
    mat[1] = space.concat(configs[1])
    adj: list[list[tuple[int, float]]] = [[], []]

    def try_edge(u, v):
        if space.edge_valid(configs[u], configs[v]):
            w = space.dist(configs[u], configs[v])
            adj[u].append((v, w))
            adj[v].append((u, w))
            return True
        return False

    try_edge(0, 1)
    try:
        while True:
            if time.monotonic() > deadline:
                return _timeout(t0)
            n_before = len(configs)
            for _ in range(params.prm_batch):
                cfg = space.sample_valid(rng, deadline)
                if cfg is None:
                    return _timeout(t0)
                idx = len(configs)
                configs.append(cfg)
                adj.append([])
                if idx >= mat.shape[0]:
                    grown = np.empty((2 * mat.shape[0], space.total_dof))
                    grown[:idx] = mat[:idx]
                    mat = grown
                mat[idx] = space.concat(cfg)
            for v in range(n_before, len(configs)):
                if time.monotonic() > deadline:
                    return _timeout(t0)
                d = space.dist_batch(configs[v], mat[: len(configs)])
                d[v] = math.inf
                k = min(params.prm_k, len(configs) - 1)
                for u in np.argpartition(d, k - 1)[:k]:
                    u = int(u)
                    if not any(x == v for x, _ in adj[u]):
                        try_edge(u, v)
            path = _dijkstra_path(adj, 0, 1)
            if path is not None:
                return _solution_from_configs(
                    instance, "prm", [configs[i] for i in path], t0,
                    {"prm_vertices": len(configs)})
    except SolveTimeout:
        return _timeout(t0)


def _dijkstra_path(adj, src, dst):
    n = len(adj)
    gd = [math.inf] * n
    parent = [-1] * n
    gd[src] = 0.0
    heap = [(0.0, src)]
    while heap:
        d, u = heappop(heap)
        if d > gd[u]:
            continue
        if u == dst:
            break
        for v, w in adj[u]:
            nd = d + w
            if nd < gd[v]:
                gd[v] = nd
                parent[v] = u
                heappush(heap, (nd, v))
    if gd[dst] == math.inf:
        return None
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    return path[::-1]


# ---------------------------------------------------------------------------
# Composite RRT / RRT-Connect
# ---------------------------------------------------------------------------

def rrt_solve(instance: Instance, params: BaselineParams | None = None) -> SolveResult:
    """Composite-space RRT rooted at the start configuration."""
    params = params or BaselineParams()
    t0 = time.monotonic()
    deadline = t0 + params.time_limit
    rng = random.Random(params.seed)
    space = _CompositeSpace(instance, params)
    goal_cfg = list(instance.goals)
    goal_radius = 0.5 * params.eps

    if _cfg_equal(instance.starts, goal_cfg):
        return _solution_from_configs(instance, "rrt", [list(instance.starts)], t0)

    tree = _ConfigTree(space, list(instance.starts))
    it = 0
    while True:
        it += 1
        if (it & 15) == 0 and time.monotonic() > deadline:
            return _timeout(t0)
        if rng.random() < params.goal_bias:
            q_rand = goal_cfg
        else:
            q_rand = [sample(m, rng) for m in space.models]
        nid = tree.nearest(q_rand)
        q_new = space.steer(tree.configs[nid], q_rand, params.eps)
        if q_new is None:
            continue
        new_idx = tree.add(q_new, nid)
        if space.dist(q_new, goal_cfg) <= goal_radius and space.edge_valid(q_new, goal_cfg):
            path = tree.chain(new_idx)[::-1] + [goal_cfg]
            return _solution_from_configs(instance, "rrt", path, t0,
                                          {"tree_size": len(tree)})


def rrtc_solve(instance: Instance, params: BaselineParams | None = None) -> SolveResult:
    """Composite-space RRT-Connect: alternating trees from start and goal."""
    params = params or BaselineParams()
    t0 = time.monotonic()
    deadline = t0 + params.time_limit
    rng = random.Random(params.seed)
    space = _CompositeSpace(instance, params)
    start_cfg = list(instance.starts)
    goal_cfg = list(instance.goals)

    if _cfg_equal(start_cfg, goal_cfg):
        return _solution_from_configs(instance, "rrtc", [start_cfg], t0)
    if space.edge_valid(start_cfg, goal_cfg):
        return _solution_from_configs(instance, "rrtc", [start_cfg, goal_cfg], t0)

    tree_s = _ConfigTree(space, start_cfg)
    tree_g = _ConfigTree(space, goal_cfg)
    tree_a, a_is_start = tree_s, True

    def extend(tree, q_target):
        nid = tree.nearest(q_target)
        fn = space.steer if tree is tree_s else space.steer_backward
        q_new = fn(tree.configs[nid], q_target, params.eps)
        if q_new is None or space.dist(tree.configs[nid], q_new) < 1e-12:
            return None
        return tree.add(q_new, nid)

    it = 0
    while True:
        it += 1
        if (it & 15) == 0 and time.monotonic() > deadline:
            return _timeout(t0)
        q_rand = [sample(m, rng) for m in space.models]
        new_idx = extend(tree_a, q_rand)
        if new_idx is not None:
            q_new = tree_a.configs[new_idx]
            other = tree_g if tree_a is tree_s else tree_s
            cur = other.nearest(q_new)
            cur_d = space.dist(other.configs[cur], q_new)
            met = -1
            while True:
                if time.monotonic() > deadline:
                    return _timeout(t0)
                fn = space.steer if other is tree_s else space.steer_backward
                q_c = fn(other.configs[cur], q_new, params.eps)
                if q_c is None:
                    break
                d_c = space.dist(q_c, q_new)
                if d_c >= cur_d - 1e-12 and not _cfg_equal(q_c, q_new):
                    break
                cur = other.add(q_c, cur)
                cur_d = d_c
                if _cfg_equal(q_c, q_new):
                    met = cur
                    break
            if met != -1:
                if tree_a is tree_s:
                    s_idx, g_idx = new_idx, met
                else:
                    s_idx, g_idx = met, new_idx
                path = tree_s.chain(s_idx)[::-1] + tree_g.chain(g_idx)[1:]
                return _solution_from_configs(
                    instance, "rrtc", path, t0,
                    {"tree_size": len(tree_s) + len(tree_g)})
        tree_a = tree_g if tree_a is tree_s else tree_s
        a_is_start = not a_is_start


# ---------------------------------------------------------------------------
# Robot-wise PRMs + space-time A* (PP and CBS)
# ---------------------------------------------------------------------------

def build_robot_prm(model, start, goal, obstacles, n_samples, radius, rng,
                    resolution=DELTA_CC, deadline=None) -> Roadmap:
    """Uniform PRM with start/goal vertices, radius-connected, self-loops."""
    rm = Roadmap(model, obstacles, resolution)
    rm.start_id = rm.append_vertex(np.asarray(start, dtype=float))
    if np.array_equal(start, goal):
        rm.goal_id = rm.start_id
    else:
        rm.goal_id = rm.append_vertex(np.asarray(goal, dtype=float))
    margin = vertex_margin(model, resolution)
    tries = 0
    while len(rm) < n_samples + 2 and tries < 100 * n_samples:
        tries += 1
        if (tries & 255) == 0 and deadline is not None and time.monotonic() > deadline:
            raise SolveTimeout
        q = sample(model, rng)
        if state_valid(model, q, obstacles, margin):
            rm.append_vertex(q)
    n = len(rm)
    for u in range(n):
        if deadline is not None and time.monotonic() > deadline:
            raise SolveTimeout
        d = rm.dist_all(rm.states[u])
        for v in np.nonzero(d <= radius)[0]:
            v = int(v)
            if v <= u:
                continue
            if connect(model, rm.states[u], rm.states[v], obstacles, resolution) is not None:
                w = float(d[v])
                rm.edges[u].append((v, w))
                rm.redges[v].append((u, w))
                if model.has_symmetric_connect or \
                        connect(model, rm.states[v], rm.states[u], obstacles, resolution) is not None:
                    rm.edges[v].append((u, w))
                    rm.redges[u].append((v, w))
    rm.rebuild_goal_dist()
    return rm


def space_time_astar(rm: Roadmap, model, earlier=(), horizon=10_000,
                     constraints=None, cat=(), conflicts_first=False,
                     deadline=None, resolution=DELTA_CC, max_pops=2_000_000):
    """A* over (vertex, timestep) with waiting via self-loops.

    `earlier` robots' space-time paths are hard moving obstacles (prioritized
    planning); `constraints` are forbidden (t_arrive, u, v) motions (CBS);
    `cat` paths are soft conflict counts. With conflicts_first the conflict
    count dominates the path cost (greedy mode: avoid other robots as much
    as possible), otherwise it only tie-breaks equal costs. Paths may end
    only when staying at the goal forever is feasible.
    """
    start, goal = rm.start_id, rm.goal_id
    h = rm.goal_dist
    if h[start] == math.inf:
        return None
    t_goal_min = max((t for t, _u, _v in constraints), default=0) if constraints else 0
    earlier = [(mj, pj, len(pj) - 1) for mj, pj in earlier]
    cat = [(mj, pj, len(pj) - 1) for mj, pj in cat]

    def motion_blocked(q_u, q_v, t):
        for mj, pj, tj in earlier:
            qa = pj[t if t < tj else tj]
            qb = pj[t + 1 if t + 1 < tj else tj]
            if collide_pair(model, mj, q_u, q_v, qa, qb, resolution):
                return True
        return False

    def motion_conflicts(q_u, q_v, t):
        c = 0
        for mj, pj, tj in cat:
            qa = pj[t if t < tj else tj]
            qb = pj[t + 1 if t + 1 < tj else tj]
            if collide_pair(model, mj, q_u, q_v, qa, qb, resolution):
                c += 1
        return c

    def stay_ok(q, t):
        for mj, pj, tj in earlier:
            for t2 in range(t, tj):
                if collide_pair(model, mj, q, q, pj[t2], pj[t2 + 1], resolution):
                    return False
        return True

    # dominance per (vertex, t) is lexicographic on (cost, conflicts) -- or
    # (conflicts, cost) in greedy mode; the zero-cost self-loops make
    # equal-cost wait variants abundant, so the secondary key must survive
    # the pruning
    def dominated(known, g2, conf2):
        if known is None:
            return False
        kg, kc = known
        if conflicts_first:
            if conf2 > kc:
                return True
            return conf2 == kc and g2 >= kg - 1e-12
        if g2 > kg + 1e-12:
            return True
        return g2 >= kg - 1e-12 and conf2 >= kc

    def priority(g2, conf2, t2, cnt, v):
        if conflicts_first:
            return (conf2, g2 + h[v], t2, cnt, v, g2)
        return (g2 + h[v], conf2, t2, cnt, v, g2)

    g_best = {(start, 0): (0.0, 0)}
    parent = {}
    heap = [priority(0.0, 0, 0, 0, start)]
    counter = 1
    pops = 0
    while heap:
        pops += 1
        if (pops & 255) == 0:
            if deadline is not None and time.monotonic() > deadline:
                raise SolveTimeout
            if pops > max_pops:
                return None
        entry = heappop(heap)
        conf = entry[0] if conflicts_first else entry[1]
        t, u, g = entry[2], entry[4], entry[5]
        if (g, conf) != g_best.get((u, t)):
            continue  # stale entry
        q_u = rm.states[u]
        if u == goal and t >= t_goal_min and stay_ok(q_u, t):
            path = [u]
            cur = (u, t)
            while cur in parent:
                cur = parent[cur]
                path.append(cur[0])
            return path[::-1]
        if t + 1 > horizon:
            continue
        for v, w in rm.edges[u]:
            if h[v] == math.inf:
                continue
            if constraints and (t + 1, u, v) in constraints:
                continue
            g2 = g + w
            key = (v, t + 1)
            q_v = rm.states[v]
            conf2 = conf + (motion_conflicts(q_u, q_v, t) if cat else 0)
            if dominated(g_best.get(key), g2, conf2):
                continue
            if earlier and motion_blocked(q_u, q_v, t):
                continue
            g_best[key] = (g2, conf2)
            parent[key] = (u, t)
            heappush(heap, priority(g2, conf2, t + 1, counter, v))
            counter += 1
    return None


def _vid_paths_to_states(rms, vid_paths):
    max_t = max(len(p) - 1 for p in vid_paths)
    out = []
    for rm, p in zip(rms, vid_paths):
        padded = p + [p[-1]] * (max_t - (len(p) - 1))
        out.append([rm.states[v].copy() for v in padded])
    return out


def _build_prms(instance, params, rng, deadline):
    rms = []
    for i in range(instance.n_robots):
        rm = build_robot_prm(instance.models[i], instance.starts[i],
                             instance.goals[i], instance.obstacles,
                             params.prm_samples, params.prm_radius,
                             rng, params.resolution, deadline)
        rms.append(rm)
    return rms


def pp_solve(instance: Instance, params: BaselineParams | None = None,
             roadmaps=None) -> SolveResult:
    """Prioritized planning on robot-wise PRMs, random priorities until solved."""
    params = params or BaselineParams()
    t0 = time.monotonic()
    deadline = t0 + params.time_limit
    rng = random.Random(params.seed)
    n = instance.n_robots
    try:
        while True:
            rms = roadmaps or _build_prms(instance, params, rng, deadline)
            connected = all(rm.goal_dist[rm.start_id] < math.inf for rm in rms)
            horizon = sum(len(rm) for rm in rms)
            if connected:
                for _ in range(params.pp_perm_rounds):
                    if time.monotonic() > deadline:
                        return _timeout(t0)
                    order = list(range(n))
                    rng.shuffle(order)
                    planned: dict[int, list] = {}
                    ok = True
                    for r in order:
                        earlier = [(instance.models[j],
                                    [rms[j].states[v] for v in planned[j]])
                                   for j in planned]
                        path = space_time_astar(rms[r], instance.models[r],
                                                earlier=earlier, horizon=horizon,
                                                deadline=deadline,
                                                resolution=params.resolution)
                        if path is None:
                            ok = False
                            break
                        planned[r] = path
                    if ok:
                        paths = _vid_paths_to_states(rms, [planned[i] for i in range(n)])
                        return _solution_from_configs(
                            instance, "pp", list(zip(*paths)), t0,
                            {"roadmap_sizes": [len(rm) for rm in rms]})
            if roadmaps is not None:
                # caller-pinned roadmaps cannot be rebuilt
                if time.monotonic() > deadline:
                    return _timeout(t0)
                continue
    except SolveTimeout:
        return _timeout(t0)


class _CbsNode:
    __slots__ = ("vid_paths", "constraints", "costs")

    def __init__(self, vid_paths, constraints, costs):
        self.vid_paths = vid_paths
        self.constraints = constraints  # per-robot frozenset of (t, u, v)
        self.costs = costs


def _detect_conflicts(models, rms, vid_paths, resolution, first_only=False):
    n = len(vid_paths)
    max_t = max(len(p) - 1 for p in vid_paths)
    found = []
    for t in range(max_t):
        for i in range(n):
            pi, ti = vid_paths[i], len(vid_paths[i]) - 1
            ui = pi[t if t < ti else ti]
            vi = pi[t + 1 if t + 1 < ti else ti]
            qi_u, qi_v = rms[i].states[ui], rms[i].states[vi]
            for j in range(i + 1, n):
                pj, tj = vid_paths[j], len(vid_paths[j]) - 1
                uj = pj[t if t < tj else tj]
                vj = pj[t + 1 if t + 1 < tj else tj]
                if collide_pair(models[i], models[j], qi_u, qi_v,
                                rms[j].states[uj], rms[j].states[vj], resolution):
                    found.append((t + 1, i, j, (ui, vi), (uj, vj)))
                    if first_only:
                        return found
    return found


def cbs_solve(instance: Instance, params: BaselineParams | None = None,
              roadmaps=None) -> SolveResult:
    """Greedy CBS on robot-wise PRMs: constraint-tree nodes ordered by
    conflict count, then sum of costs; low level tie-breaks toward fewer
    conflicts with the other robots' current paths."""
    params = params or BaselineParams()
    t0 = time.monotonic()
    deadline = t0 + params.time_limit
    rng = random.Random(params.seed)
    n = instance.n_robots
    models = instance.models
    try:
        rms = roadmaps
        while rms is None:
            cand = _build_prms(instance, params, rng, deadline)
            if all(rm.goal_dist[rm.start_id] < math.inf for rm in cand):
                rms = cand
            elif time.monotonic() > deadline:
                return _timeout(t0)
        horizon = sum(len(rm) for rm in rms)

        def low_level(r, constraints, other_paths):
            cat = [(models[j], [rms[j].states[v] for v in p])
                   for j, p in other_paths.items()]
            return space_time_astar(rms[r], models[r], horizon=horizon,
                                    constraints=constraints or None, cat=cat,
                                    conflicts_first=True, deadline=deadline,
                                    resolution=params.resolution)

        root_paths = []
        for r in range(n):
            others = {j: root_paths[j] for j in range(r)}
            p = low_level(r, frozenset(), others)
            if p is None:
                return _timeout(t0)
            root_paths.append(p)

        def path_cost(r, p):
            sts = rms[r].states
            return sum(dist(models[r], sts[a], sts[b]) for a, b in zip(p, p[1:]))

        root = _CbsNode(root_paths, tuple(frozenset() for _ in range(n)),
                        [path_cost(r, p) for r, p in enumerate(root_paths)])
        n_conf = len(_detect_conflicts(models, rms, root.vid_paths, params.resolution))
        heap = [(n_conf, sum(root.costs), 0, root)]
        counter = 1
        expansions = 0
        while heap:
            if time.monotonic() > deadline or expansions > params.cbs_node_budget:
                return _timeout(t0)
            n_conf, _, _, node = heappop(heap)
            conflicts = _detect_conflicts(models, rms, node.vid_paths,
                                          params.resolution, first_only=True)
            if not conflicts:
                paths = _vid_paths_to_states(rms, node.vid_paths)
                return _solution_from_configs(
                    instance, "cbs", list(zip(*paths)), t0,
                    {"cbs_expansions": expansions,
                     "roadmap_sizes": [len(rm) for rm in rms]})
            expansions += 1
            t, i, j, motion_i, motion_j = conflicts[0]
            for who, motion in ((i, motion_i), (j, motion_j)):
                cons = set(node.constraints[who])
                cons.add((t, motion[0], motion[1]))
                cons = frozenset(cons)
                others = {r: node.vid_paths[r] for r in range(n) if r != who}
                new_path = low_level(who, cons, others)
                if new_path is None:
                    continue
                assert all(not _violates(new_path, c) for c in cons), \
                    "low-level path violates a constraint"
                vid_paths = list(node.vid_paths)
                vid_paths[who] = new_path
                costs = list(node.costs)
                costs[who] = path_cost(who, new_path)
                all_cons = list(node.constraints)
                all_cons[who] = cons
                child = _CbsNode(vid_paths, tuple(all_cons), costs)
                child_conf = len(_detect_conflicts(models, rms, vid_paths,
                                                   params.resolution))
                heappush(heap, (child_conf, sum(costs), counter, child))
                counter += 1
        return _timeout(t0)
    except SolveTimeout:
        return _timeout(t0)


def _violates(vid_path, constraint):
    t, u, v = constraint
    last = len(vid_path) - 1
    a = vid_path[t - 1 if t - 1 < last else last]
    b = vid_path[t if t < last else last]
    return (a, b) == (u, v)


SOLVER_FUNCS = {
    "prm": prm_solve,
    "rrt": rrt_solve,
    "rrtc": rrtc_solve,
    "pp": pp_solve,
    "cbs": cbs_solve,
}

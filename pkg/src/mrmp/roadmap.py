"""Per-robot directed roadmaps.

A roadmap is a directed graph over obstacle-free states with every edge
locally connectable (consistency), a self-loop of weight zero on every
vertex (stationary motion), and a goal-distance table used for search node
scoring. Initial construction secures one valid start-goal path with
single-robot RRT-Connect (goal-biased RRT for the asymmetric Dubins local
planner); mid-search insertion keeps roadmaps sparse via a distance
threshold.
"""

from __future__ import annotations

import heapq
import math
import time

import numpy as np

from .robots import (
    DELTA_CC,
    RobotModel,
    connect,
    dist,
    dist_batch,
    sample,
    state_valid,
    steer,
)


class InitFailure(Exception):
    """Initial roadmap construction exhausted its budget."""


class SolveTimeout(Exception):
    """Cooperative wall-clock cancellation."""


class Roadmap:
    """Directed roadmap for one robot.

    Vertex ids are insertion-ordered integers, stable for the roadmap's
    lifetime. `goal_dist` holds upper bounds on the shortest-path distance
    to the goal vertex; exact immediately after rebuild_goal_dist().
    """

    def __init__(self, model: RobotModel, obstacles, resolution: float = DELTA_CC):
        self.model = model
        self.obstacles = obstacles
        self.resolution = resolution
        self.states: list[np.ndarray] = []
        self.states_f: list[tuple] = []  # plain-float mirror for hot kernels
        self.edges: list[list[tuple[int, float]]] = []
        self.redges: list[list[tuple[int, float]]] = []
        self.goal_dist: list[float] = []
        self.start_id = 0
        self.goal_id = 0
        self._mat = np.empty((16, model.dof))

    def __len__(self) -> int:
        return len(self.states)

    # -- construction primitives -------------------------------------------

    def append_vertex(self, q) -> int:
        """Insert a state without threshold or edge checks (plus self-loop)."""
        q = np.asarray(q, dtype=float)
        vid = len(self.states)
        self.states.append(q)
        self.states_f.append(tuple(map(float, q)))
        self.edges.append([(vid, 0.0)])
        self.redges.append([(vid, 0.0)])
        self.goal_dist.append(math.inf)
        if vid >= self._mat.shape[0]:
            grown = np.empty((2 * self._mat.shape[0], self.model.dof))
            grown[:vid] = self._mat[:vid]
            self._mat = grown
        self._mat[vid] = q
        return vid

    def add_edge(self, u: int, v: int) -> bool:
        """Add directed edge u->v if the local planner validates it."""
        if u == v:
            return True  # self-loops exist from insertion
        if connect(self.model, self.states[u], self.states[v],
                   self.obstacles, self.resolution) is None:
            return False
        w = dist(self.model, self.states[u], self.states[v])
        self.edges[u].append((v, w))
        self.redges[v].append((u, w))
        return True

    # -- queries -------------------------------------------------------------

    def dist_all(self, q) -> np.ndarray:
        return dist_batch(self.model, np.asarray(q, dtype=float), self._mat[: len(self.states)])

    def nearest(self, q) -> tuple[int, float]:
        """Vertex id minimizing dist to q; ties broken by smaller id."""
        d = self.dist_all(q)
        vid = int(np.argmin(d))
        return vid, float(d[vid])

    # -- mutation ------------------------------------------------------------

    def add_vertex(self, q_new, source_id: int, threshold: float | None,
                   conn_radius: float):
        """Insert q_new with the distance-threshold and edge policy.

        Rejected (returns None) iff the nearest existing vertex is within
        `threshold` (only strictly farther states are admitted). On accept,
        bidirectional edges are attempted to the expansion source and to
        every vertex within `conn_radius`, each direction validated
        independently; goal_dist is set by one-step relaxation (an upper
        bound until the next full rebuild).
        """
        q_new = np.asarray(q_new, dtype=float)
        d_all = self.dist_all(q_new)
        if threshold is not None and float(d_all.min()) <= threshold:
            return None
        neighbors = np.nonzero(d_all <= conn_radius)[0]
        vid = self.append_vertex(q_new)
        seen_source = False
        for nbr in neighbors:
            nbr = int(nbr)
            if nbr == source_id:
                seen_source = True
            self._link(vid, nbr, float(d_all[nbr]))
        if not seen_source:
            self._link(vid, source_id, float(d_all[source_id]))
        best = math.inf
        for to, w in self.edges[vid]:
            if to != vid and w + self.goal_dist[to] < best:
                best = w + self.goal_dist[to]
        self.goal_dist[vid] = best
        return vid

    def _link(self, vid: int, nbr: int, w: float):
        model = self.model
        q_new = self.states[vid]
        q_nbr = self.states[nbr]
        fwd = connect(model, q_new, q_nbr, self.obstacles, self.resolution) is not None
        if model.has_symmetric_connect:
            rev = fwd
        else:
            rev = connect(model, q_nbr, q_new, self.obstacles, self.resolution) is not None
        if fwd:
            self.edges[vid].append((nbr, w))
            self.redges[nbr].append((vid, w))
        if rev:
            self.edges[nbr].append((vid, w))
            self.redges[vid].append((nbr, w))

    def rebuild_goal_dist(self):
        """Exact single-destination shortest-path table (backward Dijkstra)."""
        n = len(self.states)
        gd = [math.inf] * n
        gd[self.goal_id] = 0.0
        heap = [(0.0, self.goal_id)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > gd[u]:
                continue
            for v, w in self.redges[u]:
                nd = d + w
                if nd < gd[v]:
                    gd[v] = nd
                    heapq.heappush(heap, (nd, v))
        self.goal_dist = gd

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "vertices": [list(map(float, q)) for q in self.states],
            "edges": [[[int(v), float(w)] for v, w in adj] for adj in self.edges],
            "start_id": self.start_id,
            "goal_id": self.goal_id,
        }

    @classmethod
    def from_json_dict(cls, model: RobotModel, obstacles, data: dict,
                       resolution: float = DELTA_CC) -> "Roadmap":
        rm = cls(model, obstacles, resolution)
        for q in data["vertices"]:
            rm.append_vertex(np.asarray(q, dtype=float))
        for u, adj in enumerate(data["edges"]):
            for v, w in adj:
                v = int(v)
                if v == u:
                    continue  # self-loop added by append_vertex
                rm.edges[u].append((v, float(w)))
                rm.redges[v].append((u, float(w)))
        rm.start_id = int(data["start_id"])
        rm.goal_id = int(data["goal_id"])
        rm.rebuild_goal_dist()
        return rm


def _check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise SolveTimeout


class _Tree:
    """Growable nearest-neighbor tree for RRT-style construction."""

    def __init__(self, model, root):
        self.model = model
        self.states = [np.asarray(root, dtype=float)]
        self.parents = [-1]
        self._mat = np.empty((64, model.dof))
        self._mat[0] = self.states[0]

    def add(self, q, parent: int) -> int:
        idx = len(self.states)
        self.states.append(q)
        self.parents.append(parent)
        if idx >= self._mat.shape[0]:
            grown = np.empty((2 * self._mat.shape[0], self.model.dof))
            grown[:idx] = self._mat[:idx]
            self._mat = grown
        self._mat[idx] = q
        return idx

    def nearest(self, q) -> int:
        d = dist_batch(self.model, q, self._mat[: len(self.states)])
        return int(np.argmin(d))

    def chain_to_root(self, idx: int) -> list[np.ndarray]:
        out = []
        while idx != -1:
            out.append(self.states[idx])
            idx = self.parents[idx]
        return out


def _roadmap_from_path(model, obstacles, path, resolution) -> Roadmap:
    rm = Roadmap(model, obstacles, resolution)
    for q in path:
        rm.append_vertex(q)
    rm.start_id = 0
    rm.goal_id = len(path) - 1
    for u in range(len(path) - 1):
        ok = rm.add_edge(u, u + 1)
        assert ok, "forward path edge must validate by construction"
        rm.add_edge(u + 1, u)  # reverse kept only if valid (Dubins asymmetry)
    rm.rebuild_goal_dist()
    return rm


def init_roadmap(model: RobotModel, start, goal, obstacles, rng,
                 eps: float, budget: int = 100_000,
                 resolution: float = DELTA_CC, deadline=None) -> Roadmap:
    """Initial roadmap securing one valid directed start->goal path.

    Raises InitFailure when the sampling budget is exhausted and
    SolveTimeout when the deadline passes first.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    if not state_valid(model, start, obstacles):
        raise InitFailure("start state is not obstacle-free")
    if not state_valid(model, goal, obstacles):
        raise InitFailure("goal state is not obstacle-free")
    if np.array_equal(start, goal):
        rm = Roadmap(model, obstacles, resolution)
        rm.append_vertex(start)
        rm.start_id = rm.goal_id = 0
        rm.rebuild_goal_dist()
        return rm
    if connect(model, start, goal, obstacles, resolution) is not None:
        return _roadmap_from_path(model, obstacles, [start, goal], resolution)
    if model.has_symmetric_connect:
        path = _rrt_connect(model, start, goal, obstacles, rng, eps, budget,
                            resolution, deadline)
    else:
        path = _rrt_goal_biased(model, start, goal, obstacles, rng, eps, budget,
                                resolution, deadline)
    if path is None:
        raise InitFailure(f"no start-goal path within {budget} expansions")
    return _roadmap_from_path(model, obstacles, path, resolution)


def _rrt_connect(model, start, goal, obstacles, rng, eps, budget, resolution, deadline):
    tree_a = _Tree(model, start)
    tree_b = _Tree(model, goal)
    a_is_start = True
    for it in range(budget):
        if (it & 63) == 0:
            _check_deadline(deadline)
        q_rand = sample(model, rng)
        nid = tree_a.nearest(q_rand)
        q_new = steer(model, tree_a.states[nid], q_rand, eps, obstacles, resolution)
        if q_new is None or dist(model, tree_a.states[nid], q_new) < 1e-12:
            tree_a, tree_b = tree_b, tree_a
            a_is_start = not a_is_start
            continue
        new_idx = tree_a.add(q_new, nid)
        # greedy connect: pull tree_b toward the fresh vertex until blocked
        cur = tree_b.nearest(q_new)
        cur_d = dist(model, tree_b.states[cur], q_new)
        met = -1
        while True:
            q_c = steer(model, tree_b.states[cur], q_new, eps, obstacles, resolution)
            if q_c is None:
                break
            d_c = dist(model, q_c, q_new)
            if d_c >= cur_d - 1e-12 and not np.array_equal(q_c, q_new):
                break
            cur = tree_b.add(q_c, cur)
            cur_d = d_c
            if np.array_equal(q_c, q_new):
                met = cur
                break
        if met != -1:
            chain_a = tree_a.chain_to_root(new_idx)   # q_new .. root_a
            chain_b = tree_b.chain_to_root(met)       # q_new .. root_b
            if a_is_start:
                path = chain_a[::-1] + chain_b[1:]
            else:
                path = chain_b[::-1] + chain_a[1:]
            return path
        tree_a, tree_b = tree_b, tree_a
        a_is_start = not a_is_start
    return None


def _rrt_goal_biased(model, start, goal, obstacles, rng, eps, budget, resolution, deadline):
    tree = _Tree(model, start)
    for it in range(budget):
        if (it & 63) == 0:
            _check_deadline(deadline)
        q_rand = goal if rng.random() < 0.1 else sample(model, rng)
        nid = tree.nearest(q_rand)
        q_new = steer(model, tree.states[nid], q_rand, eps, obstacles, resolution)
        if q_new is None or dist(model, tree.states[nid], q_new) < 1e-12:
            continue
        new_idx = tree.add(q_new, nid)
        if dist(model, q_new, goal) <= 3.0 * eps:
            if connect(model, q_new, goal, obstacles, resolution) is not None:
                return tree.chain_to_root(new_idx)[::-1] + [goal]
    return None

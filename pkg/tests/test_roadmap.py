import math
import random

import numpy as np
import pytest

from mrmp.geometry import SphereObstacle
from mrmp.roadmap import InitFailure, Roadmap, init_roadmap
from mrmp.robots import RobotModel, connect, dist, sample, state_valid
from oracles import bellman_ford_goal_dist

POINT = RobotModel("point2d", radius=0.04)


def random_roadmap(rng, n_vertices=50, obstacles=(), model=POINT):
    rm = Roadmap(model, list(obstacles))
    while len(rm) < n_vertices:
        q = sample(model, rng)
        if state_valid(model, q, obstacles):
            rm.append_vertex(q)
    for _ in range(n_vertices * 4):
        u = rng.randrange(n_vertices)
        v = rng.randrange(n_vertices)
        if u != v:
            rm.add_edge(u, v)
    rm.start_id = 0
    rm.goal_id = 1
    rm.rebuild_goal_dist()
    return rm


def all_directed_edges(rm):
    return [(u, v, w) for u in range(len(rm)) for v, w in rm.edges[u]]


class TestAddVertex:
    def test_coincident_rejected(self):
        rm = Roadmap(POINT, [])
        rm.append_vertex([0.5, 0.5])
        assert rm.add_vertex(np.array([0.5, 0.5]), 0, threshold=0.05,
                             conn_radius=0.2) is None

    def test_accepted_with_edges_and_self_loop(self):
        rm = Roadmap(POINT, [])
        rm.append_vertex([0.5, 0.5])
        vid = rm.add_vertex(np.array([0.6, 0.5]), 0, threshold=0.05,
                            conn_radius=0.2)
        assert vid == 1
        assert (vid, 0.0) in rm.edges[vid]
        out = [v for v, _ in rm.edges[vid] if v != vid]
        into = [v for v, _ in rm.edges[0] if v == vid]
        assert out == [0] and into == [vid]

    def test_blocked_neighbor_leaves_only_self_loop(self):
        # wall of obstacles between the new vertex and its only neighbor
        obstacles = [SphereObstacle((0.5, 0.1 * k), 0.045) for k in range(11)]
        rm = Roadmap(POINT, obstacles)
        rm.append_vertex([0.3, 0.52])
        rm.goal_id = 0
        rm.rebuild_goal_dist()
        assert state_valid(POINT, np.array([0.65, 0.52]), obstacles)
        vid = rm.add_vertex(np.array([0.65, 0.52]), 0, threshold=0.05,
                            conn_radius=1.0)
        assert vid is not None
        assert rm.edges[vid] == [(vid, 0.0)]
        assert rm.goal_dist[vid] == math.inf

    def test_never_shrinks(self):
        rng = random.Random(2)
        rm = Roadmap(POINT, [])
        rm.append_vertex([0.5, 0.5])
        rm.goal_id = 0
        counts = [len(rm)]
        edge_counts = [len(all_directed_edges(rm))]
        for _ in range(60):
            rm.add_vertex(sample(POINT, rng), rng.randrange(len(rm)),
                          threshold=0.03, conn_radius=0.25)
            counts.append(len(rm))
            edge_counts.append(len(all_directed_edges(rm)))
        assert all(b >= a for a, b in zip(counts, counts[1:]))
        assert all(b >= a for a, b in zip(edge_counts, edge_counts[1:]))

    def test_goal_dist_relaxation_is_upper_bound(self):
        rng = random.Random(3)
        rm = random_roadmap(rng, 40)
        for _ in range(40):
            rm.add_vertex(sample(POINT, rng), rng.randrange(len(rm)),
                          threshold=0.02, conn_radius=0.3)
        # stale labels must stay upper bounds on the exact distances
        exact = bellman_ford_goal_dist(len(rm), all_directed_edges(rm), rm.goal_id)
        for u in range(len(rm)):
            assert rm.goal_dist[u] >= exact[u] - 1e-9


class TestConsistency:
    def test_random_operation_sequences_preserve_invariants(self):
        rng = random.Random(5)
        obstacles = [SphereObstacle((0.45, 0.45), 0.12),
                     SphereObstacle((0.75, 0.3), 0.08)]
        rm = Roadmap(POINT, obstacles)
        while len(rm) < 2:
            q = sample(POINT, rng)
            if state_valid(POINT, q, obstacles):
                rm.append_vertex(q)
        rm.goal_id = 1
        rm.rebuild_goal_dist()
        for _ in range(120):
            q = sample(POINT, rng)
            if not state_valid(POINT, q, obstacles):
                continue
            rm.add_vertex(q, rng.randrange(len(rm)), threshold=0.03,
                          conn_radius=0.25)
        # every vertex obstacle-free, every edge locally connectable
        for u in range(len(rm)):
            assert state_valid(POINT, rm.states[u], obstacles)
            for v, w in rm.edges[u]:
                assert connect(POINT, rm.states[u], rm.states[v], obstacles) is not None
                assert w == pytest.approx(dist(POINT, rm.states[u], rm.states[v]))

    def test_self_loops_everywhere(self):
        rng = random.Random(6)
        rm = random_roadmap(rng, 30)
        for u in range(len(rm)):
            assert (u, 0.0) in rm.edges[u]


class TestGoalDist:
    def test_chain(self):
        rm = Roadmap(POINT, [])
        a = rm.append_vertex([0.1, 0.5])
        b = rm.append_vertex([0.3, 0.5])
        g = rm.append_vertex([0.6, 0.5])
        rm.edges[a].append((b, 0.2))
        rm.redges[b].append((a, 0.2))
        rm.edges[b].append((g, 0.3))
        rm.redges[g].append((b, 0.3))
        rm.goal_id = g
        rm.rebuild_goal_dist()
        assert rm.goal_dist[a] == pytest.approx(0.5)
        assert rm.goal_dist[g] == 0.0

    def test_isolated_vertex_infinite(self):
        rm = Roadmap(POINT, [])
        rm.append_vertex([0.1, 0.1])
        rm.append_vertex([0.9, 0.9])
        rm.goal_id = 0
        rm.rebuild_goal_dist()
        assert rm.goal_dist[1] == math.inf

    def test_against_bellman_ford_on_random_roadmaps(self):
        # 100 random roadmaps, exact agreement
        rng = random.Random(7)
        for _ in range(100):
            rm = random_roadmap(rng, rng.randint(5, 50))
            exact = bellman_ford_goal_dist(len(rm), all_directed_edges(rm),
                                           rm.goal_id)
            for u in range(len(rm)):
                if exact[u] == math.inf:
                    assert rm.goal_dist[u] == math.inf
                else:
                    assert rm.goal_dist[u] == pytest.approx(exact[u], abs=1e-12)

    def test_bellman_condition(self):
        rng = random.Random(8)
        rm = random_roadmap(rng, 40)
        for u in range(len(rm)):
            if u == rm.goal_id:
                assert rm.goal_dist[u] == 0.0
                continue
            if rm.goal_dist[u] == math.inf:
                continue
            best = min(w + rm.goal_dist[v] for v, w in rm.edges[u])
            assert rm.goal_dist[u] == pytest.approx(best, abs=1e-12)


class TestNearest:
    def test_existing_vertex(self):
        rng = random.Random(9)
        rm = random_roadmap(rng, 20)
        vid, d = rm.nearest(rm.states[7])
        assert vid == 7 and d == 0.0

    def test_tie_broken_by_smaller_id(self):
        # binary-exact coordinates so the two distances tie bit-for-bit
        rm = Roadmap(POINT, [])
        rm.append_vertex([0.25, 0.5])
        rm.append_vertex([0.75, 0.5])
        vid, d = rm.nearest(np.array([0.5, 0.5]))
        assert vid == 0
        assert d == pytest.approx(0.25)

    def test_matches_linear_scan(self):
        rng = random.Random(10)
        rm = random_roadmap(rng, 1000)
        for _ in range(100):
            q = sample(POINT, rng)
            vid, d = rm.nearest(q)
            dists = [dist(POINT, q, s) for s in rm.states]
            best = min(range(len(dists)), key=lambda k: (dists[k], k))
            assert vid == best
            assert d == pytest.approx(dists[best], abs=1e-12)


class TestInitRoadmap:
    def test_start_equals_goal(self):
        rm = init_roadmap(POINT, [0.4, 0.4], [0.4, 0.4], [], random.Random(0),
                          eps=0.2)
        assert len(rm) == 1
        assert rm.start_id == rm.goal_id == 0
        assert rm.goal_dist[rm.start_id] == 0.0

    def test_empty_workspace_path_quality(self):
        # start-goal path at most 1.5x straight line in >= 95% of seeded runs
        ok = 0
        for seed in range(100):
            rng = random.Random(seed)
            start = np.array([rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)])
            goal = np.array([rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)])
            rm = init_roadmap(POINT, start, goal, [], random.Random(seed), eps=0.2)
            straight = dist(POINT, start, goal)
            if straight == 0.0 or rm.goal_dist[rm.start_id] <= 1.5 * straight:
                ok += 1
        assert ok >= 95

    def test_secures_directed_path(self):
        obstacles = [SphereObstacle((0.5, 0.5), 0.18)]
        rm = init_roadmap(POINT, [0.15, 0.5], [0.85, 0.5], obstacles,
                          random.Random(4), eps=0.2)
        assert rm.goal_dist[rm.start_id] < math.inf
        for u in range(len(rm)):
            assert state_valid(POINT, rm.states[u], obstacles)
            for v, _w in rm.edges[u]:
                assert connect(POINT, rm.states[u], rm.states[v], obstacles) is not None

    def test_walled_off_raises(self):
        wall = [SphereObstacle((0.1 * k, 0.5), 0.08) for k in range(11)]
        with pytest.raises(InitFailure):
            init_roadmap(POINT, [0.5, 0.2], [0.5, 0.8], wall, random.Random(0),
                         eps=0.2, budget=1500)

    def test_invalid_start_raises(self):
        obstacles = [SphereObstacle((0.5, 0.5), 0.2)]
        with pytest.raises(InitFailure):
            init_roadmap(POINT, [0.5, 0.5], [0.9, 0.9], obstacles,
                         random.Random(0), eps=0.2)

    def test_dubins_init_directed_edges(self):
        m = RobotModel("dubins2d", radius=0.03, turning_radius=0.08)
        obstacles = [SphereObstacle((0.5, 0.5), 0.12)]
        rm = init_roadmap(m, [0.15, 0.2, 0.0], [0.85, 0.8, 1.0], obstacles,
                          random.Random(2), eps=0.3)
        assert rm.goal_dist[rm.start_id] < math.inf
        for u in range(len(rm)):
            for v, _w in rm.edges[u]:
                assert connect(m, rm.states[u], rm.states[v], obstacles) is not None


class TestSerialization:
    def test_roundtrip(self):
        rng = random.Random(11)
        rm = random_roadmap(rng, 25)
        data = rm.to_json_dict()
        again = Roadmap.from_json_dict(POINT, [], data)
        assert len(again) == len(rm)
        assert again.start_id == rm.start_id and again.goal_id == rm.goal_id
        for u in range(len(rm)):
            assert np.array_equal(again.states[u], rm.states[u])
            assert sorted(again.edges[u]) == sorted(rm.edges[u])
        assert again.goal_dist == pytest.approx(rm.goal_dist)

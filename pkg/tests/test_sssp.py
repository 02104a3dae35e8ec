import math
import random

import numpy as np
import pytest

from mrmp.bench import verify
from mrmp.geometry import SphereObstacle
from mrmp.instance import Instance
from mrmp.roadmap import Roadmap
from mrmp.robots import RobotModel, dist, sample, state_valid
from mrmp.solution import OUTCOME_SOLVED, OUTCOME_UNSOLVABLE
from mrmp import sssp as S
from mrmp.sssp import (
    SearchNode,
    SsspParams,
    backtrack,
    expand_node,
    expand_vertices,
    retroactive_collide,
    score_config,
    solve,
    solve_on_roadmaps,
)
from oracles import bellman_ford_goal_dist, product_bfs_solvable

POINT = RobotModel("point2d", radius=0.05)


def make_instance(models, starts, goals, obstacles=(), seed=0, scenario="point2d"):
    return Instance(scenario=scenario, models=models, starts=starts, goals=goals,
                    obstacles=list(obstacles), seed=seed)


def manual_roadmap(model, states, edges, start_id, goal_id, obstacles=()):
    rm = Roadmap(model, list(obstacles))
    for q in states:
        rm.append_vertex(np.asarray(q, dtype=float))
    for u, v in edges:
        assert rm.add_edge(u, v), (u, v)
    rm.start_id = start_id
    rm.goal_id = goal_id
    rm.rebuild_goal_dist()
    return rm


class TestSolveBasics:
    def test_single_robot_trivial(self):
        inst = make_instance([POINT], [[0.4, 0.4]], [[0.4, 0.4]])
        res = solve(inst, SsspParams(seed=0, time_limit=10))
        assert res.solved
        assert res.solution.T == 0
        assert not verify(inst, res.solution)

    def test_two_robots_non_interacting(self):
        models = [RobotModel("point2d", radius=0.03) for _ in range(2)]
        inst = make_instance(models, [[0.1, 0.1], [0.9, 0.9]],
                             [[0.3, 0.1], [0.7, 0.9]])
        res = solve(inst, SsspParams(seed=0, time_limit=10))
        assert res.solved
        assert not verify(inst, res.solution)
        # no interference: each robot just walks its own roadmap path
        for i, path in enumerate(res.solution.paths):
            length = sum(dist(models[i], a, b) for a, b in zip(path, path[1:]))
            assert length == pytest.approx(dist(models[i], inst.starts[i],
                                                inst.goals[i]), abs=1e-9)

    def test_swap_is_solved_and_valid(self):
        models = [RobotModel("point2d", radius=0.08) for _ in range(2)]
        inst = make_instance(models, [[0.2, 0.5], [0.8, 0.5]],
                             [[0.8, 0.5], [0.2, 0.5]])
        res = solve(inst, SsspParams(seed=0, time_limit=30))
        assert res.solved
        assert not verify(inst, res.solution)

    def test_init_failure_propagates(self):
        wall = [SphereObstacle((0.1 * k, 0.5), 0.08) for k in range(11)]
        inst = make_instance([POINT], [[0.5, 0.2]], [[0.5, 0.8]], wall)
        res = solve(inst, SsspParams(seed=0, time_limit=20, init_budget=1200))
        assert res.outcome == "INIT_FAILURE"

    def test_timeout_outcome(self):
        models = [RobotModel("point2d", radius=0.12) for _ in range(4)]
        starts = [[0.15, 0.15], [0.85, 0.85], [0.15, 0.85], [0.85, 0.15]]
        goals = [[0.85, 0.85], [0.15, 0.15], [0.85, 0.15], [0.15, 0.85]]
        inst = make_instance(models, starts, goals)
        res = solve(inst, SsspParams(seed=0, time_limit=0.3))
        assert res.outcome in ("TIMEOUT", "SOLVED")  # tiny limit usually times out
        if res.outcome == "TIMEOUT":
            assert res.wall_time < 2.0


class TestDeterminism:
    def test_byte_identical_solutions(self):
        models = [RobotModel("point2d", radius=0.06) for _ in range(3)]
        inst = make_instance(models,
                             [[0.2, 0.2], [0.8, 0.2], [0.5, 0.8]],
                             [[0.8, 0.8], [0.2, 0.8], [0.5, 0.2]],
                             [SphereObstacle((0.5, 0.52), 0.07)])
        a = solve(inst, SsspParams(seed=7, time_limit=30))
        b = solve(inst, SsspParams(seed=7, time_limit=30))
        assert a.solved and b.solved
        assert a.solution.to_json() == b.solution.to_json()

    def test_different_seed_may_differ(self):
        models = [RobotModel("point2d", radius=0.08) for _ in range(2)]
        inst = make_instance(models, [[0.2, 0.5], [0.8, 0.5]],
                             [[0.8, 0.5], [0.2, 0.5]])
        a = solve(inst, SsspParams(seed=1, time_limit=30))
        b = solve(inst, SsspParams(seed=2, time_limit=30))
        assert a.solved and b.solved  # both solve; paths typically differ


class TestThetaDecay:
    def test_exact_decay_schedule(self):
        # unsolvable-on-frozen roadmaps + no expansion: each outer iteration
        # exhausts instantly, decaying theta by gamma each time
        models = [POINT]
        inst = make_instance(models, [[0.2, 0.2]], [[0.8, 0.8]])
        params = SsspParams(seed=0, time_limit=10, theta=0.1, gamma=0.5,
                            vertex_expansion=False, initial_roadmap=False,
                            max_iterations=5)
        res = solve(inst, params)
        assert res.outcome == OUTCOME_UNSOLVABLE
        assert res.stats["iterations"] == 5
        assert res.stats["thetas"] == [0.1 * 0.5 ** 4]

    def test_decay_float_product(self):
        inst = make_instance([POINT], [[0.2, 0.2]], [[0.8, 0.8]])
        params = SsspParams(seed=0, time_limit=10, theta=0.05, gamma=0.8,
                            vertex_expansion=False, initial_roadmap=False,
                            max_iterations=4)
        res = solve(inst, params)
        expected = 0.05
        for _ in range(3):
            expected *= 0.8
        assert res.stats["thetas"] == [expected]


class TestScore:
    def test_all_at_goal_zero(self):
        rng = random.Random(0)
        rms = [self._rm(rng) for _ in range(3)]
        cfg = tuple(rm.goal_id for rm in rms)
        assert score_config(cfg, rms) == 0.0

    def test_one_hop_weight(self):
        rm = manual_roadmap(POINT, [[0.1, 0.5], [0.5, 0.5]], [(0, 1)], 0, 1)
        other = manual_roadmap(POINT, [[0.9, 0.9]], [], 0, 0)
        assert score_config((0, 0), [rm, other]) == pytest.approx(0.4)

    def test_matches_bellman_oracle(self):
        rng = random.Random(1)
        rms = [self._rm(rng) for _ in range(3)]
        exact = []
        for rm in rms:
            edges = [(u, v, w) for u in range(len(rm)) for v, w in rm.edges[u]]
            exact.append(bellman_ford_goal_dist(len(rm), edges, rm.goal_id))
        for _ in range(100):
            cfg = tuple(rng.randrange(len(rm)) for rm in rms)
            expected = sum(exact[i][cfg[i]] for i in range(3))
            got = score_config(cfg, rms)
            if expected == math.inf:
                assert got == math.inf
            else:
                assert got == pytest.approx(expected, abs=1e-9)

    @staticmethod
    def _rm(rng):
        rm = Roadmap(POINT, [])
        n = rng.randint(4, 9)
        for _ in range(n):
            rm.append_vertex(sample(POINT, rng))
        for _ in range(2 * n):
            u, v = rng.randrange(n), rng.randrange(n)
            if u != v:
                rm.add_edge(u, v)
        rm.start_id = 0
        rm.goal_id = 1
        rm.rebuild_goal_dist()
        return rm


class TestExpandVertices:
    def test_deterministic_insert_count(self):
        obstacles = [SphereObstacle((0.7, 0.7), 0.1)]
        params = SsspParams(seed=0, theta=0.02)

        def run():
            rm = manual_roadmap(POINT, [[0.2, 0.2], [0.8, 0.8]], [], 0, 1,
                                obstacles)
            node = SearchNode((0,), 0, None, 0)
            rng = random.Random(42)
            return (expand_vertices(node, rm, obstacles, params, 0.02, rng),
                    len(rm))

        first, second = run(), run()
        assert first == second
        assert first[0] > 0  # open space: insertions happen

    def test_boxed_in_inserts_nothing(self):
        # start sealed inside an overlapping obstacle ring whose inner
        # clearance is below one collision-check step, so steering fails
        center = np.array([0.5, 0.5])
        ring = [SphereObstacle((0.5 + 0.1 * math.cos(a), 0.5 + 0.1 * math.sin(a)), 0.045)
                for a in np.linspace(0, 2 * math.pi, 16, endpoint=False)]
        assert state_valid(POINT, center, ring)
        rm = manual_roadmap(POINT, [center], [], 0, 0, ring)
        node = SearchNode((0,), 0, None, 0)
        inserted = expand_vertices(node, rm, ring, SsspParams(seed=0), 0.05,
                                   random.Random(0))
        assert inserted == 0
        assert len(rm) == 1

    def test_m_samples_validated(self):
        with pytest.raises(ValueError):
            SsspParams(m_samples=0)


class TestExpandNode:
    def test_self_loop_only_vertex_pushes_one(self):
        rm0 = manual_roadmap(POINT, [[0.2, 0.2]], [], 0, 0)
        rm1 = manual_roadmap(POINT, [[0.8, 0.8]], [], 0, 0)
        node = SearchNode((0, 0), 0, None, 0)
        heap, discovered = [], set()
        count = expand_node(node, [POINT, POINT], [rm0, rm1], discovered, heap,
                            0, SsspParams(seed=0), random.Random(0))
        assert count == 1 and len(heap) == 1

    def test_discovered_suppresses_all(self):
        rm0 = manual_roadmap(POINT, [[0.2, 0.2]], [], 0, 0)
        rm1 = manual_roadmap(POINT, [[0.8, 0.8]], [], 0, 0)
        node = SearchNode((0, 0), 0, None, 0)
        discovered = {((0, 0), 1)}
        heap = []
        count = expand_node(node, [POINT, POINT], [rm0, rm1], discovered, heap,
                            0, SsspParams(seed=0), random.Random(0))
        assert count == 0 and heap == []

    def test_blocked_edge_not_pushed(self):
        # robot 0 has 3 outgoing motions (self-loop + 2 edges); robot 1 parks
        # on one of the targets
        big = RobotModel("point2d", radius=0.1)
        rm0 = manual_roadmap(big, [[0.2, 0.5], [0.5, 0.5], [0.2, 0.8]],
                             [(0, 1), (0, 2)], 0, 1)
        rm1 = manual_roadmap(big, [[0.55, 0.5]], [], 0, 0)
        node = SearchNode((0, 0), 0, None, 0)
        heap, discovered = [], set()
        count = expand_node(node, [big, big], [rm0, rm1], discovered, heap,
                            0, SsspParams(seed=0), random.Random(0))
        # motion 0->1 sweeps into robot 1's disk; self-loop and 0->2 are fine
        assert count == 2
        pushed_targets = sorted(n.config[0] for _, _, _, n in heap)
        assert pushed_targets == [0, 2]

    def test_no_duplicate_pushes_across_expansions(self):
        rng = random.Random(3)
        models = [RobotModel("point2d", radius=0.04) for _ in range(2)]
        rms = []
        for i in range(2):
            states = [np.array([0.1 + 0.8 * rng.random(), 0.1 + 0.8 * rng.random()])
                      for _ in range(5)]
            edges = [(u, v) for u in range(5) for v in range(5) if u != v]
            rms.append(manual_roadmap(models[i], states, edges, 0, 1))
        heap, discovered = [], set()
        root = SearchNode((0, 0), 0, None, 0)
        discovered.add(((0, 0), 0))
        counter = expand_node(root, models, rms, discovered, heap, 0,
                              SsspParams(seed=0), random.Random(0))
        seen_keys = set()
        import heapq
        while heap:
            _, _, _, node = heapq.heappop(heap)
            key = (node.config, node.next_i)
            assert key not in seen_keys
            seen_keys.add(key)
            if node.depth < 3:
                counter = expand_node(node, models, rms, discovered, heap,
                                      counter, SsspParams(seed=0),
                                      random.Random(0))


class TestBacktrack:
    def test_goal_root_is_t0(self):
        rm = manual_roadmap(POINT, [[0.5, 0.5]], [], 0, 0)
        node = SearchNode((0,), 0, None, 0)
        paths = backtrack(node, [rm], 1)
        assert len(paths) == 1 and len(paths[0]) == 1

    def test_stationary_depth3(self):
        rm0 = manual_roadmap(POINT, [[0.2, 0.2], [0.4, 0.2]], [(0, 1)], 0, 1)
        rm1 = manual_roadmap(POINT, [[0.8, 0.8], [0.6, 0.8]], [(0, 1)], 0, 1)
        n0 = SearchNode((0, 0), 0, None, 0)
        n1 = SearchNode((1, 0), 1, n0, 1)
        n2 = SearchNode((1, 1), 0, n1, 2)
        n3 = SearchNode((1, 1), 1, n2, 3)
        paths = backtrack(n3, [rm0, rm1], 2)
        assert len(paths[0]) == 4  # T = 3, one node per step
        assert np.array_equal(paths[0][0], rm0.states[0])
        assert np.array_equal(paths[0][1], rm0.states[1])
        assert np.array_equal(paths[1][1], rm1.states[0])  # waited via self-loop

    def test_block_mode_collapses(self):
        rm0 = manual_roadmap(POINT, [[0.2, 0.2], [0.4, 0.2], [0.6, 0.2]],
                             [(0, 1), (1, 2)], 0, 2)
        rm1 = manual_roadmap(POINT, [[0.8, 0.8], [0.6, 0.8], [0.4, 0.8]],
                             [(0, 1), (1, 2)], 0, 2)
        n0 = SearchNode((0, 0), 0, None, 0)
        n1 = SearchNode((1, 0), 1, n0, 1)
        n2 = SearchNode((1, 1), 0, n1, 2)
        n3 = SearchNode((2, 1), 1, n2, 3)
        n4 = SearchNode((2, 2), 0, n3, 4)
        paths = backtrack(n4, [rm0, rm1], 2, collision_mode="block")
        assert len(paths[0]) == 3  # depth 4 with N=2 collapses to T=2
        assert np.array_equal(paths[0][1], rm0.states[1])
        assert np.array_equal(paths[1][1], rm1.states[1])


class TestRetroactiveCollide:
    def _setup(self, pos_from_0, pos_to_0, pos_from_1, pos_to_1, radius=0.1):
        m = RobotModel("point2d", radius=radius)
        rm0 = manual_roadmap(m, [pos_from_0, pos_to_0], [(0, 1)], 0, 1)
        rm1 = manual_roadmap(m, [pos_from_1, pos_to_1], [(0, 1)], 0, 1)
        return m, [rm0, rm1]

    def test_block_boundary_no_tests(self):
        # node.next = 0 right after the previous block closed: parent.next
        # is the last robot, so the loop body never runs, even for motions
        # that would geometrically collide
        m, rms = self._setup([0.2, 0.5], [0.8, 0.5], [0.8, 0.5], [0.2, 0.5])
        root = SearchNode((0, 0), 0, None, 0)
        a = SearchNode((1, 0), 1, root, 1)   # robot 0 moved
        b = SearchNode((1, 1), 0, a, 2)      # robot 1 moved; block closed
        new_config = (0, 1)
        assert retroactive_collide([m, m], rms, b, new_config) is False

    def test_crossing_in_block_detected(self):
        m, rms = self._setup([0.2, 0.5], [0.8, 0.5], [0.8, 0.5], [0.2, 0.5])
        root = SearchNode((0, 0), 0, None, 0)
        after0 = SearchNode((1, 0), 1, root, 1)  # robot 0: 0.2 -> 0.8
        # robot 1 now wants 0.8 -> 0.2 inside the same block
        assert retroactive_collide([m, m], rms, after0, (1, 1)) is True

    def test_disjoint_block_motions_clear(self):
        m, rms = self._setup([0.1, 0.1], [0.3, 0.1], [0.9, 0.9], [0.7, 0.9],
                             radius=0.05)
        root = SearchNode((0, 0), 0, None, 0)
        after0 = SearchNode((1, 0), 1, root, 1)
        assert retroactive_collide([m, m], rms, after0, (1, 1)) is False

    def test_block_mode_solve_smoke(self):
        models = [RobotModel("point2d", radius=0.07) for _ in range(2)]
        inst = make_instance(models, [[0.2, 0.5], [0.8, 0.5]],
                             [[0.8, 0.5], [0.2, 0.5]])
        res = solve(inst, SsspParams(seed=0, time_limit=30,
                                     collision_mode="block"))
        assert res.solved
        assert not verify(inst, res.solution)


class TestFrozenRoadmapOracle:
    def _random_case(self, rng):
        n = rng.randint(1, 3)
        models = [RobotModel("point2d", radius=rng.uniform(0.04, 0.12))
                  for _ in range(n)]
        roadmaps = []
        for i in range(n):
            k = rng.randint(2, 6)
            states = []
            while len(states) < k:
                q = sample(models[i], rng)
                if state_valid(models[i], q, []):
                    states.append(q)
            rm = Roadmap(models[i], [])
            for q in states:
                rm.append_vertex(q)
            for _ in range(rng.randint(1, 3 * k)):
                u, v = rng.randrange(k), rng.randrange(k)
                if u != v:
                    rm.add_edge(u, v)
            rm.start_id = rng.randrange(k)
            rm.goal_id = rng.randrange(k)
            rm.rebuild_goal_dist()
            roadmaps.append(rm)
        # preconditions: statically clear at starts and at goals
        from mrmp.collision import static_config_clear
        starts = [rm.states[rm.start_id] for rm in roadmaps]
        goals = [rm.states[rm.goal_id] for rm in roadmaps]
        if not (static_config_clear(models, starts)
                and static_config_clear(models, goals)):
            return None
        inst = make_instance(models, starts, goals)
        return inst, models, roadmaps

    def test_matches_product_bfs(self):
        from mrmp.collision import collide_pair

        rng = random.Random(123)
        agreements = 0
        cases = 0
        while cases < 100:
            made = self._random_case(rng)
            if made is None:
                continue
            inst, models, roadmaps = made
            cases += 1

            def collide_fn(config, mover, to_id):
                qa = roadmaps[mover].states[config[mover]]
                qb = roadmaps[mover].states[to_id]
                for j in range(len(models)):
                    if j == mover:
                        continue
                    qj = roadmaps[j].states[config[j]]
                    if collide_pair(models[mover], models[j], qa, qb, qj, qj):
                        return True
                return False

            expected = product_bfs_solvable(models, roadmaps, collide_fn)
            res = solve_on_roadmaps(inst, roadmaps, SsspParams(seed=0, time_limit=30))
            got = res.outcome == OUTCOME_SOLVED
            assert got == expected
            if got:
                assert not verify(inst, res.solution)
            agreements += 1
        assert agreements == 100

import math
import random

import numpy as np
import pytest

import mrmp
from mrmp.bench import gen_instance, verify
from mrmp.instance import Instance
from mrmp.postprocess import (
    TemporalPlanGraph,
    build_tpg,
    earliest_schedule,
    path_length,
    shortcut,
    total_traveling_time,
)
from mrmp.robots import RobotModel
from mrmp.solution import Solution


def make_instance(models, starts, goals, obstacles=(), seed=0):
    return Instance(scenario=models[0].scenario, models=models, starts=starts,
                    goals=goals, obstacles=list(obstacles), seed=seed)


def make_solution(instance, paths):
    sol = Solution(instance.id, "test", paths)
    assert not verify(instance, sol), verify(instance, sol)[:3]
    return sol


class FakeRng:
    """Deterministic randrange stub for forcing shortcut picks."""

    def __init__(self, values):
        self.values = list(values)

    def randrange(self, *args):
        if not self.values:
            # out of scripted picks: return lowest valid to finish quickly
            return args[0] if len(args) > 1 else 0
        return self.values.pop(0)


class TestBuildTpg:
    def test_single_robot_pure_chain(self):
        m = RobotModel("point2d", radius=0.05)
        inst = make_instance([m], [[0.2, 0.5]], [[0.8, 0.5]])
        sol = make_solution(inst, [[[0.2, 0.5], [0.5, 0.5], [0.8, 0.5]]])
        tpg = build_tpg(sol, inst.models)
        assert tpg.inter_edges == []
        assert tpg.durations[0][1] == pytest.approx(0.3)
        assert tpg.durations[0][2] == pytest.approx(0.3)

    def test_far_robots_disjoint_chains(self):
        m = RobotModel("point2d", radius=0.03)
        inst = make_instance([m, m], [[0.1, 0.1], [0.9, 0.9]],
                             [[0.3, 0.1], [0.7, 0.9]])
        sol = make_solution(inst, [
            [[0.1, 0.1], [0.2, 0.1], [0.3, 0.1]],
            [[0.9, 0.9], [0.8, 0.9], [0.7, 0.9]],
        ])
        tpg = build_tpg(sol, inst.models)
        assert tpg.inter_edges == []

    def test_crossing_shared_cell_emits_ordering_edge(self):
        m = RobotModel("point2d", radius=0.05)
        inst = make_instance([m, m], [[0.2, 0.5], [0.5, 0.1]],
                             [[0.65, 0.5], [0.5, 0.5]])
        # robot 0 crosses the shared cell at step 2, robot 1 arrives at step 5
        paths = [
            [[0.2, 0.5], [0.35, 0.5], [0.5, 0.5], [0.65, 0.5], [0.65, 0.5], [0.65, 0.5]],
            [[0.5, 0.1], [0.5, 0.1], [0.5, 0.1], [0.5, 0.1], [0.5, 0.3], [0.5, 0.5]],
        ]
        sol = make_solution(inst, paths)
        tpg = build_tpg(sol, inst.models)
        assert (0, 2, 1, 5) in tpg.inter_edges
        assert all(t < t2 for _i, t, _j, t2 in tpg.inter_edges)

    def test_acyclic_by_step_grading(self):
        rng = random.Random(0)
        solved = 0
        while solved < 5:
            inst = gen_instance("point2d", n_robots=3, seed=rng.randrange(10_000))
            res = mrmp.solve(inst, mrmp.SsspParams(seed=0, time_limit=20))
            if not res.solved:
                continue
            solved += 1
            tpg = build_tpg(res.solution, inst.models)
            for i, t, j, t2 in tpg.inter_edges:
                assert t < t2


class TestEarliestSchedule:
    def test_chain(self):
        tpg = TemporalPlanGraph(1, 2, [[0.0, 0.2, 0.3]], [])
        times = earliest_schedule(tpg)
        assert times[0] == pytest.approx([0.0, 0.2, 0.5])

    def test_diamond_join_takes_max(self):
        # two chains joining: the join waits for the slower branch
        durations = [[0.0, 0.4, 0.0], [0.0, 0.7, 0.0]]
        inter = [(1, 1, 0, 2)]  # robot 0's second motion waits for robot 1
        tpg = TemporalPlanGraph(2, 2, durations, inter)
        times = earliest_schedule(tpg)
        assert times[0][2] == pytest.approx(0.7)

    def test_matches_relaxation_oracle_on_random_dags(self):
        rng = random.Random(5)
        for _ in range(50):
            n = rng.randint(2, 4)
            horizon = rng.randint(3, 8)
            durations = [[0.0] + [rng.uniform(0, 0.5) for _ in range(horizon)]
                         for _ in range(n)]
            inter = []
            for _ in range(rng.randint(0, 12)):
                i, j = rng.randrange(n), rng.randrange(n)
                if i == j:
                    continue
                t = rng.randint(1, horizon - 1)
                t2 = rng.randint(t + 1, horizon)
                inter.append((i, t, j, t2))
            tpg = TemporalPlanGraph(n, horizon, durations, inter)
            got = earliest_schedule(tpg)
            expected = self._relaxation_oracle(tpg)
            for i in range(n):
                assert got[i] == pytest.approx(expected[i], abs=1e-12)

    @staticmethod
    def _relaxation_oracle(tpg):
        # O(V*E) Bellman-style longest path: relax all edges until fixpoint
        times = [[0.0] * (tpg.T + 1) for _ in range(tpg.n_robots)]
        edges = []
        for i in range(tpg.n_robots):
            for t in range(1, tpg.T + 1):
                edges.append(((i, t - 1), (i, t), tpg.durations[i][t]))
        for i, t, j, t2 in tpg.inter_edges:
            edges.append(((i, t), (j, t2), tpg.durations[j][t2]))
        for _ in range(tpg.n_robots * (tpg.T + 1)):
            changed = False
            for (a, ta), (b, tb), d in edges:
                if times[a][ta] + d > times[b][tb] + 1e-15:
                    times[b][tb] = times[a][ta] + d
                    changed = True
            if not changed:
                break
        return times

    def test_respects_every_constraint(self):
        rng = random.Random(9)
        inst = gen_instance("point2d", n_robots=3, seed=77)
        res = mrmp.solve(inst, mrmp.SsspParams(seed=0, time_limit=30))
        assert res.solved
        tpg = build_tpg(res.solution, inst.models)
        times = earliest_schedule(tpg)
        for i in range(tpg.n_robots):
            for t in range(1, tpg.T + 1):
                assert times[i][t] >= times[i][t - 1] + tpg.durations[i][t] - 1e-12
        for i, t, j, t2 in tpg.inter_edges:
            assert times[j][t2] >= times[i][t] + tpg.durations[j][t2] - 1e-12


class TestShortcut:
    def test_zero_iterations_identity(self):
        m = RobotModel("point2d", radius=0.05)
        inst = make_instance([m], [[0.2, 0.5]], [[0.8, 0.5]])
        sol = make_solution(inst, [[[0.2, 0.5], [0.4, 0.7], [0.8, 0.5]]])
        tpg = build_tpg(sol, inst.models)
        out = shortcut(sol, tpg, inst.models, inst.obstacles, random.Random(0),
                       iterations=0)
        for a, b in zip(sol.paths[0], out.paths[0]):
            assert np.array_equal(a, b)

    def test_detour_straightened(self):
        m = RobotModel("point2d", radius=0.05)
        inst = make_instance([m], [[0.2, 0.2]], [[0.8, 0.2]])
        detour = [[0.2, 0.2], [0.35, 0.6], [0.5, 0.7], [0.65, 0.6], [0.8, 0.2]]
        sol = make_solution(inst, [detour])
        tpg = build_tpg(sol, inst.models)
        out = shortcut(sol, tpg, inst.models, inst.obstacles, random.Random(3),
                       iterations=200)
        assert path_length(m, out.paths[0]) < path_length(m, sol.paths[0]) - 1e-6
        assert not verify(inst, out)

    def test_dependency_guard_rejects(self):
        m = RobotModel("point2d", radius=0.05)
        inst = make_instance([m, m], [[0.2, 0.5], [0.5, 0.1]],
                             [[0.65, 0.5], [0.5, 0.5]])
        paths = [
            [[0.2, 0.5], [0.35, 0.57], [0.5, 0.5], [0.65, 0.5], [0.65, 0.5], [0.65, 0.5]],
            [[0.5, 0.1], [0.5, 0.1], [0.5, 0.1], [0.5, 0.1], [0.5, 0.3], [0.5, 0.5]],
        ]
        sol = make_solution(inst, paths)
        tpg = build_tpg(sol, inst.models)
        assert (0, 2) in tpg.dependent_events  # robot 1 waits on this event
        # force the pick (robot 0, a=1, b=3): interior event (0, 2) is
        # depended upon, so the bent subpath must survive untouched
        out = shortcut(sol, tpg, inst.models, inst.obstacles,
                       FakeRng([0, 1, 3]), iterations=1)
        assert np.array_equal(out.paths[0][2], np.array([0.5, 0.5]))
        for a, b in zip(sol.paths[0], out.paths[0]):
            assert np.array_equal(a, b)

    def test_same_step_collision_rejected(self):
        # straightening robot 0 through the parked robot 1 must be refused
        m = RobotModel("point2d", radius=0.1)
        inst = make_instance([m, m], [[0.2, 0.5], [0.5, 0.45]],
                             [[0.8, 0.5], [0.5, 0.45]])
        paths = [
            [[0.2, 0.5], [0.3, 0.8], [0.5, 0.85], [0.7, 0.8], [0.8, 0.5]],
            [[0.5, 0.45]] * 5,
        ]
        sol = make_solution(inst, paths)
        tpg = build_tpg(sol, inst.models)
        out = shortcut(sol, tpg, inst.models, inst.obstacles, random.Random(1),
                       iterations=400)
        assert not verify(inst, out)
        # the direct line through (0.5, 0.5) would hit robot 1: it cannot
        # have been taken
        mid = out.paths[0][2]
        assert math.dist(mid, [0.5, 0.45]) >= 0.2


class TestTotalTravelingTime:
    def test_zero_step_solution(self):
        m = RobotModel("point2d", radius=0.05)
        inst = make_instance([m, m], [[0.2, 0.2], [0.8, 0.8]],
                             [[0.2, 0.2], [0.8, 0.8]])
        sol = make_solution(inst, [[[0.2, 0.2]], [[0.8, 0.8]]])
        raw, norm, smoothed = total_traveling_time(sol, inst.models,
                                                   inst.obstacles,
                                                   random.Random(0))
        assert raw == 0.0 and norm == 0.0
        assert smoothed.T == 0

    def test_all_at_goal_zero(self):
        m = RobotModel("point2d", radius=0.05)
        inst = make_instance([m, m], [[0.2, 0.2], [0.8, 0.8]],
                             [[0.2, 0.2], [0.8, 0.8]])
        sol = make_solution(inst, [[[0.2, 0.2]] * 3, [[0.8, 0.8]] * 3])
        raw, norm, _ = total_traveling_time(sol, inst.models, inst.obstacles,
                                            random.Random(0))
        assert raw == 0.0 and norm == 0.0

    def test_single_robot_straight_path(self):
        m = RobotModel("point2d", radius=0.05)
        inst = make_instance([m], [[0.1, 0.5]], [[0.9, 0.5]])
        sol = make_solution(inst, [[[0.1, 0.5], [0.5, 0.5], [0.9, 0.5]]])
        raw, norm, _ = total_traveling_time(sol, inst.models, inst.obstacles,
                                            random.Random(0))
        assert raw == pytest.approx(0.8, abs=1e-9)
        assert norm == pytest.approx(0.8, abs=1e-9)

    def test_two_robot_fixture_hand_computed(self):
        m = RobotModel("point2d", radius=0.05)
        inst = make_instance([m, m], [[0.5, 0.5], [0.1, 0.5]],
                             [[0.8, 0.5], [0.45, 0.5]])
        paths = [
            [[0.5, 0.5], [0.8, 0.5], [0.8, 0.5]],
            [[0.1, 0.5], [0.1, 0.5], [0.45, 0.5]],
        ]
        sol = make_solution(inst, paths)
        tpg = build_tpg(sol, inst.models)
        # robot 1's move into the vacated stretch depends on robot 0 leaving
        assert (0, 1, 1, 2) in tpg.inter_edges
        times = earliest_schedule(tpg)
        assert times[0][2] == pytest.approx(0.3)
        assert times[1][2] == pytest.approx(0.3 + 0.35)
        raw, norm, _ = total_traveling_time(sol, inst.models, inst.obstacles,
                                            random.Random(0), iterations=0)
        assert raw == pytest.approx(0.3 + 0.65, abs=1e-9)
        assert norm == pytest.approx(raw / 2, abs=1e-12)

    def test_monotone_and_verified_on_random_solutions(self):
        rng = random.Random(31)
        checked = 0
        while checked < 20:
            inst = gen_instance("point2d", n_robots=rng.randint(2, 4),
                                seed=rng.randrange(100_000))
            res = mrmp.solve(inst, mrmp.SsspParams(seed=1, time_limit=20))
            if not res.solved:
                continue
            checked += 1
            sol = res.solution
            metric_rng = random.Random(checked)
            raw0, _, _ = total_traveling_time(sol, inst.models, inst.obstacles,
                                              random.Random(0), iterations=0)
            raw1, _, smoothed = total_traveling_time(sol, inst.models,
                                                     inst.obstacles, metric_rng)
            assert raw1 <= raw0 + 1e-9
            assert not verify(inst, smoothed)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from _util import random_binary_milp
from bncg.lp import LinearProgram
from bncg.milp import Cut, MilpLimits, MilpProblem, MilpStatus, NoIncumbent, solve_milp


def knapsack():
    prog = LinearProgram([5, 4, 3], [[2, 3, 1]], ["<="], [5], [0, 0, 0], [1, 1, 1], maximize=True)
    return MilpProblem(prog, range(3))


class TestExamples:
    def test_pick_one(self):
        prog = LinearProgram([1, 1], [[1, 1]], ["<="], [1], [0, 0], [1, 1], maximize=True)
        res = solve_milp(MilpProblem(prog, [0, 1]))
        assert res.status is MilpStatus.OPTIMAL and res.objective == pytest.approx(1.0)
        assert sorted(res.x) == [0.0, 1.0]

    def test_knapsack(self):
        res = solve_milp(knapsack())
        # enumeration over the 8 points: (1,0,1) gives 8, (1,1,0) gives 9
        assert res.objective == pytest.approx(9.0) and np.allclose(res.x, [1, 1, 0])

    def test_lazy_cut_on_all_ones(self):
        prog = LinearProgram([1, 1, 1], np.zeros((0, 3)), [], [], np.zeros(3), np.ones(3), maximize=True)
        seen = []

        def cb(x):
            seen.append(x.copy())
            if np.all(x > 0.5):
                return [Cut(np.ones(3), "<=", 2.0)]
            return None

        res = solve_milp(MilpProblem(prog, range(3)), cb)
        assert res.objective == pytest.approx(2.0) and len(res.cuts) == 1
        assert not cb(res.x)  # the final incumbent is accepted again

    def test_non_violated_cut_is_rejected(self):
        prog = LinearProgram([1, 1], np.zeros((0, 2)), [], [], np.zeros(2), np.ones(2), maximize=True)
        with pytest.raises(ValueError):
            solve_milp(MilpProblem(prog, range(2)), lambda x: [Cut(np.ones(2), "<=", 5.0)])

    def test_infeasible(self):
        prog = LinearProgram([1, 1], [[1, 1]], [">="], [1.5], [0, 0], [1, 1])
        prog = prog.with_rows([[1, 1]], ["<="], [1.2])
        assert solve_milp(MilpProblem(prog, range(2))).status is MilpStatus.INFEASIBLE

    def test_binary_bounds_validated(self):
        prog = LinearProgram([1], np.zeros((0, 1)), [], [], [0], [2])
        with pytest.raises(ValueError):
            MilpProblem(prog, [0])


class TestLimits:
    def test_cutoff(self):
        res = solve_milp(knapsack(), limits=MilpLimits(cutoff=9.0))
        assert res.status is MilpStatus.CUTOFF and res.x is None
        assert solve_milp(knapsack(), limits=MilpLimits(cutoff=8.5)).objective == pytest.approx(9.0)

    def test_node_limit_keeps_incumbent_and_valid_bound(self):
        res = solve_milp(knapsack(), limits=MilpLimits(nodes=1), incumbent=np.array([1.0, 0, 1]))
        assert res.status is MilpStatus.NODE_LIMIT
        assert res.objective == pytest.approx(8.0) and res.bound >= 9.0 - 1e-9

    def test_no_incumbent(self):
        with pytest.raises(NoIncumbent):
            solve_milp(knapsack(), limits=MilpLimits(nodes=0))

    def test_infeasible_hint_is_ignored(self):
        res = solve_milp(knapsack(), incumbent=np.ones(3))
        assert res.objective == pytest.approx(9.0)


@given(st.integers(0, 2**32 - 1), st.integers(1, 10))
def test_matches_enumeration(seed, k):
    problem, best = random_binary_milp(np.random.default_rng(seed), k)
    res = solve_milp(problem)
    if best is None:
        assert res.status is MilpStatus.INFEASIBLE
    else:
        assert res.status is MilpStatus.OPTIMAL
        assert res.objective == pytest.approx(best, abs=1e-9)
        assert abs(res.objective - res.bound) <= 1e-6 * (1 + abs(res.objective))


def test_mixed_binary_against_scipy():
    from scipy.optimize import LinearConstraint, milp

    rng = np.random.default_rng(5)
    for _ in range(30):
        k, m = 8, 5
        A = rng.integers(-3, 5, (m, k)).astype(float)
        b = rng.uniform(1, 6, m)
        c = rng.normal(size=k)
        upper = np.where(np.arange(k) < 5, 1.0, rng.uniform(1, 3, k))
        prog = LinearProgram(c, A, ["<="] * m, b, np.zeros(k), upper, maximize=True)
        res = solve_milp(MilpProblem(prog, range(5)))
        integrality = (np.arange(k) < 5).astype(int)
        ref = milp(-c, constraints=LinearConstraint(A, -np.inf, b), integrality=integrality,
                   bounds=(np.zeros(k), upper))
        assert res.status is MilpStatus.OPTIMAL
        assert res.objective == pytest.approx(-ref.fun, abs=1e-6)

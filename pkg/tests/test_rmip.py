import numpy as np
import pytest
from hypothesis import given, strategies as st

from _util import full_pool, gaussian_instance
from bncg.milp import MilpStatus
from bncg.model import ClusterSet, Column, ColumnPool, NodeSet, is_acyclic
from bncg.oracle import exact_bnsl
from bncg.rmip import best_dag_in_pool, solve_rmip
from bncg.scoring import LocalScorer, ScoreConfig

METHODS = ("branch_and_cut", "subset_dp")


@pytest.mark.parametrize("method", METHODS)
def test_empty_pools(method):
    res = solve_rmip(ColumnPool([-1.0, 2.0, 0.5]), ClusterSet(), method=method)
    assert res.dag.n_edges == 0 and res.score == pytest.approx(1.5) and res.clusters_added == []


def mutual_pool():
    pool = ColumnPool([0.0, 0.0])
    pool.add(Column(0, NodeSet([1]), 5.0))
    pool.add(Column(1, NodeSet([0]), 4.0))
    return pool


def test_mutual_preference_branch_and_cut_adds_cluster():
    clusters = ClusterSet()
    res = solve_rmip(mutual_pool(), clusters, method="branch_and_cut")
    # feasible selections: {}, 1->0 (5), 0->1 (4); both edges is the cycle
    assert sorted(res.dag.edges()) == [(1, 0)] and res.score == pytest.approx(5.0)
    assert res.clusters_added == [NodeSet([0, 1])] and NodeSet([0, 1]) in clusters
    assert res.status is MilpStatus.OPTIMAL


def test_mutual_preference_subset_dp():
    res = solve_rmip(mutual_pool(), ClusterSet(), method="subset_dp")
    assert sorted(res.dag.edges()) == [(1, 0)] and res.score == pytest.approx(5.0)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("method", METHODS)
def test_full_pools_reach_global_optimum(seed, method):
    n = 4 if method == "branch_and_cut" else 5
    sim = gaussian_instance(n, 500, 1.0, seed)
    cfg = ScoreConfig.bic(500)
    scorer = LocalScorer(sim.data, cfg)
    res = solve_rmip(full_pool(scorer), ClusterSet(), method=method)
    assert is_acyclic(res.dag.parents)
    assert res.score == pytest.approx(exact_bnsl(sim.data, cfg, scorer=scorer).score, rel=1e-8)
    assert res.score == pytest.approx(scorer.graph_score(res.dag), rel=1e-8)


@given(st.integers(0, 2**32 - 1))
def test_engines_agree_on_random_pools(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    pool = ColumnPool(rng.normal(size=n).tolist())
    for i in range(n):
        for _ in range(int(rng.integers(0, 5))):
            J = NodeSet(j for j in range(n) if j != i and rng.random() < 0.5)
            if int(J) and (i, J) not in pool:
                pool.add(Column(i, J, float(rng.normal(1.0, 1.0))))
    bc = solve_rmip(pool, ClusterSet(), method="branch_and_cut")
    dp = solve_rmip(pool, ClusterSet(), method="subset_dp")
    assert bc.score == pytest.approx(dp.score, abs=1e-9)
    assert is_acyclic(dp.dag.parents) and is_acyclic(bc.dag.parents)
    chosen, score = best_dag_in_pool(pool)
    assert sorted(c.node for c in chosen) == list(range(n)) and score == pytest.approx(dp.score)


def test_unknown_method():
    with pytest.raises(ValueError):
        solve_rmip(mutual_pool(), ClusterSet(), method="greedy")

import numpy as np
import pytest
from hypothesis import given, strategies as st

from _util import all_dags, cpdag_by_enumeration, equivalence_classes, random_dag_from_order
from bncg.metrics import NodeMismatch, compare, shd_pdag, to_essential_graph
from bncg.model import FORWARD, NONE, UNDIRECTED, Dag

CHAIN = Dag.from_edges(3, [(0, 1), (1, 2)])
FORK = Dag.from_edges(3, [(1, 0), (1, 2)])
COLLIDER = Dag.from_edges(3, [(0, 1), (2, 1)])


def test_chain_is_undirected():
    g = to_essential_graph(CHAIN)
    assert g.mark(0, 1) == g.mark(1, 2) == UNDIRECTED and g.mark(0, 2) == NONE


def test_collider_is_compelled():
    g = to_essential_graph(COLLIDER)
    assert g.mark(0, 1) == g.mark(2, 1) == FORWARD


@pytest.mark.parametrize("n", [2, 3, 4])
def test_matches_equivalence_enumeration(n):
    for members in equivalence_classes(all_dags(n)).values():
        expected = cpdag_by_enumeration(members)
        for g in members:
            assert np.array_equal(to_essential_graph(g).adj, expected)


def test_idempotent():
    rng = np.random.default_rng(0)
    for _ in range(100):
        g = to_essential_graph(random_dag_from_order(rng, 6))
        assert to_essential_graph(g) == g


def test_compare_examples():
    assert compare(CHAIN, CHAIN) == compare(FORK, FORK)
    c = compare(COLLIDER, COLLIDER)
    assert (c.precision, c.recall, c.shd) == (1.0, 1.0, 0)
    assert compare(CHAIN, FORK).shd == 0
    c = compare(COLLIDER, CHAIN)
    assert (c.precision, c.recall, c.shd) == (0.0, 0.0, 2)


def test_empty_graph_conventions():
    empty = Dag.empty(3)
    c = compare(empty, CHAIN)
    assert (c.precision, c.recall, c.shd) == (1.0, 0.0, 2)
    c = compare(CHAIN, empty)
    assert (c.precision, c.recall) == (0.0, 1.0)


def test_partial_overlap():
    truth = Dag.from_edges(4, [(0, 1), (2, 1), (1, 3)])  # collider at 1, then 1 -> 3 by R1
    pred = Dag.from_edges(4, [(0, 1), (2, 1)])
    c = compare(pred, truth)
    assert (c.precision, c.recall, c.shd) == (1.0, pytest.approx(2 / 3), 1)


def test_node_mismatch():
    with pytest.raises(NodeMismatch):
        compare(Dag.empty(2), Dag.empty(3))


def test_equivalent_dags_compare_equal():
    for members in equivalence_classes(all_dags(4)).values():
        for g in members[1:]:
            c = compare(g, members[0])
            assert (c.precision, c.recall, c.shd) == (1.0, 1.0, 0)


@given(st.integers(0, 2**32 - 1))
def test_shd_is_a_metric(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    a, b, c = (to_essential_graph(random_dag_from_order(rng, n)) for _ in range(3))
    assert shd_pdag(a, a) == 0
    assert shd_pdag(a, b) == shd_pdag(b, a)
    assert shd_pdag(a, c) <= shd_pdag(a, b) + shd_pdag(b, c)
    assert (shd_pdag(a, b) == 0) == (a == b)

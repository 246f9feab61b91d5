import numpy as np
import pytest
from hypothesis import given, strategies as st

from _util import max_cluster_violation, random_fractional_primal
from bncg.model import ColumnPool, NodeSet
from bncg.separation import cluster_lhs, separate_fractional, separate_integer

METHODS = ("auto", "enumerate", "milp")


class TestInteger:
    def test_triangle(self):
        assert separate_integer([NodeSet([2]), NodeSet([0]), NodeSet([1])]) == [NodeSet([0, 1, 2])]

    def test_chain(self):
        assert separate_integer([NodeSet(), NodeSet([0]), NodeSet([1])]) == []

    def test_two_disjoint_cycles(self):
        parents = [NodeSet([1]), NodeSet([0]), NodeSet([3]), NodeSet([2])]
        assert separate_integer(parents) == [NodeSet([0, 1]), NodeSet([2, 3])]

    def test_returns_a_cycle_inside_a_larger_component(self):
        # 0 <-> 1 and 1 -> 2 -> 0: one component, shortest cycle through 0 is {0, 1}
        parents = [NodeSet([1, 2]), NodeSet([0]), NodeSet([1])]
        assert separate_integer(parents) == [NodeSet([0, 1])]

    @given(st.integers(0, 2**32 - 1))
    def test_every_cluster_is_a_violated_cycle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 8))
        parents = [NodeSet(j for j in range(n) if j != i and rng.random() < 0.3) for i in range(n)]
        found = separate_integer(parents)
        primal = {(i, int(p)): 1.0 for i, p in enumerate(parents)}
        for C in found:
            assert cluster_lhs(primal, C) > len(C) - 1
        assert (found == []) == (max_cluster_violation(primal, n) <= 0)


@pytest.mark.parametrize("method", METHODS)
class TestFractional:
    def test_two_cycle_example(self, method):
        res = separate_fractional({(0, 0b10): 0.6, (0, 0): 0.4, (1, 0b01): 0.6, (1, 0): 0.4},
                                  ColumnPool([0, 0]), method)
        assert res.cluster == NodeSet([0, 1]) and res.violation == pytest.approx(0.2)

    def test_acyclic_integral(self, method):
        primal = {(0, 0): 1.0, (1, 0b001): 1.0, (2, 0b011): 1.0}
        assert separate_fractional(primal, ColumnPool([0] * 3), method) is None

    def test_all_mass_on_empty(self, method):
        assert separate_fractional({(i, 0): 1.0 for i in range(4)}, ColumnPool([0] * 4), method) is None

    @given(st.integers(0, 2**32 - 1))
    def test_matches_enumeration(self, method, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 9))
        primal = random_fractional_primal(rng, n)
        expected = max_cluster_violation(primal, n)
        res = separate_fractional(primal, ColumnPool([0] * n), method)
        if expected <= 1e-6:
            assert res is None
        else:
            assert res is not None
            assert res.violation == pytest.approx(expected, abs=1e-6)
            assert res.violation == pytest.approx(cluster_lhs(primal, res.cluster) - (len(res.cluster) - 1))
            assert len(res.cluster) >= 2


def test_unknown_method():
    with pytest.raises(ValueError):
        separate_fractional({(0, 2): 1.0}, ColumnPool([0, 0]), "greedy")

import numpy as np
import pytest
from hypothesis import given, strategies as st

from _util import cardinality, gaussian_instance, random_submodular
from bncg.dca import DcaConfig, dca_minimize, kelley_minimize
from bncg.model import ClusterSet, DualSolution, NodeSet
from bncg.scoring import LocalScorer, ScoreConfig
from bncg.submodular import DsObjective, SetFunctionOracle, build_gaussian_ds, descending_order


def brute_min(fn, d):
    return min(fn(m) for m in range(1 << d))


def level_set_values(obj, x):
    order = descending_order(np.asarray(x, float))
    out, mask = [obj.value(0)], 0
    for j in order:
        mask |= 1 << int(j)
        out.append(obj.value(mask))
    return out


def random_ds(d, seed):
    g = random_submodular(d, seed)
    f = random_submodular(d, seed + 7919)
    return DsObjective(g, f, tuple(range(d)))


class TestKelley:
    def test_cardinality_no_linear_term(self):
        res = kelley_minimize(cardinality(2), np.zeros(2))
        assert np.array_equal(res.x, [0, 0]) and res.value == pytest.approx(0.0)

    def test_cardinality_with_linear_term(self):
        res = kelley_minimize(cardinality(2), np.array([2.0, 0.0]))
        assert np.array_equal(res.x, [1, 0]) and res.value == pytest.approx(-1.0)

    @given(st.integers(0, 10_000))
    def test_matches_enumeration(self, seed):
        g = random_submodular(4, seed)
        y = np.random.default_rng(seed).normal(size=4)
        res = kelley_minimize(g, y)
        best = brute_min(lambda m: g(m) - sum(y[k] for k in range(4) if (m >> k) & 1), 4)
        assert res.converged
        assert res.value == pytest.approx(best, abs=1e-6)
        # cutting-plane bounds never exceed the true optimum
        assert all(b <= best + 1e-9 for b in res.lp_bounds)

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            kelley_minimize(cardinality(2), np.zeros(3))


class TestDca:
    def test_two_element_example(self):
        g = cardinality(2)
        f = SetFunctionOracle(2, lambda m: 0.0 if m == 0 else 2.0)
        res = dca_minimize(DsObjective(g, f, (0, 1)), [1.0, 1.0])
        assert res.best_subset == NodeSet([0]) and res.best_value == pytest.approx(-1.0)

    def test_pure_convex(self):
        obj = DsObjective(cardinality(3), SetFunctionOracle(3, lambda m: 0.0), (0, 1, 2))
        res = dca_minimize(obj, [0.3, 0.9, 0.1])
        assert res.best_subset == NodeSet() and res.best_value == 0.0 and res.iterations == 1

    def test_gaussian_pricing_at_zero_duals(self):
        data = gaussian_instance(7, 1000, 1.0, 0).data
        scorer = LocalScorer(data, ScoreConfig.bic(1000))
        for i in range(7):
            obj = build_gaussian_ds(scorer, i, DualSolution.zeros(7), ClusterSet())
            res = dca_minimize(obj, np.zeros(6))
            assert res.best_value <= obj.value(0) + 1e-12

    def test_config_validation(self):
        with pytest.raises(ValueError):
            DcaConfig(epsilon=0)
        with pytest.raises(ValueError):
            DcaConfig(kelley_max_cuts=0)

    @given(st.integers(0, 10_000), st.integers(3, 6))
    def test_invariants_on_random_ds(self, seed, d):
        obj = random_ds(d, seed)
        x0 = np.random.default_rng(seed).random(d)
        cfg = DcaConfig()
        res = dca_minimize(obj, x0, cfg)
        # monotone trajectory
        assert res.monotonicity_violations(cfg.kelley_tolerance) == 0
        # best value is a true set-function value
        local = obj.to_local(res.best_subset)
        assert res.best_value == pytest.approx(obj.value(local), abs=1e-12)
        # never worse than the rounded start
        assert res.best_value <= min(level_set_values(obj, x0)) + 1e-12
        # visited sets are exactly negative, consistent, and bounded below by the best
        for J, v in res.visited:
            assert v < 0 and v == pytest.approx(obj.value(obj.to_local(J)), abs=1e-12)
            assert v >= res.best_value - 1e-12
        # never beats exhaustive search
        assert res.best_value >= brute_min(obj.value, d) - 1e-12

    def test_deterministic(self):
        obj = random_ds(5, 3)
        a = dca_minimize(obj, np.full(5, 0.5))
        b = dca_minimize(random_ds(5, 3), np.full(5, 0.5))
        assert a.best_subset == b.best_subset and a.trajectory == b.trajectory

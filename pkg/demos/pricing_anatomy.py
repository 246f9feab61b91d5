"""One pricing step up close.

After the first restricted master solve every node has only the empty parent
set.  The pricing problem for a node asks for the parent set with the most
negative reduced cost; it is a difference of two submodular functions, which
DCA attacks through their Lovasz extensions.  Here the DCA answer is set
against full enumeration.

    python demos/pricing_anatomy.py
"""
import numpy as np

from bncg import ClusterSet, ColumnPool, LocalScorer, PricingConfig, ScoreConfig, SimSpec, random_dag, simulate_gaussian
from bncg.master import build_and_solve_rmlp
from bncg.oracle import exact_pricing
from bncg.pricing import node_rng, price_node

spec = SimSpec(8, 2000, 1.5, seed=4)
sim = simulate_gaussian(random_dag(spec), spec)
cfg = ScoreConfig.bic(spec.N)
scorer = LocalScorer(sim.data, cfg)

pool = ColumnPool([scorer.local_score(i, 0) for i in range(spec.n)])
clusters = ClusterSet()
state = build_and_solve_rmlp(pool, clusters)
print(f"master objective with empty parent sets: {state.objective:.3f}")

for i in range(spec.n):
    res = price_node(i, scorer, PricingConfig(strategy="random"), state.duals, clusters, pool,
                     None, node_rng(0, i))
    exact = exact_pricing(i, state.duals, clusters, sim.data, cfg, scorer=scorer)
    best = sorted(res.new_columns[0].parents) if res.new_columns else "-"
    print(f"node {i}: true parents {sorted(sim.truth.parents[i])!s:<12} "
          f"DCA best {best!s:<12} rc {res.best_rc:10.3f}   exact {sorted(exact.parents)!s:<12} "
          f"rc {exact.reduced_cost:10.3f}   columns found {len(res.new_columns)}")

"""Learn a 7-node linear-Gaussian network from 5000 samples and compare it
with the graph that generated the data.

    python demos/recover_network.py [seed]
"""
import sys

import numpy as np

from bncg import PipelineConfig, PricingConfig, SimSpec, compare, run, simulate_gaussian
from bncg.datagen import random_dag_fixed_edges

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0

truth = random_dag_fixed_edges(7, 7, np.random.default_rng([seed, 7]))
sim = simulate_gaussian(truth, SimSpec(7, 5000, 1.0, seed=seed))
print("true edges:   ", sorted(truth.edges()))

report = run(sim.data, PipelineConfig(pricing=PricingConfig(seed=seed)))
print("learned edges:", sorted(report.dag.edges()))
print(f"stopped because: {report.converged} after {report.outer_iterations} outer iterations")
print(f"columns generated: {report.counts['columns']}, clusters added: {report.counts['clusters']}")

# edges are judged on essential graphs, so reversing an edge inside an
# equivalence class costs nothing
cmp = compare(report.dag, truth)
print(f"precision {cmp.precision:.2f}  recall {cmp.recall:.2f}  SHD {cmp.shd}")

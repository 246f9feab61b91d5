"""Structure learning on binary data read from CSV.

The discrete score uses empirical conditional entropies with a penalty per
free parameter.  The data here follow a noisy chain, written to a temporary
file and loaded back the way a user would.

    python demos/discrete_data.py
"""
import tempfile
from pathlib import Path

import numpy as np

from bncg import Dag, LocalScorer, ScoreConfig, load_csv, run

rng = np.random.default_rng(1)
N = 2000
a = rng.integers(0, 2, N)
b = np.where(rng.random(N) < 0.1, 1 - a, a)
c = np.where(rng.random(N) < 0.2, 1 - b, b)
d = rng.integers(0, 2, N)
e = np.where(rng.random(N) < 0.1, 1 - (c ^ d), c ^ d)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "binary.csv"
    np.savetxt(path, np.column_stack([a, b, c, d, e]), fmt="%d", delimiter=",", header="a,b,c,d,e", comments="")
    data = load_csv(path, "discrete")

report = run(data)
names = data.columns
print("learned edges:", [f"{names[u]}->{names[v]}" for u, v in sorted(report.dag.edges())])
empty = LocalScorer(data, ScoreConfig.bic(N)).graph_score(Dag.empty(data.n))
print(f"score {report.score:.2f} (empty graph {empty:.2f}), status {report.converged}")

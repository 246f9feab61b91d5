"""Random DAGs, linear-Gaussian samples, and CSV loading."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .model import Dag, Dataset

# named sub-streams so every consumer of the seed draws independently
STREAM_GRAPH = 1
STREAM_DATA = 2


class ParseError(ValueError):
    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.row, self.column = row, column


class ArityViolation(ValueError):
    pass


@dataclass(frozen=True)
class SimSpec:
    n: int
    N: int
    degree: float
    coef_range: tuple = (0.5, 2.0)
    noise_range: tuple = (0.7, 1.2)
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 nodes")
        if self.N < 1:
            raise ValueError("need at least 1 sample")
        if self.degree < 0:
            raise ValueError("average degree must be nonnegative")
        if self.edge_probability > 1 + 1e-12:
            raise ValueError(f"degree {self.degree} is too large for {self.n} nodes")
        lo, hi = self.coef_range
        if not 0 <= lo <= hi:
            raise ValueError("coefficient magnitudes need 0 <= low <= high")
        lo, hi = self.noise_range
        if not 0 < lo <= hi:
            raise ValueError("noise variances need 0 < low <= high")

    @property
    def edge_probability(self) -> float:
        return 2.0 * self.degree / (self.n - 1)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


def random_dag(spec: SimSpec, rng: Optional[np.random.Generator] = None) -> Dag:
    """Each forward edge ``u -> v`` (``u < v``) is kept with probability spec.edge_probability."""
    rng = rng or _rng(spec.seed, STREAM_GRAPH)
    p = min(spec.edge_probability, 1.0)
    n = spec.n
    keep = rng.random((n, n)) < p
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if keep[u, v]]
    return Dag.from_edges(n, edges)


def random_dag_fixed_edges(n: int, n_edges: int, rng: np.random.Generator) -> Dag:
    """Uniformly chosen ``n_edges`` forward edges over a random topological order."""
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if not 0 <= n_edges <= len(pairs):
        raise ValueError(f"cannot place {n_edges} edges on {n} nodes")
    perm = rng.permutation(n)
    chosen = rng.choice(len(pairs), size=n_edges, replace=False)
    return Dag.from_edges(n, [(int(perm[pairs[k][0]]), int(perm[pairs[k][1]])) for k in chosen])


@dataclass
class Simulation:
    data: Dataset
    truth: Dag
    coefficients: np.ndarray  # coefficients[u, v] is the weight of edge u -> v
    noise_variances: np.ndarray


def simulate_gaussian(dag: Dag, spec: SimSpec, rng: Optional[np.random.Generator] = None) -> Simulation:
    """Linear-Gaussian samples ``X_v = sum_u w_uv X_u + e_v``, columns centered."""
    rng = rng or _rng(spec.seed, STREAM_DATA)
    n, N = dag.n, spec.N
    W = np.zeros((n, n))
    lo, hi = spec.coef_range
    for u, v in dag.edges():
        W[u, v] = rng.uniform(lo, hi) * rng.choice([-1.0, 1.0])
    noise = rng.uniform(*spec.noise_range, size=n)
    X = np.zeros((N, n))
    eps = rng.standard_normal((N, n)) * np.sqrt(noise)
    for v in dag.topological_order():
        X[:, v] = X @ W[:, v] + eps[:, v]
    X -= X.mean(axis=0)
    return Simulation(Dataset(X), dag, W, noise)


def load_csv(path, kinds: str = "continuous", arities: Optional[Sequence[int]] = None) -> Dataset:
    """Read a comma-separated file.

    A first line whose first field is not numeric is taken as the header.
    ``kinds`` is ``"continuous"`` (values centered) or ``"discrete"`` (integer
    codes; arities inferred as max code + 1 unless given).
    """
    if kinds not in ("continuous", "discrete"):
        raise ValueError(f"kinds must be 'continuous' or 'discrete', got {kinds!r}")
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh, quoting=csv.QUOTE_NONE)]
    rows = [(k + 1, r) for k, r in enumerate(rows) if any(f.strip() for f in r)]
    if not rows:
        raise ParseError(f"{path} is empty")
    header = None
    try:
        float(rows[0][1][0])
    except ValueError:
        header = tuple(f.strip() for f in rows[0][1])
        rows = rows[1:]
    width = len(header) if header else len(rows[0][1]) if rows else 0
    values = []
    for line, fields in rows:
        if len(fields) != width:
            raise ParseError(f"expected {width} fields, found {len(fields)}", row=line)
        out = []
        for col, f in enumerate(fields):
            try:
                v = float(f)
            except ValueError:
                raise ParseError(f"{f.strip()!r} is not a number", row=line, column=col + 1) from None
            if not math.isfinite(v):
                raise ParseError("non-finite value", row=line, column=col + 1)
            out.append(v)
        values.append(out)
    X = np.array(values, dtype=float).reshape(len(values), width)
    if kinds == "continuous":
        return Dataset(X - X.mean(axis=0), header or ())
    if np.any(X != np.round(X)) or np.any(X < 0):
        raise ArityViolation("discrete columns must hold nonnegative integer codes")
    if arities is None:
        arities = tuple(max(2, int(m) + 1) for m in X.max(axis=0))
    else:
        arities = tuple(int(a) for a in arities)
        if len(arities) != width:
            raise ArityViolation(f"{len(arities)} arities given for {width} columns")
        for j, a in enumerate(arities):
            if X[:, j].max() >= a:
                raise ArityViolation(f"column {j + 1} has code {int(X[:, j].max())} but arity {a}")
    return Dataset(X, header or (), arities)

"""Reduced costs and DCA-based pricing of new parent-set columns."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dca import DcaConfig, dca_minimize
from .model import ClusterSet, Column, ColumnPool, DualSolution, NodeSet
from .scoring import LocalScorer, SingularSubmatrix
from .submodular import build_ds

STRATEGIES = ("random", "warm", "hybrid")
# columns are accepted only below this reduced cost (master units)
RC_THRESHOLD = -1e-6


class WarmUnavailable(RuntimeError):
    """Warm start requested before any restricted master LP was solved."""


@dataclass(frozen=True)
class PricingConfig:
    strategy: str = "hybrid"
    hybrid_threshold: int = 50
    seed: int = 0
    dca: DcaConfig = field(default_factory=DcaConfig)
    random_restarts: int = 3

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.hybrid_threshold < 1:
            raise ValueError("hybrid_threshold must be at least 1")
        if self.random_restarts < 1:
            raise ValueError("random_restarts must be at least 1")


def reduced_cost(i: int, J, duals: DualSolution, clusters: ClusterSet, score: float) -> float:
    J = int(J)
    rc = -float(score) + float(duals.node_duals[i])
    for k, C in enumerate(clusters):
        if (int(C) >> i) & 1 and J & int(C):
            rc += float(duals.cluster_duals[k])
    return rc


def effective_strategy(strategy: str, pool_size: int, threshold: int) -> str:
    if strategy == "hybrid":
        return "random" if pool_size < threshold else "warm"
    return strategy


def make_initial_point(i: int, strategy: str, pool: ColumnPool, last_primal: Optional[dict],
                       rng: np.random.Generator, threshold: int = 50) -> np.ndarray:
    """Starting point over the ground set ``V - {i}`` (local coordinates).

    ``last_primal`` maps ``(node, parents_mask)`` to RMLP values.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    d = pool.n - 1
    mode = effective_strategy(strategy, pool.size(i), threshold)
    if mode == "random":
        return rng.uniform(0.0, 1.0, size=d)
    if last_primal is None:
        raise WarmUnavailable("warm start needs the primal of a solved restricted master LP")
    x = np.zeros(pool.n)
    for (node, parents), v in last_primal.items():
        if node == i and v > 0:
            for j in NodeSet(parents):
                x[j] += v
    return np.clip(np.delete(x, i), 0.0, 1.0)


@dataclass
class PricingResult:
    node: int
    best_rc: float
    new_columns: list
    dca_calls: int = 0
    trajectories: list = field(default_factory=list)


def node_rng(seed: int, *stream) -> np.random.Generator:
    """Independent generator for one pricing call, keyed by its position in the run."""
    return np.random.default_rng([int(seed), *(int(s) for s in stream)])


def price_node(i: int, scorer: LocalScorer, cfg: PricingConfig, duals: DualSolution,
               clusters: ClusterSet, pool: ColumnPool, last_primal: Optional[dict],
               rng: Optional[np.random.Generator] = None) -> PricingResult:
    """Run DCA on node ``i``'s pricing problem and collect improving columns.

    The pool is only read; callers insert ``new_columns`` afterwards.
    """
    rng = rng if rng is not None else node_rng(cfg.seed, i)
    obj = build_ds(scorer, i, duals, clusters)
    mode = effective_strategy(cfg.strategy, pool.size(i), cfg.hybrid_threshold)
    restarts = 1 if mode == "warm" else cfg.random_restarts

    candidates: dict = {}
    trajectories = []
    for _ in range(restarts):
        x0 = make_initial_point(i, cfg.strategy, pool, last_primal, rng, cfg.hybrid_threshold)
        try:
            res = dca_minimize(obj, x0, cfg.dca)
        except SingularSubmatrix:
            # collinear columns make part of the ground set unusable for this start
            continue
        trajectories.append(res.trajectory)
        for J, z in res.visited:
            candidates.setdefault(int(J), z)
        candidates.setdefault(int(res.best_subset), res.best_value)

    best_rc = np.inf
    new_columns = []
    for J in sorted(candidates):
        try:
            score = scorer.local_score(i, J)
        except SingularSubmatrix:
            continue
        rc = reduced_cost(i, J, duals, clusters, score)
        best_rc = min(best_rc, rc)
        if rc < RC_THRESHOLD and (i, J) not in pool:
            new_columns.append(Column(i, NodeSet(J), score))
    new_columns.sort(key=lambda c: (reduced_cost(i, c.parents, duals, clusters, c.local_score), int(c.parents)))
    return PricingResult(i, float(best_rc), new_columns, restarts, trajectories)

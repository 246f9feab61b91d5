"""Exhaustive reference solvers for small instances."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ClusterSet, Dag, Dataset, DualSolution, NodeSet
from .scoring import LocalScorer, ScoreConfig, SingularSubmatrix


class TooLarge(ValueError):
    pass


@dataclass
class ExactResult:
    dag: Dag
    score: float


def score_table(scorer: LocalScorer) -> np.ndarray:
    """``table[i, J]`` for every mask ``J`` over ``V``; ``-inf`` where ``i`` is in ``J``
    or the score is undefined."""
    n = scorer.n
    table = np.full((n, 1 << n), -np.inf)
    for i in range(n):
        bit = 1 << i
        for J in range(1 << n):
            if J & bit:
                continue
            try:
                table[i, J] = scorer.local_score(i, J)
            except SingularSubmatrix:
                pass
    return table


def exact_bnsl(data: Dataset, cfg: ScoreConfig, max_n: int = 12, scorer: LocalScorer = None) -> ExactResult:
    """Globally optimal DAG by dynamic programming over sink orderings."""
    n = data.n
    if n > max_n:
        raise TooLarge(f"{n} nodes exceeds the exact-solver limit of {max_n}")
    scorer = scorer or LocalScorer(data, cfg)
    table = score_table(scorer)
    full = 1 << n

    # best[i, S] = best score of i with parents inside S, arg[i, S] the parent set
    best = table.copy()
    arg = np.tile(np.arange(full), (n, 1))
    for j in range(n):
        bit = 1 << j
        with_j = np.array([S for S in range(full) if S & bit])
        if with_j.size == 0:
            continue
        better = best[:, with_j ^ bit] > best[:, with_j]
        best[:, with_j] = np.where(better, best[:, with_j ^ bit], best[:, with_j])
        arg[:, with_j] = np.where(better, arg[:, with_j ^ bit], arg[:, with_j])

    total = np.full(full, -np.inf)
    sink = np.full(full, -1)
    total[0] = 0.0
    for S in range(1, full):
        for v in NodeSet(S):
            rest = S & ~(1 << v)
            cand = total[rest] + best[v, rest]
            if cand > total[S]:
                total[S], sink[S] = cand, v

    parents = [0] * n
    S = full - 1
    while S:
        v = int(sink[S])
        rest = S & ~(1 << v)
        parents[v] = int(arg[v, rest])
        S = rest
    dag = Dag(tuple(NodeSet(p) for p in parents))
    return ExactResult(dag, float(total[full - 1]))


@dataclass
class ExactPricing:
    parents: NodeSet
    reduced_cost: float


def exact_pricing(i: int, duals: DualSolution, clusters: ClusterSet, data: Dataset,
                  cfg: ScoreConfig, max_n: int = 20, scorer: LocalScorer = None) -> ExactPricing:
    """Minimum reduced cost over every parent set of ``i`` by enumeration."""
    from .pricing import reduced_cost

    n = data.n
    if n > max_n:
        raise TooLarge(f"{n} nodes exceeds the enumeration limit of {max_n}")
    scorer = scorer or LocalScorer(data, cfg)
    best_J, best_rc = 0, np.inf
    bit = 1 << i
    for J in range(1 << n):
        if J & bit:
            continue
        try:
            score = scorer.local_score(i, J)
        except SingularSubmatrix:
            continue
        rc = reduced_cost(i, J, duals, clusters, score)
        if rc < best_rc:
            best_J, best_rc = J, rc
    return ExactPricing(NodeSet(best_J), float(best_rc))

"""Integer master over the current pools.

Two exact engines are available.  Branch-and-cut solves the master with
cycle clusters added lazily at integer candidates.  For small node counts a
dynamic program over node subsets (best sink first) finds the same
restricted optimum directly, which avoids the weak cluster relaxation on
dense pools.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp
from .master import cluster_rows
from .milp import Cut, MilpLimits, MilpProblem, MilpStatus, NoIncumbent, solve_milp
from .model import ClusterSet, ColumnPool, Dag, NodeSet, decode_dag
from .separation import separate_integer


@dataclass
class RmipResult:
    dag: Dag
    score: float
    clusters_added: list
    status: MilpStatus
    bound: float
    nodes: int

    @property
    def optimal(self) -> bool:
        return self.status is MilpStatus.OPTIMAL


# largest node count handled by the subset program under method="auto"
DP_MAX_NODES = 18
METHODS = ("auto", "branch_and_cut", "subset_dp")


def best_dag_in_pool(pool: ColumnPool) -> tuple:
    """Restricted optimum by dynamic programming over node subsets.

    Returns the chosen columns (one per node) and their total score.
    """
    n = pool.n
    full = 1 << n
    # best[v, S]: best score of v with a pool parent set inside S; arg is its column
    best = np.full((n, full), -np.inf)
    arg = np.full((n, full), -1, dtype=np.int64)
    cols = [pool.columns(v) for v in range(n)]
    for v in range(n):
        for k, c in enumerate(cols[v]):
            J = int(c.parents)
            if c.local_score > best[v, J]:
                best[v, J], arg[v, J] = c.local_score, k
    for b in range(n):
        bit = 1 << b
        lo = np.flatnonzero((np.arange(full) & bit) == 0)
        hi = lo | bit
        better = best[:, lo] > best[:, hi]
        best[:, hi] = np.where(better, best[:, lo], best[:, hi])
        arg[:, hi] = np.where(better, arg[:, lo], arg[:, hi])

    masks = np.arange(full)
    popcount = np.zeros(full, dtype=np.int64)
    for b in range(n):
        popcount += (masks >> b) & 1
    total = np.full(full, -np.inf)
    sink = np.full(full, -1, dtype=np.int64)
    total[0] = 0.0
    for size in range(1, n + 1):
        S = masks[popcount == size]
        for v in range(n):
            has = S[(S >> v) & 1 == 1]
            rest = has ^ (1 << v)
            cand = total[rest] + best[v, rest]
            take = cand > total[has]
            total[has[take]] = cand[take]
            sink[has[take]] = v
    chosen = []
    S = full - 1
    while S:
        v = int(sink[S])
        rest = S ^ (1 << v)
        chosen.append(cols[v][int(arg[v, rest])])
        S = rest
    return chosen, float(total[full - 1])


def solve_rmip(pool: ColumnPool, clusters: ClusterSet,
               limits: Optional[MilpLimits] = None, method: str = "auto") -> RmipResult:
    """Best acyclic choice of one pool column per node.

    Under branch-and-cut, cycle clusters found at integer candidates are
    added to ``clusters``.  ``method="auto"`` uses the subset program up to
    ``DP_MAX_NODES`` nodes and branch-and-cut beyond.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if method == "subset_dp" or (method == "auto" and pool.n <= DP_MAX_NODES):
        chosen, score = best_dag_in_pool(pool)
        dag = decode_dag(chosen, pool.n)
        return RmipResult(dag, score, [], MilpStatus.OPTIMAL, score, 0)
    limits = limits or MilpLimits()
    columns = list(pool)
    n, k = pool.n, len(columns)
    nodes = np.fromiter((c.node for c in columns), dtype=np.uint64, count=k)
    parents = np.fromiter((int(c.parents) for c in columns), dtype=np.uint64, count=k)
    scores = np.fromiter((c.local_score for c in columns), dtype=float, count=k)

    convex = np.zeros((n, k))
    convex[nodes.astype(np.int64), np.arange(k)] = 1.0
    A = np.vstack([convex, cluster_rows(nodes, parents, clusters)])
    senses = ["="] * n + ["<="] * len(clusters)
    b = np.concatenate([np.ones(n), [len(C) - 1.0 for C in clusters]])
    prog = lp.LinearProgram(scores, A, senses, b, np.zeros(k), np.ones(k), maximize=True)

    added: list = []

    def selection(x):
        chosen = [0] * n
        for j in np.flatnonzero(x > 0.5):
            chosen[columns[j].node] = int(columns[j].parents)
        return chosen

    def lazy(x):
        cuts = []
        for C in separate_integer(selection(x)):
            row = cluster_rows(nodes, parents, [C])[0]
            cuts.append(Cut(row, "<=", len(C) - 1.0))
            if clusters.add(C):
                added.append(C)
        return cuts

    # the all-empty assignment is always feasible
    start = np.zeros(k)
    for j, col in enumerate(columns):
        if int(col.parents) == 0:
            start[j] = 1.0
    try:
        res = solve_milp(MilpProblem(prog, range(k)), lazy, limits, incumbent=start)
    except NoIncumbent as exc:
        raise AssertionError("integer master lost the empty-graph incumbent") from exc
    if res.x is None:
        raise AssertionError("integer master reported no feasible selection")
    chosen = [columns[j] for j in np.flatnonzero(res.x > 0.5)]
    dag = decode_dag(chosen, n)
    score = float(sum(c.local_score for c in chosen))
    return RmipResult(dag, score, added, res.status, res.bound, res.nodes)

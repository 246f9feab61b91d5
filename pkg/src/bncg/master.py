"""Restricted master LP over the generated columns and cluster rows.

    max  sum score_i(J) x_{i<-J}
    s.t. sum_J x_{i<-J} = 1                                  for every node i
         sum_{i in C} sum_{J meets C} x_{i<-J} <= |C| - 1     for every stored cluster C
         x >= 0

The bound x <= 1 follows from the convexity rows and is left implicit: an
explicit bound lets a column sit nonbasic at 1 with a positive LP reduced
cost, which would make pricing rediscover columns already in the pool.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp
from .model import ClusterSet, Column, ColumnPool, DualSolution, NodeSet


class LpFailure(RuntimeError):
    pass


def column_coefficient(J, i: int, C) -> int:
    """Entry of column ``x_{i<-J}`` in the row of cluster ``C``."""
    J, C = int(J), int(C)
    return int((C >> i) & 1 == 1 and (J & C) != 0)


def cluster_rows(nodes: np.ndarray, parents: np.ndarray, clusters) -> np.ndarray:
    """Cluster-row coefficients for columns given as node and parent-mask arrays."""
    rows = np.zeros((len(clusters), nodes.size))
    for r, C in enumerate(clusters):
        c = np.uint64(int(C))
        member = ((c >> nodes) & np.uint64(1)).astype(bool)
        meets = (parents & c) != 0
        rows[r] = member & meets
    return rows


@dataclass
class RmlpState:
    columns: list
    column_index: dict
    cluster_index: dict
    solution: lp.LpSolution
    duals: DualSolution
    primal: np.ndarray = field(repr=False)

    @property
    def objective(self) -> float:
        return self.solution.objective

    def primal_by_column(self, tol: float = 0.0) -> dict:
        """``{(node, parents_mask): value}`` for columns with value above ``tol``."""
        return {
            col.key: float(v) for col, v in zip(self.columns, self.primal) if v > tol
        }


def build_and_solve_rmlp(pool: ColumnPool, clusters: ClusterSet,
                         basis: Optional[lp.Basis] = None) -> RmlpState:
    columns = list(pool)
    n = pool.n
    k = len(columns)
    nodes = np.fromiter((c.node for c in columns), dtype=np.uint64, count=k)
    parents = np.fromiter((int(c.parents) for c in columns), dtype=np.uint64, count=k)
    scores = np.fromiter((c.local_score for c in columns), dtype=float, count=k)

    convex = np.zeros((n, k))
    convex[nodes.astype(np.int64), np.arange(k)] = 1.0
    A = np.vstack([convex, cluster_rows(nodes, parents, clusters)])
    senses = ["="] * n + ["<="] * len(clusters)
    b = np.concatenate([np.ones(n), [len(C) - 1.0 for C in clusters]])
    prog = lp.LinearProgram(scores, A, senses, b, np.zeros(k), None, maximize=True)
    sol = lp.solve(prog, basis=basis)
    if sol.status is lp.LpStatus.INFEASIBLE:
        raise AssertionError("restricted master LP is infeasible although the empty graph is feasible")
    if not sol.optimal:
        raise LpFailure(f"restricted master LP returned {sol.status.value}")
    duals = DualSolution(sol.duals[:n], sol.duals[n:])
    return RmlpState(
        columns=columns,
        column_index={c.key: j for j, c in enumerate(columns)},
        cluster_index={int(C): r for r, C in enumerate(clusters)},
        solution=sol,
        duals=duals,
        primal=np.clip(sol.x, 0.0, 1.0),
    )


class RestrictedMaster:
    """Re-solves the RMLP as columns and clusters are appended, warm-starting
    each solve from the previous basis."""

    def __init__(self, pool: ColumnPool, clusters: ClusterSet):
        self.pool = pool
        self.clusters = clusters
        self.state: Optional[RmlpState] = None
        self.solves = 0

    def solve(self) -> RmlpState:
        basis = self.state.solution.basis if self.state is not None else None
        self.state = build_and_solve_rmlp(self.pool, self.clusters, basis)
        self.solves += 1
        return self.state

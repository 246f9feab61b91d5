"""Cluster-constraint separation for integer and fractional master solutions."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import lp
from .milp import MilpLimits, MilpProblem, MilpStatus, solve_milp
from .model import ColumnPool, NodeSet

# a cluster counts as violated only above this margin
VIOLATION_TOL = 1e-6


def _strongly_connected(parents: Sequence[int]) -> list:
    """Tarjan's algorithm on the graph with edges ``j -> i`` for ``j`` in ``parents[i]``."""
    n = len(parents)
    children = [[] for _ in range(n)]
    for i, p in enumerate(parents):
        for j in NodeSet(p):
            children[j].append(i)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack, comps = [], []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            if k < len(children[v]):
                work[-1] = (v, k + 1)
                w = children[v][k]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def _shortest_cycle(parents: Sequence[int], comp: list) -> list:
    """Shortest directed cycle through the smallest node of a strongly connected set."""
    inside = set(comp)
    start = comp[0]
    children = {v: [] for v in comp}
    for i in comp:
        for j in NodeSet(parents[i]):
            if j in inside:
                children[j].append(i)
    prev = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in sorted(children[v]):
            if w == start:
                path = [v]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            if w not in prev:
                prev[w] = v
                queue.append(w)
    raise AssertionError("strongly connected component without a cycle")


def separate_integer(parents: Sequence) -> list:
    """One cycle cluster per strongly connected component with two or more nodes.

    ``parents[i]`` is node ``i``'s parent set; an empty list means acyclic.
    """
    parents = [int(p) for p in parents]
    out = []
    for comp in _strongly_connected(parents):
        if len(comp) >= 2:
            out.append(NodeSet(_shortest_cycle(parents, comp)))
    out.sort(key=lambda c: (min(c), int(c)))
    return out


@dataclass(frozen=True)
class SeparationResult:
    cluster: NodeSet
    violation: float


def cluster_lhs(primal: dict, C) -> float:
    """``sum_{i in C} sum_{J meets C} x_{i<-J}``."""
    C = int(C)
    return float(sum(v for (i, J), v in primal.items() if (C >> i) & 1 and int(J) & C))


# largest node count for which separation enumerates every cluster under "auto"
ENUM_MAX_NODES = 16
METHODS = ("auto", "enumerate", "milp")


def _popcount(masks: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(masks.shape, dtype=np.int64)
    for b in range(n):
        out += (masks >> b) & 1
    return out


def _separate_by_enumeration(items: list, n: int) -> Optional[NodeSet]:
    masks = np.arange(1 << n, dtype=np.int64)
    lhs = np.zeros(masks.shape)
    for i, J, v in items:
        lhs += v * (((masks >> i) & 1).astype(bool) & ((masks & J) != 0))
    size = _popcount(masks, n)
    violation = np.where(size >= 2, lhs - (size - 1), -np.inf)
    best = int(np.argmax(violation))  # ties go to the smallest mask
    if violation[best] <= VIOLATION_TOL:
        return None
    return NodeSet(best)


def _separate_by_milp(items: list, n: int) -> Optional[NodeSet]:
    k = len(items)
    # variables: y_0..y_{k-1}, then z_0..z_{n-1}
    c = np.concatenate([[v for _, _, v in items], -np.ones(n)])
    rows, senses, rhs = [], [], []
    for t, (i, J, _) in enumerate(items):
        row = np.zeros(k + n)
        row[t], row[k + i] = 1.0, -1.0
        rows.append(row)
        senses.append("<=")
        rhs.append(0.0)
        row = np.zeros(k + n)
        row[t] = 1.0
        for j in NodeSet(J):
            row[k + j] = -1.0
        rows.append(row)
        senses.append("<=")
        rhs.append(0.0)
    row = np.zeros(k + n)
    row[k:] = 1.0
    rows.append(row)
    senses.append(">=")
    rhs.append(2.0)
    prog = lp.LinearProgram(c, np.array(rows), senses, rhs, np.zeros(k + n), np.ones(k + n), maximize=True)
    # for binary z the best y is min(1, z_i, sum z_J), already integral,
    # so only the cluster indicators need branching
    res = solve_milp(MilpProblem(prog, range(k, k + n)), limits=MilpLimits(nodes=None, cutoff=-1.0 + VIOLATION_TOL))
    if res.status is not MilpStatus.OPTIMAL:
        return None
    z = np.round(res.x[k:]).astype(int)
    return NodeSet(int(j) for j in np.flatnonzero(z))


def separate_fractional(primal: dict, pool: ColumnPool, method: str = "auto") -> Optional[SeparationResult]:
    """Most violated cluster constraint for an RMLP primal, or None.

    ``primal`` maps ``(node, parents_mask)`` to values; columns at zero or on
    the empty parent set never enter a cluster row and are dropped.  Both
    methods are exact: ``"enumerate"`` scores every node subset at once,
    ``"milp"`` solves the separation integer program.  ``"auto"`` enumerates
    up to ``ENUM_MAX_NODES`` nodes.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    n = pool.n
    items = [(i, int(J), float(v)) for (i, J), v in primal.items() if v > 1e-9 and int(J)]
    if not items:
        return None
    if method == "enumerate" or (method == "auto" and n <= ENUM_MAX_NODES):
        cluster = _separate_by_enumeration(items, n)
    else:
        cluster = _separate_by_milp(items, n)
    if cluster is None:
        return None
    violation = cluster_lhs(primal, cluster) - (len(cluster) - 1)
    if violation <= VIOLATION_TOL:
        return None
    return SeparationResult(cluster, violation)

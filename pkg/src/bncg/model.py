"""Core domain types: datasets, node subsets, columns, clusters, graphs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

MAX_NODES = 64


class CycleDetected(ValueError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("parent assignment contains the cycle " + " -> ".join(map(str, self.cycle)))


class MissingNode(ValueError):
    pass


class NodeSet(int):
    """A subset of ``{0, ..., 63}`` stored as a bitmask.

    The integer value is the canonical encoding, so a ``NodeSet`` hashes and
    compares like its mask and can key any cache directly.  Iteration is in
    ascending node order.
    """

    __slots__ = ()

    def __new__(cls, members: Iterable[int] | int = ()):
        if isinstance(members, int):
            mask = int(members)
        else:
            mask = 0
            for v in members:
                v = int(v)
                if not 0 <= v < MAX_NODES:
                    raise ValueError(f"node index {v} outside [0, {MAX_NODES})")
                mask |= 1 << v
        if mask < 0 or mask >> MAX_NODES:
            raise ValueError(f"mask {mask} does not fit in {MAX_NODES} bits")
        return super().__new__(cls, mask)

    def __iter__(self) -> Iterator[int]:
        mask = int(self)
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def __len__(self) -> int:
        return int(self).bit_count()

    def __contains__(self, v) -> bool:
        return v >= 0 and (int(self) >> v) & 1 == 1

    def __or__(self, other):
        return NodeSet(int(self) | int(other))

    def __and__(self, other):
        return NodeSet(int(self) & int(other))

    def __sub__(self, other):
        return NodeSet(int(self) & ~int(other))

    __ror__ = __or__
    __rand__ = __and__

    def add(self, v: int) -> "NodeSet":
        return NodeSet(int(self) | (1 << v))

    def remove(self, v: int) -> "NodeSet":
        return NodeSet(int(self) & ~(1 << v))

    def issubset(self, other) -> bool:
        return int(self) & ~int(other) == 0

    def isdisjoint(self, other) -> bool:
        return int(self) & int(other) == 0

    def __repr__(self) -> str:
        return "NodeSet({" + ", ".join(map(str, self)) + "})"

    __str__ = __repr__


EMPTY = NodeSet(0)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observation matrix with per-column metadata.

    ``arities`` is ``None`` for continuous data; otherwise it holds one arity
    per column and every entry is an integer code in ``[0, arity)``.
    """

    values: np.ndarray
    columns: tuple = ()
    arities: Optional[tuple] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("data must be a 2-D matrix")
        N, n = values.shape
        if N < 2 or n < 2:
            raise ValueError(f"need at least 2 rows and 2 columns, got {N}x{n}")
        if n > MAX_NODES:
            raise ValueError(f"at most {MAX_NODES} variables are supported, got {n}")
        if not np.all(np.isfinite(values)):
            raise ValueError("data contains NaN or infinite entries")
        columns = tuple(self.columns) if self.columns else tuple(f"X{j}" for j in range(n))
        if len(columns) != n:
            raise ValueError("one column name per variable is required")
        arities = self.arities
        if arities is not None:
            arities = tuple(int(a) for a in arities)
            if len(arities) != n or any(a < 2 for a in arities):
                raise ValueError("discrete data needs an arity >= 2 per column")
            if np.any(values != np.round(values)):
                raise ValueError("discrete columns must hold integer codes")
            if np.any(values < 0) or np.any(values >= np.array(arities)):
                raise ValueError("discrete codes must lie in [0, arity)")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "arities", arities)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def is_discrete(self) -> bool:
        return self.arities is not None

    @property
    def kinds(self) -> tuple:
        if self.arities is None:
            return ("continuous",) * self.n
        return tuple(("discrete", a) for a in self.arities)


@dataclass(frozen=True)
class Column:
    """Parent set ``parents`` chosen for ``node``, with its local score."""

    node: int
    parents: NodeSet
    local_score: float

    def __post_init__(self):
        if not isinstance(self.parents, NodeSet):
            object.__setattr__(self, "parents", NodeSet(self.parents))
        if self.node in self.parents:
            raise ValueError(f"node {self.node} cannot be its own parent")
        if not math.isfinite(self.local_score):
            raise ValueError("local score must be finite")

    @property
    def key(self) -> tuple:
        return (self.node, int(self.parents))


class ColumnPool:
    """Per-node candidate parent sets, each node seeded with the empty set.

    Columns are also kept in global insertion order; the master LP uses that
    order for its variables so appending never renumbers existing ones.
    """

    def __init__(self, empty_scores: Sequence[float]):
        self.n = len(empty_scores)
        self._by_node: list[list[Column]] = [[] for _ in range(self.n)]
        self._keys: dict[tuple, Column] = {}
        self._order: list[Column] = []
        for i, s in enumerate(empty_scores):
            self.add(Column(i, EMPTY, float(s)))

    def add(self, column: Column) -> bool:
        if not 0 <= column.node < self.n:
            raise ValueError(f"node {column.node} outside the pool")
        if column.key in self._keys:
            return False
        self._keys[column.key] = column
        self._by_node[column.node].append(column)
        self._order.append(column)
        return True

    def __contains__(self, key) -> bool:
        if isinstance(key, Column):
            key = key.key
        node, parents = key
        return (node, int(parents)) in self._keys

    def get(self, node: int, parents) -> Optional[Column]:
        return self._keys.get((node, int(parents)))

    def columns(self, node: int) -> list:
        return list(self._by_node[node])

    def size(self, node: int) -> int:
        return len(self._by_node[node])

    def __iter__(self) -> Iterator[Column]:
        return iter(self._order)

    def __len__(self) -> int:
        return len(self._order)


class ClusterSet:
    """Ordered, de-duplicated cluster node sets (each of size >= 2)."""

    def __init__(self, clusters: Iterable = ()):
        self._items: list[NodeSet] = []
        self._seen: set[int] = set()
        for c in clusters:
            self.add(c)

    def add(self, cluster) -> bool:
        cluster = cluster if isinstance(cluster, NodeSet) else NodeSet(cluster)
        if len(cluster) < 2:
            raise ValueError("clusters of size < 2 are vacuous")
        if int(cluster) in self._seen:
            return False
        self._seen.add(int(cluster))
        self._items.append(cluster)
        return True

    def __contains__(self, cluster) -> bool:
        return int(cluster if isinstance(cluster, int) else NodeSet(cluster)) in self._seen

    def __iter__(self) -> Iterator[NodeSet]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, k) -> NodeSet:
        return self._items[k]


@dataclass(frozen=True, eq=False)
class DualSolution:
    node_duals: np.ndarray
    cluster_duals: np.ndarray

    def __post_init__(self):
        node = np.asarray(self.node_duals, dtype=float).ravel()
        clus = np.asarray(self.cluster_duals, dtype=float).ravel()
        if np.any(clus < -1e-7):
            raise ValueError("cluster duals must be nonnegative")
        object.__setattr__(self, "node_duals", node)
        object.__setattr__(self, "cluster_duals", np.maximum(clus, 0.0))

    @classmethod
    def zeros(cls, n: int, n_clusters: int = 0) -> "DualSolution":
        return cls(np.zeros(n), np.zeros(n_clusters))


def find_cycle(parents: Sequence) -> Optional[list]:
    """Return one directed cycle (as a node list) of a parent assignment, or None."""
    n = len(parents)
    color = [0] * n  # 0 new, 1 on stack, 2 done
    for root in range(n):
        if color[root]:
            continue
        # walk child -> parent; a cycle in that direction is a cycle reversed
        stack = [(root, iter(NodeSet(parents[root])))]
        path = [root]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[v] = 2
                stack.pop()
                path.pop()
                continue
            if nxt >= n:
                raise MissingNode(f"parent {nxt} of node {v} is not a node")
            if color[nxt] == 1:
                cyc = path[path.index(nxt):]
                cyc.reverse()
                k = cyc.index(min(cyc))
                return cyc[k:] + cyc[:k]
            if color[nxt] == 0:
                color[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(NodeSet(parents[nxt]))))
    return None


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph stored as one parent set per node.

    Equality is parent-set equality.
    """

    parents: tuple

    def __post_init__(self):
        parents = tuple(p if isinstance(p, NodeSet) else NodeSet(p) for p in self.parents)
        for i, p in enumerate(parents):
            if i in p:
                raise CycleDetected([i])
        cycle = find_cycle(parents)
        if cycle is not None:
            raise CycleDetected(cycle)
        object.__setattr__(self, "parents", parents)

    @classmethod
    def empty(cls, n: int) -> "Dag":
        return cls((EMPTY,) * n)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable) -> "Dag":
        pa = [0] * n
        for u, v in edges:
            pa[v] |= 1 << u
        return cls(tuple(NodeSet(p) for p in pa))

    @classmethod
    def from_adjacency(cls, adj) -> "Dag":
        adj = np.asarray(adj) != 0
        n = adj.shape[0]
        return cls.from_edges(n, zip(*np.nonzero(adj)))

    @property
    def n(self) -> int:
        return len(self.parents)

    def edges(self) -> list:
        return sorted((u, v) for v, p in enumerate(self.parents) for u in p)

    @property
    def n_edges(self) -> int:
        return sum(len(p) for p in self.parents)

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges():
            adj[u, v] = True
        return adj

    def topological_order(self) -> list:
        indeg = [len(p) for p in self.parents]
        children = [[] for _ in range(self.n)]
        for u, v in self.edges():
            children[u].append(v)
        ready = [v for v in range(self.n) if indeg[v] == 0]
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for c in children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        return order


def is_acyclic(graph) -> bool:
    """True iff a topological sort of ``graph`` (a Dag or parent list) succeeds."""
    parents = graph.parents if isinstance(graph, Dag) else graph
    n = len(parents)
    indeg = [len(NodeSet(p)) for p in parents]
    children = [[] for _ in range(n)]
    for v, p in enumerate(parents):
        for u in NodeSet(p):
            children[u].append(v)
    ready = [v for v in range(n) if indeg[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return seen == n


def decode_dag(columns: Sequence[Column], n: Optional[int] = None) -> Dag:
    """Assemble the graph selected by one column per node."""
    if n is None:
        n = max((c.node for c in columns), default=-1) + 1
    parents: list = [None] * n
    for c in columns:
        if not 0 <= c.node < n:
            raise MissingNode(f"column for node {c.node} outside 0..{n - 1}")
        if parents[c.node] is not None:
            raise ValueError(f"more than one column selected for node {c.node}")
        parents[c.node] = c.parents
    missing = [i for i, p in enumerate(parents) if p is None]
    if missing:
        raise MissingNode(f"no column selected for nodes {missing}")
    return Dag(tuple(parents))


UNDIRECTED = "---"
FORWARD = "-->"
BACKWARD = "<--"
NONE = "   "


@dataclass(frozen=True, eq=False)
class Pdag:
    """Partially directed graph.

    ``adj[i, j]`` and ``adj[j, i]`` both set means an undirected edge; only
    ``adj[i, j]`` set means ``i -> j``.
    """

    adj: np.ndarray = field(repr=False)

    def __post_init__(self):
        adj = np.array(self.adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        if np.any(np.diag(adj)):
            raise ValueError("self loops are not allowed")
        adj.setflags(write=False)
        object.__setattr__(self, "adj", adj)

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def mark(self, i: int, j: int) -> str:
        a, b = self.adj[i, j], self.adj[j, i]
        if a and b:
            return UNDIRECTED
        if a:
            return FORWARD
        if b:
            return BACKWARD
        return NONE

    def directed_edges(self) -> list:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.adj & ~self.adj.T))]

    def undirected_edges(self) -> list:
        both = np.triu(self.adj & self.adj.T)
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(both))]

    def skeleton(self) -> np.ndarray:
        return self.adj | self.adj.T

    def __eq__(self, other) -> bool:
        return isinstance(other, Pdag) and np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash(self.adj.tobytes())

    def __repr__(self) -> str:
        return f"Pdag(directed={self.directed_edges()}, undirected={self.undirected_edges()})"

"""Essential graphs (CPDAGs) and structure-recovery metrics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .model import Dag, Pdag


class NodeMismatch(ValueError):
    pass


def _orient_v_structures(adj: np.ndarray, directed: np.ndarray) -> np.ndarray:
    """Undirected skeleton with every collider ``a -> b <- c`` (``a``, ``c`` non-adjacent) kept directed."""
    skel = adj | adj.T
    out = skel.copy()
    n = adj.shape[0]
    for b in range(n):
        pa = np.flatnonzero(directed[:, b])
        for x in range(len(pa)):
            for y in range(x + 1, len(pa)):
                a, c = pa[x], pa[y]
                if not skel[a, c]:
                    out[b, a] = False
                    out[b, c] = False
    return out


def _meek(g: np.ndarray) -> np.ndarray:
    """Apply orientation rules R1-R4 until nothing changes."""
    g = g.copy()
    n = g.shape[0]

    def undirected(a, b):
        return g[a, b] and g[b, a]

    def directed(a, b):
        return g[a, b] and not g[b, a]

    def adjacent(a, b):
        return g[a, b] or g[b, a]

    changed = True
    while changed:
        changed = False
        for a in range(n):
            for b in range(n):
                if not undirected(a, b):
                    continue
                orient = False
                # R1: c -> a - b with c, b non-adjacent
                for c in range(n):
                    if directed(c, a) and not adjacent(c, b):
                        orient = True
                        break
                # R2: a -> c -> b
                if not orient:
                    for c in range(n):
                        if directed(a, c) and directed(c, b):
                            orient = True
                            break
                # R3: a - c -> b and a - d -> b with c, d non-adjacent
                if not orient:
                    cs = [c for c in range(n) if undirected(a, c) and directed(c, b)]
                    for x in range(len(cs)):
                        for y in range(x + 1, len(cs)):
                            if not adjacent(cs[x], cs[y]):
                                orient = True
                # R4: a - d, d -> c -> b, a adjacent to c, d and b non-adjacent
                if not orient:
                    for c in range(n):
                        if not (directed(c, b) and adjacent(a, c)):
                            continue
                        for d in range(n):
                            if undirected(a, d) and directed(d, c) and not adjacent(d, b):
                                orient = True
                                break
                        if orient:
                            break
                if orient:
                    g[b, a] = False
                    changed = True
    return g


def to_essential_graph(graph: Union[Dag, Pdag]) -> Pdag:
    """CPDAG of a DAG's Markov equivalence class.

    A Pdag argument is treated through its directed edges, so applying the
    function to its own output returns the same graph.
    """
    if isinstance(graph, Dag):
        adj = graph.adjacency()
        directed = adj
    elif isinstance(graph, Pdag):
        adj = graph.adj
        directed = graph.adj & ~graph.adj.T
    else:
        raise TypeError("expected a Dag or Pdag")
    return Pdag(_meek(_orient_v_structures(adj, directed)))


@dataclass(frozen=True)
class Comparison:
    precision: float
    recall: float
    shd: int


def _pair_marks(p: Pdag):
    iu, ju = np.triu_indices(p.n, 1)
    a = p.adj[iu, ju].astype(np.int8)
    b = p.adj[ju, iu].astype(np.int8)
    return a + 2 * b  # 0 none, 1 forward, 2 backward, 3 undirected


def shd_pdag(a: Pdag, b: Pdag) -> int:
    if a.n != b.n:
        raise NodeMismatch(f"graphs have {a.n} and {b.n} nodes")
    return int(np.sum(_pair_marks(a) != _pair_marks(b)))


def compare(pred: Dag, truth: Dag) -> Comparison:
    """Precision, recall and SHD between essential graphs.

    A true positive is a node pair adjacent in both graphs with the same mark.
    With no predicted edges precision is 1; with no true edges recall is 1.
    """
    if pred.n != truth.n:
        raise NodeMismatch(f"graphs have {pred.n} and {truth.n} nodes")
    mp = _pair_marks(to_essential_graph(pred))
    mt = _pair_marks(to_essential_graph(truth))
    hits = int(np.sum((mp == mt) & (mp > 0)))
    n_pred, n_true = int(np.sum(mp > 0)), int(np.sum(mt > 0))
    precision = hits / n_pred if n_pred else 1.0
    recall = hits / n_true if n_true else 1.0
    return Comparison(precision, recall, int(np.sum(mp != mt)))

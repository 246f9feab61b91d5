"""Set-function oracles, Lovász extensions and the DS pricing objective.

A set function on a ground set of size ``d`` takes an integer bitmask over
``0..d-1``.  For a point ``x`` in the unit box, sort coordinates descending
(ties by ascending index) into ``sigma`` and let ``S_k`` be the first ``k``
sorted indices; then

    h^L(x) = sum_k (x_sigma(k) - x_sigma(k+1)) h(S_k),  x_sigma(0) = 1, x_sigma(d+1) = 0

and ``y_sigma(k) = h(S_k) - h(S_{k-1})`` is a subgradient at ``x``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .model import ClusterSet, DualSolution, NodeSet
from .scoring import LocalScorer, discrete_penalty_units

BOX_TOL = 1e-9


class OutOfBox(ValueError):
    pass


class SetFunctionOracle:
    """Memoized set function ``mask -> float`` on the ground set ``0..d-1``."""

    def __init__(self, d: int, fn: Callable[[int], float], memo: bool = True):
        self.d = int(d)
        self._fn = fn
        self._memo: Optional[dict] = {} if memo else None

    def __call__(self, mask: int) -> float:
        if self._memo is None:
            return float(self._fn(int(mask)))
        mask = int(mask)
        value = self._memo.get(mask)
        if value is None:
            value = float(self._fn(mask))
            self._memo[mask] = value
        return value

    def chain_values(self, order: Sequence[int]) -> np.ndarray:
        """Values on the nested sets ``S_0 = {}, S_1, ..., S_d`` of ``order``."""
        vals = np.empty(len(order) + 1)
        mask = 0
        vals[0] = self(0)
        for k, j in enumerate(order, start=1):
            mask |= 1 << int(j)
            vals[k] = self(mask)
        return vals


def descending_order(x: np.ndarray) -> np.ndarray:
    # stable sort keeps equal coordinates in ascending index order
    return np.argsort(-np.asarray(x, dtype=float), kind="stable")


def check_box(x, d: Optional[int] = None) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if d is not None and x.size != d:
        raise ValueError(f"point has {x.size} coordinates, expected {d}")
    if np.any(x < -BOX_TOL) or np.any(x > 1 + BOX_TOL) or not np.all(np.isfinite(x)):
        raise OutOfBox("point lies outside the unit box")
    return np.clip(x, 0.0, 1.0)


def chain_weights(xs_sorted: np.ndarray) -> np.ndarray:
    """Weights of ``h(S_0..S_d)`` in the Lovász extension for sorted coordinates."""
    padded = np.concatenate([[1.0], xs_sorted, [0.0]])
    return padded[:-1] - padded[1:]


def lovasz_value(oracle: SetFunctionOracle, x) -> float:
    x = check_box(x, oracle.d)
    order = descending_order(x)
    vals = oracle.chain_values(order)
    return float(chain_weights(x[order]) @ vals)


def lovasz_subgradient(oracle: SetFunctionOracle, x) -> np.ndarray:
    x = check_box(x, oracle.d)
    order = descending_order(x)
    vals = oracle.chain_values(order)
    y = np.empty(oracle.d)
    y[order] = np.diff(vals)
    return y


def indicator(mask: int, d: int) -> np.ndarray:
    return np.array([(int(mask) >> k) & 1 for k in range(d)], dtype=float)


def mask_of(x, threshold: float = 0.5) -> int:
    mask = 0
    for k, v in enumerate(np.asarray(x).ravel()):
        if v > threshold:
            mask |= 1 << k
    return mask


@dataclass
class DsObjective:
    """``z(J) = g(J) - f(J)`` over a ground set re-indexed to ``0..d-1``.

    ``ground[k]`` is the original node of local index ``k``.  ``scale``
    converts ``z`` into master-problem units (reduced cost = scale * z).
    """

    g: SetFunctionOracle
    f: SetFunctionOracle
    ground: tuple
    node: Optional[int] = None
    scale: float = 1.0

    @property
    def d(self) -> int:
        return len(self.ground)

    def value(self, mask: int) -> float:
        return self.g(mask) - self.f(mask)

    def to_global(self, mask: int) -> NodeSet:
        out = 0
        for k, v in enumerate(self.ground):
            if (mask >> k) & 1:
                out |= 1 << v
        return NodeSet(out)

    def to_local(self, nodes) -> int:
        pos = {v: k for k, v in enumerate(self.ground)}
        mask = 0
        for v in NodeSet(nodes):
            mask |= 1 << pos[v]
        return mask

    def lovasz(self, x) -> float:
        return lovasz_value(self.g, x) - lovasz_value(self.f, x)


def _lift(i: int) -> Callable[[int], int]:
    """Map a mask over ``V - {i}`` (re-indexed) to a mask over ``V``."""
    low = (1 << i) - 1

    def lift(mask: int) -> int:
        return (mask & low) | ((mask >> i) << (i + 1))

    return lift


def cluster_term(i: int, duals: DualSolution, clusters: ClusterSet, lift=None):
    """``J -> sum of cluster duals over C with i in C and J meeting C``.

    Returns the function on local masks, built from clusters with positive dual.
    """
    items = []
    for k, C in enumerate(clusters):
        lam = float(duals.cluster_duals[k])
        if lam > 0 and i in C:
            items.append((int(C) & ~(1 << i), lam))
    lift = lift or _lift(i)

    def term(local_mask: int) -> float:
        if not items:
            return 0.0
        J = lift(local_mask)
        return sum(lam for c, lam in items if J & c)

    return term


def _check_duals(scorer: LocalScorer, duals: DualSolution, clusters: ClusterSet) -> None:
    if duals.node_duals.size != scorer.n or duals.cluster_duals.size != len(clusters):
        raise ValueError("dual vector lengths do not match nodes and clusters")


def build_gaussian_ds(scorer: LocalScorer, i: int, duals: DualSolution,
                      clusters: ClusterSet) -> DsObjective:
    """Gaussian pricing objective in the per-sample ``2/N`` rescaled units.

    g(J) = logdet S[J+i] + (2/N)(penalty |J| + cluster duals hit by J + node dual)
    f(J) = logdet S[J]
    """
    if scorer.discrete:
        raise ValueError("Gaussian decomposition needs continuous data")
    _check_duals(scorer, duals, clusters)
    n, N = scorer.n, scorer.N
    unit = 2.0 / N
    lift = _lift(i)
    bit = 1 << i
    logdet = scorer.kernel
    penalty = unit * scorer.cfg.penalty
    node_dual = unit * float(duals.node_duals[i])
    clus = cluster_term(i, duals, clusters, lift)

    def g(mask: int) -> float:
        J = lift(mask)
        return logdet(J | bit) + penalty * mask.bit_count() + unit * clus(mask) + node_dual

    def f(mask: int) -> float:
        return logdet(lift(mask))

    d = n - 1
    ground = tuple(v for v in range(n) if v != i)
    return DsObjective(SetFunctionOracle(d, g), SetFunctionOracle(d, f), ground, i, N / 2.0)


def build_discrete_ds(scorer: LocalScorer, i: int, duals: DualSolution,
                      clusters: ClusterSet) -> DsObjective:
    """Multinomial pricing objective in per-sample ``1/N`` units.

    g(J) = H(J+i) + (cluster duals hit by J + node dual) / N
    f(J) = H(J) - (penalty / N)(a_i - 1) prod_{j in J} a_j
    """
    if not scorer.discrete:
        raise ValueError("entropy decomposition needs discrete data")
    _check_duals(scorer, duals, clusters)
    n, N = scorer.n, scorer.N
    unit = 1.0 / N
    lift = _lift(i)
    bit = 1 << i
    H = scorer.kernel
    arities = scorer.data.arities
    penalty = unit * scorer.cfg.penalty
    node_dual = unit * float(duals.node_duals[i])
    clus = cluster_term(i, duals, clusters, lift)

    def g(mask: int) -> float:
        return H(lift(mask) | bit) + unit * clus(mask) + node_dual

    def f(mask: int) -> float:
        J = lift(mask)
        return H(J) - penalty * discrete_penalty_units(arities, i, J)

    d = n - 1
    ground = tuple(v for v in range(n) if v != i)
    return DsObjective(SetFunctionOracle(d, g), SetFunctionOracle(d, f), ground, i, float(N))


def build_ds(scorer: LocalScorer, i: int, duals: DualSolution, clusters: ClusterSet) -> DsObjective:
    if scorer.discrete:
        return build_discrete_ds(scorer, i, duals, clusters)
    return build_gaussian_ds(scorer, i, duals, clusters)


def is_submodular(h: Callable[[int], float], d: int, tol: float = 1e-9) -> bool:
    """Exhaustive diminishing-returns check over all ``A <= B``, ``v`` not in ``B``."""
    full = (1 << d) - 1
    for B in range(full + 1):
        A = B
        while True:
            for v in range(d):
                if (B >> v) & 1:
                    continue
                bit = 1 << v
                if h(A | bit) - h(A) < h(B | bit) - h(B) - tol:
                    return False
            if A == 0:
                break
            A = (A - 1) & B
    return True

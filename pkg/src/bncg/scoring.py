"""l0-penalized log-likelihood local scores for Gaussian and multinomial data.

Gaussian:   score_i(J) = -(N/2) log(residual variance of X_i on X_J) - penalty * |J|
Discrete:   score_i(J) = N (H(J) - H(J + i)) - penalty * (a_i - 1) * prod_{j in J} a_j

The Gaussian constant ``-(N/2)(1 + log 2 pi)`` per node is left out of all
optimization and only added back for reporting.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import Dag, Dataset, NodeSet

RIDGE_SCALE = 1e-10
DET_FLOOR = 1e-300
# residual variance at or below this multiple of the ridge counts as an exact fit
DEGENERATE_RIDGE_MULTIPLE = 1e3


class SingularSubmatrix(ArithmeticError):
    pass


class NonFinite(ValueError):
    pass


class ScoreOverflow(OverflowError):
    pass


@dataclass(frozen=True)
class ScoreConfig:
    penalty: float
    include_constant: bool = False

    def __post_init__(self):
        if not (self.penalty >= 0 and math.isfinite(self.penalty)):
            raise ValueError(f"penalty must be a finite nonnegative number, got {self.penalty}")

    @classmethod
    def bic(cls, N: int, include_constant: bool = False) -> "ScoreConfig":
        return cls(math.log(N) / 2.0, include_constant)

    @classmethod
    def aic(cls, include_constant: bool = False) -> "ScoreConfig":
        return cls(1.0, include_constant)

    @classmethod
    def from_name(cls, name: str, N: int, penalty: Optional[float] = None,
                  include_constant: bool = False) -> "ScoreConfig":
        if name == "bic":
            return cls.bic(N, include_constant)
        if name == "aic":
            return cls.aic(include_constant)
        if name == "raw":
            if penalty is None:
                raise ValueError("raw score mode needs an explicit penalty")
            return cls(float(penalty), include_constant)
        raise ValueError(f"unknown score {name!r}")


class KernelCache:
    """Memo table from NodeSet masks to kernel values (log det or entropy).

    Reads are lock-free; inserts take a lock, so concurrent workers may
    duplicate an evaluation but never store inconsistent values.
    """

    def __init__(self, fn: Callable[[int], float]):
        self._fn = fn
        self._values: dict = {}
        self._lock = threading.Lock()

    def __call__(self, mask: int) -> float:
        mask = int(mask)
        try:
            return self._values[mask]
        except KeyError:
            pass
        value = self._fn(mask)
        with self._lock:
            return self._values.setdefault(mask, value)

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, mask) -> bool:
        return int(mask) in self._values

    def clear(self) -> None:
        with self._lock:
            self._values.clear()


def _members(mask: int) -> list:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def covariance(data: Dataset) -> np.ndarray:
    """Maximum-likelihood (1/N) covariance of the column-centered data."""
    X = np.asarray(data.values if isinstance(data, Dataset) else data, dtype=float)
    if not np.all(np.isfinite(X)):
        raise NonFinite("data contains NaN or infinite entries")
    Xc = X - X.mean(axis=0)
    S = Xc.T @ Xc / X.shape[0]
    return (S + S.T) / 2.0


def ridge(sigma: np.ndarray) -> float:
    n = sigma.shape[0]
    return RIDGE_SCALE * float(np.trace(sigma)) / n


def log_det_cache(sigma: np.ndarray) -> KernelCache:
    """Cache of ``log det`` over principal submatrices of the ridged ``sigma``."""
    reg = sigma + ridge(sigma) * np.eye(sigma.shape[0])

    def log_det(mask: int) -> float:
        if mask == 0:
            return 0.0
        idx = _members(mask)
        try:
            L = np.linalg.cholesky(reg[np.ix_(idx, idx)])
        except np.linalg.LinAlgError:
            raise SingularSubmatrix(f"covariance submatrix on {idx} is not positive definite")
        value = 2.0 * float(np.sum(np.log(np.diag(L))))
        if not value > math.log(DET_FLOOR):
            raise SingularSubmatrix(f"covariance submatrix on {idx} is numerically singular")
        return value

    return KernelCache(log_det)


def log_det_sigma(cache: KernelCache, S) -> float:
    return cache(int(S))


def entropy_cache(data: Dataset) -> KernelCache:
    """Cache of empirical joint entropies (nats) of discrete column subsets."""
    X = np.asarray(data.values, dtype=np.int64)
    arities = data.arities
    N = X.shape[0]

    def entropy(mask: int) -> float:
        if mask == 0:
            return 0.0
        idx = _members(mask)
        radix = 1
        for j in idx:
            radix *= arities[j]
        if radix < 2 ** 62:
            codes = np.zeros(N, dtype=np.int64)
            for j in idx:
                codes = codes * arities[j] + X[:, j]
            _, counts = np.unique(codes, return_counts=True)
        else:
            _, counts = np.unique(X[:, idx], axis=0, return_counts=True)
        p = counts / N
        return float(-np.sum(p * np.log(p)))

    return KernelCache(entropy)


def joint_entropy(cache: KernelCache, S) -> float:
    return cache(int(S))


def discrete_penalty_units(arities, i: int, J) -> float:
    """``(a_i - 1) * prod_{j in J} a_j`` as a float, or ScoreOverflow."""
    count = arities[i] - 1
    for j in NodeSet(J):
        count *= arities[j]
    try:
        return float(count)
    except OverflowError:
        raise ScoreOverflow(f"parameter count for node {i} with {len(NodeSet(J))} parents overflows")


class LocalScorer:
    """Local scores of one dataset under one score configuration.

    Holds the memoized kernel (log det or entropy) shared with the pricing
    oracles, so each subset is factored or counted once per run.
    """

    def __init__(self, data: Dataset, cfg: ScoreConfig):
        self.data = data
        self.cfg = cfg
        self.N = data.N
        self.n = data.n
        self.discrete = data.is_discrete
        if self.discrete:
            self.kernel = entropy_cache(data)
            self.sigma = None
        else:
            self.sigma = covariance(data)
            self.ridge = ridge(self.sigma)
            self.kernel = log_det_cache(self.sigma)
            self._degenerate_log = (math.log(DEGENERATE_RIDGE_MULTIPLE * self.ridge)
                                    if self.ridge > 0 else -math.inf)

    def local_score(self, i: int, J) -> float:
        J = int(J)
        if (J >> i) & 1:
            raise ValueError(f"node {i} cannot be in its own parent set")
        if self.discrete:
            return self._discrete(i, J)
        return self._gaussian(i, J)

    def _gaussian(self, i: int, J: int) -> float:
        log_var = self.kernel(J | (1 << i)) - self.kernel(J)
        if log_var <= self._degenerate_log:
            raise SingularSubmatrix(f"node {i} is an exact linear function of {NodeSet(J)}")
        return -0.5 * self.N * log_var - self.cfg.penalty * J.bit_count()

    def _discrete(self, i: int, J: int) -> float:
        loglik = self.N * (self.kernel(J) - self.kernel(J | (1 << i)))
        return loglik - self.cfg.penalty * discrete_penalty_units(self.data.arities, i, J)

    def constant(self) -> float:
        """Per-node Gaussian constant ``-(N/2)(1 + log 2 pi)``; zero for discrete data."""
        if self.discrete:
            return 0.0
        return -0.5 * self.N * (1.0 + math.log(2.0 * math.pi))

    def graph_score(self, dag: Dag) -> float:
        """Sum of local scores, without the Gaussian constant."""
        return float(sum(self.local_score(i, p) for i, p in enumerate(dag.parents)))

    def reported_score(self, dag: Dag) -> float:
        score = self.graph_score(dag)
        if self.cfg.include_constant:
            score += self.n * self.constant()
        return score


def gaussian_local_score(data: Dataset, cfg: ScoreConfig, i: int, J,
                         scorer: Optional[LocalScorer] = None) -> float:
    if data.is_discrete:
        raise ValueError("Gaussian score needs continuous data")
    scorer = scorer or LocalScorer(data, cfg)
    score = scorer.local_score(i, J)
    if cfg.include_constant:
        score += scorer.constant()
    return score


def discrete_local_score(data: Dataset, cfg: ScoreConfig, i: int, J,
                         scorer: Optional[LocalScorer] = None) -> float:
    if not data.is_discrete:
        raise ValueError("multinomial score needs discrete data")
    scorer = scorer or LocalScorer(data, cfg)
    return scorer.local_score(i, J)

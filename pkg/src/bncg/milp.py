"""Best-bound branch-and-bound for mixed-binary programs over the simplex in ``lp``.

Integral relaxation solutions are handed to an optional lazy callback, which
either accepts the point or returns linear cuts it violates.  Cuts are
global: they are appended to every LP solved afterwards.
"""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from . import lp

INT_TOL = 1e-6
CUT_TOL = 1e-6


class NoIncumbent(RuntimeError):
    """A limit was reached before any feasible integer point was found."""


class MilpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    # no feasible point beats the requested cutoff
    CUTOFF = "cutoff"
    NODE_LIMIT = "node_limit"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class Cut:
    """``coeffs . x (sense) rhs`` over the problem's variables."""

    coeffs: np.ndarray
    sense: str
    rhs: float

    def violation(self, x: np.ndarray) -> float:
        lhs = float(np.dot(self.coeffs, x))
        if self.sense == "<=":
            return lhs - self.rhs
        if self.sense == ">=":
            return self.rhs - lhs
        return abs(lhs - self.rhs)


# Returns None or an empty list to accept the candidate, otherwise violated cuts.
LazyCallback = Callable[[np.ndarray], Optional[Sequence[Cut]]]


@dataclass
class MilpProblem:
    lp: lp.LinearProgram
    binaries: Sequence[int]

    def __post_init__(self):
        self.binaries = np.asarray(sorted(set(int(j) for j in self.binaries)), dtype=int)
        if self.binaries.size and (self.binaries[0] < 0 or self.binaries[-1] >= self.lp.n_vars):
            raise ValueError("binary index outside the variable range")
        lo = self.lp.lower[self.binaries]
        hi = self.lp.upper[self.binaries]
        if np.any(lo < 0) or np.any(hi > 1) or np.any(lo > hi):
            raise ValueError("binary variables need bounds inside [0, 1]")


@dataclass(frozen=True)
class MilpLimits:
    nodes: Optional[int] = 100_000
    time: Optional[float] = None
    # only points strictly better than this objective are of interest
    cutoff: Optional[float] = None


@dataclass
class MilpResult:
    status: MilpStatus
    x: Optional[np.ndarray]
    objective: float
    bound: float
    nodes: int
    cuts: list = field(default_factory=list)

    @property
    def has_incumbent(self) -> bool:
        return self.x is not None


@dataclass(order=True)
class _Node:
    key: float
    seq: int
    lower: np.ndarray = field(compare=False)
    upper: np.ndarray = field(compare=False)
    basis: Optional[lp.Basis] = field(compare=False, default=None)


def _satisfies(problem: MilpProblem, cuts: list, x: np.ndarray, tol: float = 1e-7) -> bool:
    base = problem.lp
    if np.any(x < base.lower - tol) or np.any(x > base.upper + tol):
        return False
    xb = x[problem.binaries]
    if np.any(np.abs(xb - np.round(xb)) > INT_TOL):
        return False
    lhs = base.A @ x
    for a, s, b in zip(lhs, base.senses, base.b):
        if (s == "<=" and a > b + tol) or (s == ">=" and a < b - tol) or (s == "=" and abs(a - b) > tol):
            return False
    return all(c.violation(x) <= tol for c in cuts)


def solve_milp(problem: MilpProblem, callback: Optional[LazyCallback] = None,
               limits: Optional[MilpLimits] = None,
               incumbent: Optional[np.ndarray] = None) -> MilpResult:
    """Solve ``problem`` to optimality or until a limit is hit.

    ``incumbent`` optionally seeds the search with a known feasible point;
    it is checked against the rows and the callback and ignored otherwise.
    """
    limits = limits or MilpLimits()
    base = problem.lp
    sign = 1.0 if base.maximize else -1.0  # internal "larger is better"
    bins = problem.binaries
    start = time.monotonic()
    cuts: list[Cut] = []

    best_x: Optional[np.ndarray] = None
    best_val = -np.inf  # in internal sense
    cutoff = -np.inf if limits.cutoff is None else sign * float(limits.cutoff)

    def gap_tol(v):
        return 1e-9 * (1.0 + abs(v))

    def threshold():
        return max(best_val, cutoff)

    def check_lazy(x):
        if callback is None:
            return []
        new = list(callback(x.copy()) or [])
        for c in new:
            if c.violation(x) <= CUT_TOL:
                raise ValueError("lazy callback returned a cut the candidate does not violate")
        return new

    if incumbent is not None:
        x0 = np.asarray(incumbent, dtype=float).copy()
        x0[bins] = np.round(x0[bins])
        if _satisfies(problem, cuts, x0) and not check_lazy(x0):
            best_x, best_val = x0, sign * float(base.c @ x0)

    seq = itertools.count()
    heap = [_Node(-np.inf, next(seq), base.lower.copy(), base.upper.copy())]
    nodes = 0
    status = None

    def current_lp(lower, upper):
        prog = base.with_bounds(lower, upper)
        if cuts:
            prog = prog.with_rows(np.array([c.coeffs for c in cuts]),
                                  [c.sense for c in cuts], [c.rhs for c in cuts])
        return prog

    while heap:
        if limits.nodes is not None and nodes >= limits.nodes:
            status = MilpStatus.NODE_LIMIT
            break
        if limits.time is not None and time.monotonic() - start > limits.time:
            status = MilpStatus.TIME_LIMIT
            break
        node = heapq.heappop(heap)
        if -node.key <= threshold() + gap_tol(threshold()):
            continue
        nodes += 1
        basis = node.basis
        while True:
            sol = lp.solve(current_lp(node.lower, node.upper), basis=basis)
            if sol.status is lp.LpStatus.INFEASIBLE:
                break
            if sol.status is lp.LpStatus.UNBOUNDED:
                raise ValueError("relaxation is unbounded; bound the continuous variables")
            val = sign * sol.objective
            if val <= threshold() + gap_tol(threshold()):
                break
            x = sol.x
            frac = np.abs(x[bins] - np.round(x[bins]))
            if bins.size == 0 or frac.max() <= INT_TOL:
                cand = x.copy()
                cand[bins] = np.round(cand[bins])
                new = check_lazy(cand)
                if new:
                    cuts.extend(new)
                    basis = sol.basis
                    continue
                best_x, best_val = cand, sign * float(base.c @ cand)
                break
            # most fractional binary, lowest index on ties
            dist = np.minimum(frac, 1.0 - frac)
            j = int(bins[int(np.argmax(dist))])
            for lo_j, hi_j in ((0.0, np.floor(x[j])), (np.ceil(x[j]), 1.0)):
                lower, upper = node.lower.copy(), node.upper.copy()
                lower[j], upper[j] = max(lower[j], lo_j), min(upper[j], hi_j)
                if lower[j] <= upper[j]:
                    heapq.heappush(heap, _Node(-val, next(seq), lower, upper, sol.basis))
            break

    if status is None:
        if best_x is None:
            st = MilpStatus.INFEASIBLE if limits.cutoff is None else MilpStatus.CUTOFF
            return MilpResult(st, None, np.nan, np.nan, nodes, cuts)
        obj = sign * best_val
        return MilpResult(MilpStatus.OPTIMAL, best_x, obj, obj, nodes, cuts)

    if best_x is None:
        raise NoIncumbent(f"{status.value} reached after {nodes} nodes without a feasible point")
    open_bound = max([-n.key for n in heap] + [best_val])
    return MilpResult(status, best_x, sign * best_val, sign * open_bound, nodes, cuts)

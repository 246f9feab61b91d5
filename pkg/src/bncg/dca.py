"""Difference-of-convex minimization of DS set functions over the unit box.

Each outer step linearizes ``f^L`` at the current point and minimizes the
convex surrogate ``g^L(x) - <y, x>`` with Kelley's cutting-plane method.
Because ``g - y`` is submodular, its Lovász extension is minimized at a
vertex, and any box point can be rounded to its best level set without
increasing the surrogate; every iterate after the start is therefore the
indicator of a subset and its extension value is a true set-function value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp
from .submodular import (
    DsObjective,
    SetFunctionOracle,
    chain_weights,
    check_box,
    descending_order,
)


@dataclass(frozen=True)
class DcaConfig:
    epsilon: float = 1e-6
    max_outer_iters: int = 50
    kelley_tolerance: float = 1e-6
    kelley_max_cuts: int = 200

    def __post_init__(self):
        if not self.epsilon > 0 or not self.kelley_tolerance > 0:
            raise ValueError("tolerances must be positive")
        if self.max_outer_iters < 1 or self.kelley_max_cuts < 1:
            raise ValueError("iteration caps must be at least 1")


@dataclass
class KelleyResult:
    x: np.ndarray
    value: float
    lower_bound: float
    cuts: int
    converged: bool
    lp_bounds: list = field(default_factory=list)


def _chain(oracle: SetFunctionOracle, x: np.ndarray):
    order = descending_order(x)
    vals = oracle.chain_values(order)
    return order, vals


def kelley_minimize(g: SetFunctionOracle, y, cfg: DcaConfig = DcaConfig(),
                    start=None) -> KelleyResult:
    """Minimize ``g^L(x) - <y, x>`` over the unit box.

    Cuts ``t >= g(0) + <s_j, x>`` come from greedy subgradients ``s_j`` at the
    LP points.  The returned ``x`` is the indicator of the best level set seen;
    its value is within ``kelley_tolerance`` of the LP lower bound unless the
    cut limit is reached.
    """
    d = g.d
    y = np.asarray(y, dtype=float).ravel()
    if y.size != d:
        raise ValueError("linear term has the wrong dimension")
    g0 = g(0)
    x = np.zeros(d) if start is None else check_box(start, d)

    best_val = np.inf
    best_mask = 0
    cuts = []
    lower = -np.inf
    lp_bounds = []
    basis = None
    # variables: x_0..x_{d-1} in [0, 1], t free
    c = np.concatenate([-y, [1.0]])
    lo = np.concatenate([np.zeros(d), [-np.inf]])
    hi = np.concatenate([np.ones(d), [np.inf]])
    converged = False
    for _ in range(cfg.kelley_max_cuts):
        order, vals = _chain(g, x)
        s = np.empty(d)
        s[order] = np.diff(vals)
        # surrogate values of the level sets S_0..S_d of x
        level = vals - np.concatenate([[0.0], np.cumsum(y[order])])
        k = int(np.argmin(level))
        if level[k] < best_val - 1e-15:
            best_val = float(level[k])
            best_mask = 0
            for j in order[:k]:
                best_mask |= 1 << int(j)
        cuts.append(s)
        if best_val - lower <= cfg.kelley_tolerance:
            converged = True
            break
        A = np.hstack([np.array(cuts), -np.ones((len(cuts), 1))])
        prog = lp.LinearProgram(c, A, ["<="] * len(cuts), np.full(len(cuts), -g0), lo, hi)
        sol = lp.solve(prog, basis=basis)
        if not sol.optimal:
            raise lp.NumericalBreakdown(f"Kelley subproblem returned {sol.status.value}")
        basis = sol.basis
        lower = max(lower, sol.objective)
        lp_bounds.append(sol.objective)
        x = np.clip(sol.x[:d], 0.0, 1.0)
        if best_val - lower <= cfg.kelley_tolerance:
            converged = True
            break
    xbest = np.array([(best_mask >> k) & 1 for k in range(d)], dtype=float)
    return KelleyResult(xbest, best_val, lower, len(cuts), converged, lp_bounds)


@dataclass
class DcaResult:
    best_subset: object
    best_value: float
    visited: list
    iterations: int
    trajectory: list
    hit_cap: bool = False
    best_local: int = 0

    def monotonicity_violations(self, tol: float) -> int:
        t = self.trajectory
        return sum(1 for a, b in zip(t, t[1:]) if b > a + tol)


class _Tracker:
    """Collects level-set values of every iterate."""

    def __init__(self, obj: DsObjective):
        self.obj = obj
        self.values: dict = {}
        self.best_mask = None
        self.best_value = np.inf

    def visit(self, order, gvals, fvals):
        mask = 0
        zvals = gvals - fvals
        for k in range(len(order) + 1):
            if k:
                mask |= 1 << int(order[k - 1])
            v = float(zvals[k])
            self.values.setdefault(mask, v)
            # strict improvement, or a tie on a lexicographically smaller set
            if v < self.best_value - 1e-12 or (abs(v - self.best_value) <= 1e-12 and mask < self.best_mask):
                self.best_value, self.best_mask = v, mask


def dca_minimize(obj: DsObjective, x0, cfg: DcaConfig = DcaConfig()) -> DcaResult:
    """Local minimization of ``z = g - f`` starting from the box point ``x0``."""
    d = obj.d
    x = check_box(x0, d)
    tracker = _Tracker(obj)

    def evaluate(x):
        order = descending_order(x)
        gv = obj.g.chain_values(order)
        fv = obj.f.chain_values(order)
        w = chain_weights(x[order])
        tracker.visit(order, gv, fv)
        y = np.empty(d)
        y[order] = np.diff(fv)
        return float(w @ (gv - fv)), y

    zl, y = evaluate(x)
    trajectory = [zl]
    iterations = 0
    hit_cap = True
    for _ in range(cfg.max_outer_iters):
        kel = kelley_minimize(obj.g, y, cfg, start=x)
        x_new = kel.x
        if np.array_equal(x_new, x):
            hit_cap = False
            break
        zl_new, y = evaluate(x_new)
        trajectory.append(zl_new)
        iterations += 1
        x = x_new
        if abs(zl_new - zl) < cfg.epsilon:
            hit_cap = False
            break
        zl = zl_new
    visited = sorted(
        ((obj.to_global(m), v) for m, v in tracker.values.items() if v < 0),
        key=lambda mv: (mv[1], int(mv[0])),
    )
    return DcaResult(
        best_subset=obj.to_global(tracker.best_mask),
        best_value=tracker.best_value,
        visited=visited,
        iterations=iterations,
        trajectory=trajectory,
        hit_cap=hit_cap,
        best_local=tracker.best_mask,
    )

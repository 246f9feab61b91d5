"""Dense bounded-variable primal simplex.

Every row ``a_r . x (<=, >=, =) b_r`` gets a slack ``s_r`` so that
``a_r . x + s_r = b_r`` with ``s_r >= 0``, ``s_r <= 0`` or ``s_r = 0``.
Starting from any basis (the all-slack basis when cold), a composite
phase 1 minimizes the sum of bound violations of the basic variables and
phase 2 then optimizes the true objective.  Duals are reported as shadow
prices ``d objective / d b`` in the program's own sense, so ``<=`` rows of
a maximization carry nonnegative duals.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

FEAS_TOL = 1e-7
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 50

_BASIC, _LOWER, _UPPER, _FREE = 0, 1, 2, 3
_SENSES = ("<=", ">=", "=")

# Simple counter so callers can report how many programs were solved.
solve_count = 0


def _inverse_ok(B: np.ndarray, Binv: np.ndarray, tol: float) -> bool:
    """Probe ``B @ Binv ~ I`` with one vector instead of a full product."""
    if B.shape[0] == 0:
        return True
    probe = np.linspace(1.0, 2.0, B.shape[0])
    return bool(np.all(np.isfinite(Binv)) and np.abs(B @ (Binv @ probe) - probe).max() <= tol)


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class NumericalBreakdown(RuntimeError):
    """The simplex iteration limit was exhausted or a pivot became unusable."""


@dataclass
class LinearProgram:
    """``max/min c.x  s.t.  A x (senses) b,  lower <= x <= upper``."""

    c: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    b: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    maximize: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A = np.asarray(self.A, dtype=float)
        if self.A.size == 0:
            self.A = self.A.reshape(0, n) if self.A.ndim < 2 or self.A.shape[1] != n else self.A
        if self.A.ndim != 2 or self.A.shape[1] != n:
            raise ValueError(f"constraint matrix shape {self.A.shape} does not match {n} variables")
        m = self.A.shape[0]
        self.senses = tuple(self.senses)
        if len(self.senses) != m or any(s not in _SENSES for s in self.senses):
            raise ValueError("need one sense in {'<=', '>=', '='} per row")
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.b.size != m:
            raise ValueError("right-hand side length does not match the row count")
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if self.lower.size != n or self.upper.size != n:
            raise ValueError("bound vectors must have one entry per variable")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("bounds must not be NaN")

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def with_rows(self, A_new, senses, b_new) -> "LinearProgram":
        A_new = np.asarray(A_new, dtype=float).reshape(-1, self.n_vars)
        return replace(
            self,
            A=np.vstack([self.A, A_new]),
            senses=tuple(self.senses) + tuple(senses),
            b=np.concatenate([self.b, np.asarray(b_new, dtype=float).ravel()]),
        )

    def with_bounds(self, lower, upper) -> "LinearProgram":
        return replace(self, lower=np.asarray(lower, dtype=float), upper=np.asarray(upper, dtype=float))

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        """Render in the common LP-file layout, mostly for debugging."""
        names = list(names) if names is not None else [f"x{j}" for j in range(self.n_vars)]

        def expr(coeffs):
            terms = []
            for j, a in enumerate(coeffs):
                if a == 0:
                    continue
                sign = "-" if a < 0 else "+"
                mag = abs(a)
                terms.append(f"{sign} {names[j]}" if mag == 1 else f"{sign} {mag:.12g} {names[j]}")
            if not terms:
                return "0"
            text = " ".join(terms)
            return text[2:] if text.startswith("+ ") else text

        lines = ["Maximize" if self.maximize else "Minimize", f" obj: {expr(self.c)}", "Subject To"]
        for r in range(self.n_rows):
            lines.append(f" r{r}: {expr(self.A[r])} {self.senses[r]} {self.b[r]:.12g}")
        lines.append("Bounds")
        for j in range(self.n_vars):
            lo, hi = self.lower[j], self.upper[j]
            if np.isinf(lo) and np.isinf(hi):
                lines.append(f" {names[j]} free")
            else:
                lo_s = "-inf" if np.isinf(lo) else f"{lo:.12g}"
                hi_s = "+inf" if np.isinf(hi) else f"{hi:.12g}"
                lines.append(f" {lo_s} <= {names[j]} <= {hi_s}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Basis:
    """Reusable basis description.

    Structural variable ``j`` is encoded as ``j`` and the slack of row ``r``
    as ``-(r + 1)``, so the encoding survives appending columns or rows.
    """

    basic: tuple
    at_upper: frozenset = field(default_factory=frozenset)
    n_rows: int = 0
    # inverse of the basis matrix when exported; reused if it still fits
    inverse: Optional[np.ndarray] = field(default=None, compare=False, repr=False)


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray
    duals: np.ndarray
    reduced_costs: np.ndarray
    objective: float
    basis: Optional[Basis] = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Simplex:
    def __init__(self, lp: LinearProgram, basis: Optional[Basis]):
        m, n = lp.A.shape
        self.m, self.n = m, n
        self.N = n + m
        self.A = np.hstack([lp.A, np.eye(m)])
        self.b = lp.b.copy()
        cost = -lp.c if lp.maximize else lp.c
        self.cost = np.concatenate([cost, np.zeros(m)])
        slack_lo = np.array([-np.inf if s == ">=" else 0.0 for s in lp.senses])
        slack_hi = np.array([0.0 if s in (">=", "=") else np.inf for s in lp.senses])
        self.lo = np.concatenate([lp.lower, slack_lo])
        self.hi = np.concatenate([lp.upper, slack_hi])
        cmax = float(np.max(np.abs(cost))) if n else 0.0
        self.dtol = max(1e-9, 1e-12 * cmax)
        self.iterations = 0
        self.warm = basis is not None and self._load(basis)
        if not self.warm:
            self._cold()

    # -- basis management -------------------------------------------------

    def _place_nonbasic(self, want_upper: np.ndarray) -> None:
        """Put every variable at a bound: the upper one where requested and
        finite, else the lower one, else whichever is finite, else zero."""
        lo_fin, hi_fin = np.isfinite(self.lo), np.isfinite(self.hi)
        upper = (want_upper & hi_fin) | (~lo_fin & hi_fin)
        lower = ~upper & lo_fin
        self.status = np.full(self.N, _FREE, dtype=np.int8)
        self.status[upper] = _UPPER
        self.status[lower] = _LOWER
        self.x = np.zeros(self.N)
        self.x[upper] = self.hi[upper]
        self.x[lower] = self.lo[lower]

    def _cold(self) -> None:
        self._place_nonbasic(np.zeros(self.N, dtype=bool))
        self.basis = np.arange(self.n, self.N)
        self.status[self.basis] = _BASIC
        self.Binv = np.eye(self.m)
        self._recompute_basics()

    def _load(self, basis: Basis) -> bool:
        idx = []
        for code in basis.basic:
            j = code if code >= 0 else self.n + (-code - 1)
            if code >= self.n or j >= self.N:
                return False
            idx.append(j)
        # rows added since the basis was taken start with their slack basic
        idx.extend(self.n + r for r in range(basis.n_rows, self.m))
        if len(idx) != self.m or len(set(idx)) != self.m:
            return False
        B = self.A[:, idx]
        Binv = self._reuse_inverse(basis, idx, B)
        if Binv is None:
            try:
                Binv = np.linalg.inv(B)
            except np.linalg.LinAlgError:
                return False
            if not _inverse_ok(B, Binv, 1e-8):
                return False
        want_upper = np.zeros(self.N, dtype=bool)
        for code in basis.at_upper:
            j = code if code >= 0 else self.n + (-code - 1)
            if 0 <= j < self.N:
                want_upper[j] = True
        self._place_nonbasic(want_upper)
        self.basis = np.array(idx, dtype=int)
        self.status[self.basis] = _BASIC
        self.Binv = Binv
        self._recompute_basics()
        return True

    def _reuse_inverse(self, basis: Basis, idx: list, B: np.ndarray) -> Optional[np.ndarray]:
        """Extend a stored inverse to rows appended with their slacks basic."""
        inv = basis.inverse
        m0 = basis.n_rows
        if inv is None or inv.shape != (m0, m0) or m0 > self.m:
            return None
        Binv = np.eye(self.m)
        Binv[:m0, :m0] = inv
        if m0 < self.m:
            Binv[m0:, :m0] = -self.A[m0:, idx[:m0]] @ inv
        return Binv if _inverse_ok(B, Binv, 1e-9) else None

    def _recompute_basics(self) -> None:
        self.x[self.basis] = 0.0
        self.x[self.basis] = self.Binv @ (self.b - self.A @ self.x)

    def _refactor(self) -> None:
        self.Binv = np.linalg.inv(self.A[:, self.basis])
        self._recompute_basics()

    def export_basis(self) -> Basis:
        def code(j):
            return int(j) if j < self.n else -(int(j) - self.n + 1)

        basic = tuple(code(j) for j in self.basis)
        at_upper = frozenset(code(j) for j in np.flatnonzero(self.status == _UPPER))
        return Basis(basic, at_upper, self.m, self.Binv.copy())

    # -- iteration ---------------------------------------------------------

    def _pivot(self, r: int, q: int, alpha: np.ndarray) -> None:
        """Replace the basic variable of row ``r`` by ``q`` (``alpha`` = B^-1 a_q)."""
        row = self.Binv[r] / alpha[r]
        self.Binv -= np.outer(alpha, row)
        self.Binv[r] = row
        self.basis[r] = q
        self.status[q] = _BASIC

    def _dual_phase(self, max_iter: int) -> Optional[LpStatus]:
        """Dual simplex from a dual feasible basis until the basics fit their bounds.

        Returns INFEASIBLE when a row proves primal infeasibility, and None
        when the primal simplex should take over (also when the starting
        basis is not dual feasible, as after appending improving columns).
        """
        if self.m == 0:
            return None
        d = self.cost - (self.cost[self.basis] @ self.Binv) @ self.A
        tol = self.dtol
        st = self.status
        boxed = np.isfinite(self.lo) & np.isfinite(self.hi)
        wrong_lo = (st == _LOWER) & (d < -tol)
        wrong_hi = (st == _UPPER) & (d > tol)
        if np.any((wrong_lo | wrong_hi) & ~boxed) or np.any((st == _FREE) & (np.abs(d) > tol)):
            return None
        # boxed variables on the wrong side of their reduced cost switch bounds
        flip_up, flip_lo = wrong_lo & boxed, wrong_hi & boxed
        if flip_up.any() or flip_lo.any():
            st[flip_up], self.x[flip_up] = _UPPER, self.hi[flip_up]
            st[flip_lo], self.x[flip_lo] = _LOWER, self.lo[flip_lo]
            self._recompute_basics()
        movable = self.lo != self.hi
        limit = self.iterations + 10 * (self.m + self.N)
        rechecked = False
        while True:
            if self.iterations >= min(max_iter, limit):
                return None
            xB = self.x[self.basis]
            loB, hiB = self.lo[self.basis], self.hi[self.basis]
            infeas = np.maximum(loB - xB, 0.0) + np.maximum(xB - hiB, 0.0)
            r = int(np.argmax(infeas))
            if infeas[r] <= FEAS_TOL:
                return None
            below = xB[r] < loB[r]
            row = self.Binv[r] @ self.A
            signed = -row if below else row
            cand = movable & (((st == _LOWER) & (signed > PIVOT_TOL))
                              | ((st == _UPPER) & (signed < -PIVOT_TOL))
                              | ((st == _FREE) & (np.abs(signed) > PIVOT_TOL)))
            if not cand.any():
                if rechecked:
                    return LpStatus.INFEASIBLE
                self._refactor()
                self._since_refactor = 0
                d = self.cost - (self.cost[self.basis] @ self.Binv) @ self.A
                rechecked = True
                continue
            rechecked = False
            idx = np.flatnonzero(cand)
            ratios = np.abs(d[idx]) / np.abs(signed[idx])
            ties = idx[ratios <= ratios.min() + 1e-12]
            q = int(ties[np.argmax(np.abs(signed[ties]))])
            alpha = self.Binv @ self.A[:, q]
            bound = loB[r] if below else hiB[r]
            t = (xB[r] - bound) / alpha[r]
            self.x[self.basis] -= t * alpha
            self.x[q] += t
            leaving = self.basis[r]
            self.x[leaving] = bound
            st[leaving] = _LOWER if below else _UPPER
            d = d - (d[q] / row[q]) * row
            self._pivot(r, q, alpha)
            self.iterations += 1
            self._since_refactor += 1
            if self._since_refactor >= REFACTOR_EVERY:
                self._refactor()
                self._since_refactor = 0
                d = self.cost - (self.cost[self.basis] @ self.Binv) @ self.A

    def run(self, max_iter: int) -> LpStatus:
        self._since_refactor = 0
        if self.warm:
            verdict = self._dual_phase(max_iter)
            if verdict is not None:
                return verdict
        degenerate = 0
        bland = False
        since_refactor = self._since_refactor
        stall_after = 30
        confirmed = False
        perturbed = None  # original bounds while a perturbation is active
        tried_perturbation = False
        while True:
            if self.iterations >= max_iter:
                raise NumericalBreakdown(f"simplex exceeded {max_iter} iterations")
            xB = self.x[self.basis]
            loB, hiB = self.lo[self.basis], self.hi[self.basis]
            below = xB < loB - FEAS_TOL
            above = xB > hiB + FEAS_TOL
            phase1 = bool(below.any() or above.any())
            if phase1:
                cB = above.astype(float) - below.astype(float)
                y = cB @ self.Binv
                d = -(y @ self.A)
                tol = 1e-9
            else:
                y = self.cost[self.basis] @ self.Binv
                d = self.cost - y @ self.A
                tol = self.dtol
            q, direction = self._choose_entering(d, tol, bland)
            if q < 0 and perturbed is not None:
                # optimal for the shifted bounds: restore them and clean up
                self.lo, self.hi = perturbed
                perturbed = None
                self._snap_nonbasics()
                degenerate, confirmed = 0, False
                continue
            if q < 0:
                if not confirmed:
                    # re-check the verdict on an accurate factor and fresh basics
                    if since_refactor and not _inverse_ok(self.A[:, self.basis], self.Binv, 1e-9):
                        self._refactor()
                        since_refactor = 0
                    else:
                        self._recompute_basics()
                    confirmed = True
                    continue
                return LpStatus.INFEASIBLE if phase1 else LpStatus.OPTIMAL
            confirmed = False
            alpha = self.Binv @ self.A[:, q]
            theta, r, leave_upper = self._ratio_test(alpha, direction, q, xB, loB, hiB, bland)
            if r == -2:
                if phase1:
                    raise NumericalBreakdown("unbounded ray during phase 1")
                return LpStatus.UNBOUNDED
            self.iterations += 1
            delta = -direction * alpha
            self.x[self.basis] += theta * delta
            self.x[q] += direction * theta
            if r == -1:
                # entering variable moves to its opposite bound
                if direction > 0:
                    self.status[q], self.x[q] = _UPPER, self.hi[q]
                else:
                    self.status[q], self.x[q] = _LOWER, self.lo[q]
            else:
                leaving = self.basis[r]
                self.status[leaving] = _UPPER if leave_upper else _LOWER
                self.x[leaving] = self.hi[leaving] if leave_upper else self.lo[leaving]
                self._pivot(r, q, alpha)
                since_refactor += 1
                if since_refactor >= REFACTOR_EVERY:
                    self._refactor()
                    since_refactor = 0
            # steps whose objective gain is lost in roundoff count as degenerate
            gain = theta * abs(d[q])
            scale = 1.0 + abs(self.cost @ self.x) if not phase1 else 1.0
            if theta <= 1e-12 or gain <= 1e-11 * scale:
                degenerate += 1
                if degenerate > stall_after and not tried_perturbation:
                    tried_perturbation = True
                    perturbed = (self.lo, self.hi)
                    self._perturb_bounds()
                    degenerate = 0
                elif degenerate > stall_after:
                    bland = True
            else:
                degenerate = 0
                bland = False

    def _perturb_bounds(self) -> None:
        """Widen every finite bound of a movable variable by a small random
        amount so that degenerate ratio tests become strict."""
        rng = np.random.default_rng(self.m * self.N + self.iterations)
        movable = self.lo != self.hi
        scale = 1e-6 * (1.0 + rng.random(self.N))
        lo = np.where(movable & np.isfinite(self.lo), self.lo - scale * (1 + np.abs(self.lo)), self.lo)
        hi = np.where(movable & np.isfinite(self.hi), self.hi + scale * (1 + np.abs(self.hi)), self.hi)
        self.lo, self.hi = lo, hi
        self._snap_nonbasics()

    def _snap_nonbasics(self) -> None:
        st = self.status
        self.x[st == _LOWER] = self.lo[st == _LOWER]
        self.x[st == _UPPER] = self.hi[st == _UPPER]
        self._recompute_basics()

    def _choose_entering(self, d, tol, bland):
        st = self.status
        fixed = self.lo == self.hi
        inc = ((st == _LOWER) | (st == _FREE)) & (d < -tol) & ~fixed
        dec = ((st == _UPPER) | (st == _FREE)) & (d > tol) & ~fixed
        score = np.where(inc, -d, 0.0) + np.where(dec, d, 0.0)
        if bland:
            cand = np.flatnonzero(inc | dec)
            if cand.size == 0:
                return -1, 0
            q = int(cand[0])
        else:
            q = int(np.argmax(score))
            if score[q] <= 0.0:
                return -1, 0
        return q, (1 if inc[q] else -1)

    def _ratio_test(self, alpha, direction, q, xB, loB, hiB, bland):
        delta = -direction * alpha
        theta = np.full(self.m, np.inf)
        to_upper = np.zeros(self.m, dtype=bool)
        usable = np.abs(alpha) > PIVOT_TOL
        infeas_lo = xB < loB - FEAS_TOL
        infeas_hi = xB > hiB + FEAS_TOL
        feasible = ~(infeas_lo | infeas_hi)
        dec = usable & (delta < 0)
        inc = usable & (delta > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            # decreasing basics stop at the lower bound, or at the upper bound
            # when they start above it
            m1 = dec & feasible & np.isfinite(loB)
            theta[m1] = np.maximum(xB[m1] - loB[m1], 0.0) / -delta[m1]
            m2 = dec & infeas_hi
            theta[m2] = (xB[m2] - hiB[m2]) / -delta[m2]
            to_upper[m2] = True
            m3 = inc & feasible & np.isfinite(hiB)
            theta[m3] = np.maximum(hiB[m3] - xB[m3], 0.0) / delta[m3]
            to_upper[m3] = True
            m4 = inc & infeas_lo
            theta[m4] = (loB[m4] - xB[m4]) / delta[m4]
        flip = self.hi[q] - self.lo[q]
        best = float(theta.min()) if self.m else np.inf
        if not np.isfinite(best) and not np.isfinite(flip):
            return np.inf, -2, False
        if flip <= best:
            return flip, -1, False
        ties = np.flatnonzero(theta <= best + 1e-12)
        if bland:
            r = int(ties[np.argmin(self.basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(alpha[ties]))])
        return max(best, 0.0), r, bool(to_upper[r])


def solve(lp: LinearProgram, basis: Optional[Basis] = None, max_iter: Optional[int] = None) -> LpSolution:
    """Solve ``lp``; ``basis`` (from a previous solution) warm-starts the simplex."""
    global solve_count
    solve_count += 1
    sx = _Simplex(lp, basis)
    if max_iter is None:
        max_iter = 50 * (sx.m + sx.N) + 1000
    status = sx.run(max_iter)
    n = lp.n_vars
    x = sx.x[:n].copy()
    if status is LpStatus.INFEASIBLE:
        return LpSolution(status, x, np.zeros(lp.n_rows), np.zeros(n), float("nan"), None, sx.iterations)
    if status is LpStatus.UNBOUNDED:
        obj = -np.inf if not lp.maximize else np.inf
        return LpSolution(status, x, np.zeros(lp.n_rows), np.zeros(n), obj, None, sx.iterations)
    y = sx.cost[sx.basis] @ sx.Binv
    duals = -y if lp.maximize else y
    reduced = lp.c - lp.A.T @ duals
    # basic variables have zero reduced cost by construction; remove roundoff
    basic_struct = sx.basis[sx.basis < n]
    reduced[basic_struct] = 0.0
    return LpSolution(status, x, duals, reduced, float(lp.c @ x), sx.export_basis(), sx.iterations)

"""Row-and-column generation loop for score-based structure learning.

Each outer iteration runs three phases over the shared column pool and
cluster set:

1. column generation: re-solve the restricted master LP and price nodes
   until no node yields an improving parent set;
2. row generation: add the most violated cluster constraint for the LP
   solution until none is violated;
3. integer phase: solve the restricted integer master over the pools.

The loop stops once an iteration adds nothing and the integer score is
stable.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp
from .master import RestrictedMaster
from .milp import MilpLimits
from .model import ClusterSet, ColumnPool, Dag, Dataset
from .pricing import RC_THRESHOLD, PricingConfig, node_rng, price_node
from .rmip import METHODS, solve_rmip
from .scoring import LocalScorer, ScoreConfig
from .separation import METHODS as SEPARATION_METHODS, separate_fractional

log = logging.getLogger(__name__)

STREAM_PRICING = 3


class TimeLimit(Exception):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    score: Optional[ScoreConfig] = None  # BIC for the dataset when omitted
    pricing: PricingConfig = field(default_factory=PricingConfig)
    outer_iterations: int = 50
    time_limit: Optional[float] = None
    cg_max_rounds: int = 200
    rmip_node_limit: Optional[int] = 100_000
    rmip_method: str = "auto"  # see rmip.METHODS
    separation_method: str = "auto"  # see separation.METHODS
    threads: int = 1
    convergence_tol: float = 1e-6

    def __post_init__(self):
        if self.outer_iterations < 1:
            raise ValueError("outer_iterations must be at least 1")
        if self.cg_max_rounds < 1:
            raise ValueError("cg_max_rounds must be at least 1")
        if self.rmip_method not in METHODS:
            raise ValueError(f"rmip_method must be one of {METHODS}")
        if self.separation_method not in SEPARATION_METHODS:
            raise ValueError(f"separation_method must be one of {SEPARATION_METHODS}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.time_limit is not None and not self.time_limit > 0:
            raise ValueError("time_limit must be positive")


@dataclass
class RunReport:
    dag: Dag
    score: float  # without the Gaussian constant
    score_with_constant: float
    converged: str  # converged | outer_limit | time_limit | failed
    outer_iterations: int = 0
    timings: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    certificate: dict = field(default_factory=dict)
    cg_cap_hit: bool = False
    dca_monotonicity_violations: int = 0
    rmip_scores: list = field(default_factory=list)
    # (outer iteration, phase, RMLP objective) for every master solve
    rmlp_objectives: list = field(default_factory=list)
    error: Optional[str] = None

    @property
    def flagged(self) -> bool:
        return self.converged != "converged"


class _Run:
    def __init__(self, data: Dataset, cfg: PipelineConfig):
        self.data = data
        self.cfg = cfg
        self.score_cfg = cfg.score or ScoreConfig.bic(data.N)
        self.scorer = LocalScorer(data, self.score_cfg)
        self.start = time.monotonic()
        self.deadline = None if cfg.time_limit is None else self.start + cfg.time_limit
        self.timings = {"column_generation": 0.0, "row_generation": 0.0, "integer": 0.0}
        self.counts = {"columns": 0, "clusters": 0, "dca_calls": 0, "lp_solves": 0,
                       "rmlp_solves": 0, "rmip_nodes": 0, "pricing_calls": 0}
        self.violations = 0
        self.best_rc: dict = {}
        self.last_separation_clean = False
        self.cg_cap_hit = False
        self.objectives: list = []
        self.pool: Optional[ColumnPool] = None
        self.clusters = ClusterSet()
        self.master: Optional[RestrictedMaster] = None
        self.best_dag: Optional[Dag] = None
        self.best_score = -np.inf
        self.rmip_optimal = False
        self.rmip_scores: list = []
        self.outer = 0

    def check_time(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise TimeLimit

    def solve_master(self, phase: str):
        state = self.master.solve()
        self.counts["rmlp_solves"] += 1
        self.objectives.append((self.outer, phase, state.objective))
        return state

    def price_all(self, nodes, state, rnd):
        duals = state.duals
        primal = state.primal_by_column()
        pcfg = self.cfg.pricing

        def work(i):
            rng = node_rng(pcfg.seed, STREAM_PRICING, self.outer, rnd, i)
            return price_node(i, self.scorer, pcfg, duals, self.clusters, self.pool, primal, rng)

        if self.cfg.threads > 1 and len(nodes) > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.threads) as ex:
                results = list(ex.map(work, nodes))
        else:
            results = [work(i) for i in nodes]
        tol = pcfg.dca.kelley_tolerance
        added = 0
        # merge in node order so the pool does not depend on the thread count
        for res in results:
            self.counts["pricing_calls"] += 1
            self.counts["dca_calls"] += res.dca_calls
            for t in res.trajectories:
                self.violations += sum(1 for a, b in zip(t, t[1:]) if b > a + tol)
            self.best_rc[res.node] = res.best_rc
            for col in res.new_columns:
                if self.pool.add(col):
                    added += 1
        self.counts["columns"] += added
        return added

    def column_phase(self) -> int:
        t0 = time.monotonic()
        n = self.data.n
        self.best_rc = {i: -np.inf for i in range(n)}
        added_total = 0
        capped = True
        for rnd in range(self.cfg.cg_max_rounds):
            self.check_time()
            state = self.solve_master("columns")
            todo = [i for i in range(n) if self.best_rc[i] < RC_THRESHOLD]
            if not todo:
                capped = False
                break
            added = self.price_all(todo, state, rnd)
            added_total += added
            if added == 0 and all(self.best_rc[i] >= RC_THRESHOLD for i in range(n)):
                capped = False
                break
        if capped:
            self.cg_cap_hit = True
            log.info("column generation hit the round cap in outer iteration %d", self.outer)
        self.timings["column_generation"] += time.monotonic() - t0
        return added_total

    def row_phase(self) -> int:
        t0 = time.monotonic()
        added = 0
        while True:
            self.check_time()
            state = self.solve_master("rows")
            sep = separate_fractional(state.primal_by_column(1e-9), self.pool, self.cfg.separation_method)
            if sep is None:
                self.last_separation_clean = True
                break
            self.last_separation_clean = False
            if not self.clusters.add(sep.cluster):
                raise AssertionError(f"separation returned stored cluster {sep.cluster}")
            added += 1
        self.counts["clusters"] += added
        self.timings["row_generation"] += time.monotonic() - t0
        return added

    def integer_phase(self, unlimited: bool = False):
        t0 = time.monotonic()
        node_limit = None if unlimited else self.cfg.rmip_node_limit
        time_left = None if self.deadline is None else max(self.deadline - time.monotonic(), 1e-3)
        res = solve_rmip(self.pool, self.clusters, MilpLimits(nodes=node_limit, time=time_left),
                         method=self.cfg.rmip_method)
        self.counts["rmip_nodes"] += res.nodes
        self.counts["clusters"] += len(res.clusters_added)
        self.rmip_optimal = res.optimal
        if res.score > self.best_score or self.best_dag is None:
            self.best_dag, self.best_score = res.dag, res.score
        self.rmip_scores.append(res.score)
        self.timings["integer"] += time.monotonic() - t0
        return res

    def execute(self) -> str:
        n = self.data.n
        self.pool = ColumnPool([self.scorer.local_score(i, 0) for i in range(n)])
        self.best_dag = Dag.empty(n)
        self.best_score = float(sum(c.local_score for c in self.pool))
        self.master = RestrictedMaster(self.pool, self.clusters)
        previous = None
        for outer in range(self.cfg.outer_iterations):
            self.outer = outer
            new_cols = self.column_phase()
            new_rows = self.row_phase()
            self.check_time()
            res = self.integer_phase()
            score = res.score
            stable = previous is not None and abs(score - previous) < self.cfg.convergence_tol * (1 + abs(score))
            quiet = new_cols == 0 and new_rows == 0 and not res.clusters_added
            previous = score
            log.info("outer %d: score %.6f, +%d columns, +%d clusters", outer, score,
                     new_cols, new_rows + len(res.clusters_added))
            if quiet and stable:
                if not res.optimal:
                    self.check_time()
                    res = self.integer_phase(unlimited=True)
                    if res.clusters_added:
                        continue
                self.outer = outer + 1
                return "converged"
        self.outer = self.cfg.outer_iterations
        return "outer_limit"

    def report(self, reason: str, error: Optional[str] = None) -> RunReport:
        dag = self.best_dag if self.best_dag is not None else Dag.empty(self.data.n)
        try:
            score = self.scorer.graph_score(dag)
            with_const = score + self.data.n * self.scorer.constant()
        except Exception:  # scoring itself failed; keep the report
            score = with_const = float("nan")
        self.timings["total"] = time.monotonic() - self.start
        certificate = {
            "pricing": bool(self.best_rc) and all(v >= RC_THRESHOLD for v in self.best_rc.values()),
            "separation": self.last_separation_clean,
            "rmip_optimal": self.rmip_optimal,
        }
        counts = dict(self.counts)
        counts["pool_size"] = len(self.pool) if self.pool is not None else 0
        counts["stored_clusters"] = len(self.clusters)
        return RunReport(
            dag=dag,
            score=score,
            score_with_constant=with_const,
            converged=reason,
            outer_iterations=self.outer,
            timings=dict(self.timings),
            counts=counts,
            certificate=certificate,
            cg_cap_hit=self.cg_cap_hit,
            dca_monotonicity_violations=self.violations,
            rmip_scores=list(self.rmip_scores),
            rmlp_objectives=list(self.objectives),
            error=error,
        )


def run(data: Dataset, cfg: Optional[PipelineConfig] = None) -> RunReport:
    """Learn a DAG for ``data``.

    Never raises on solver trouble: a time limit returns the best graph so
    far and any other failure returns the empty graph, both flagged in
    ``RunReport.converged``.
    """
    cfg = cfg or PipelineConfig()
    state = _Run(data, cfg)
    lp_before = lp.solve_count
    try:
        reason = state.execute()
        error = None
    except TimeLimit:
        reason, error = "time_limit", None
    except Exception as exc:  # empty-graph fallback
        log.exception("structure learning failed")
        state.best_dag = Dag.empty(data.n)
        reason, error = "failed", f"{type(exc).__name__}: {exc}"
    state.counts["lp_solves"] = lp.solve_count - lp_before
    return state.report(reason, error)

"""Command-line front end: ``bncg learn | simulate | evaluate``.

Reports go to stdout as ``key=value`` lines.  Exit codes: 0 success,
2 bad input, 3 solver failure (a partial report is still printed).
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import datagen, pipeline
from .metrics import NodeMismatch, compare
from .model import CycleDetected, Dag, Dataset
from .pricing import STRATEGIES, PricingConfig
from .scoring import LocalScorer, ScoreConfig

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3


class InputError(Exception):
    """Anything the user can fix: missing files, malformed graphs, bad flags."""


class GraphFormatError(InputError):
    pass


# -- graph files --------------------------------------------------------------

def format_graph(dag: Dag, names: Sequence[str]) -> str:
    if len(names) != dag.n:
        raise ValueError("one name per node is required")
    for name in names:
        if not name or "," in name or "->" in name or name != name.strip():
            raise ValueError(f"node name {name!r} cannot be written to a graph file")
    lines = ["nodes: " + ",".join(names)]
    lines += [f"{names[u]} -> {names[v]}" for u, v in sorted(dag.edges())]
    return "\n".join(lines) + "\n"


def parse_graph(text: str, source: str = "<graph>") -> tuple:
    """Parse a graph file into ``(Dag, names)``."""
    names: Optional[list] = None
    index: dict = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        where = f"{source}:{lineno}"
        if line.lower().startswith("nodes:"):
            if names is not None:
                raise GraphFormatError(f"{where}: second nodes line")
            names = [t.strip() for t in line[len("nodes:"):].split(",")]
            if any(not t for t in names):
                raise GraphFormatError(f"{where}: empty node name")
            if len(set(names)) != len(names):
                raise GraphFormatError(f"{where}: duplicate node name")
            index = {t: k for k, t in enumerate(names)}
            continue
        if names is None:
            raise GraphFormatError(f"{where}: edge before the nodes line")
        parts = line.split("->")
        if len(parts) != 2:
            raise GraphFormatError(f"{where}: expected 'parent -> child'")
        u, v = (p.strip() for p in parts)
        for t in (u, v):
            if t not in index:
                raise GraphFormatError(f"{where}: unknown node {t!r}")
        if u == v:
            raise GraphFormatError(f"{where}: self-loop on {u!r}")
        edges.append((index[u], index[v]))
    if names is None:
        raise GraphFormatError(f"{source}: missing 'nodes:' line")
    try:
        dag = Dag.from_edges(len(names), edges)
    except CycleDetected as exc:
        raise GraphFormatError(f"{source}: graph has a directed cycle") from exc
    return dag, names


def read_graph(path: str) -> tuple:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"graph file not found: {path}")
    return parse_graph(p.read_text(), str(path))


def write_csv(path: Path, data: Dataset) -> None:
    np.savetxt(path, data.values, delimiter=",", fmt="%.17g",
               header=",".join(data.columns), comments="")


# -- helpers ------------------------------------------------------------------

def _emit(out, **pairs) -> None:
    for k, v in pairs.items():
        if isinstance(v, float):
            v = repr(v)
        out.write(f"{k}={v}\n")


def _load_data(path: str, kind: str) -> Dataset:
    if not Path(path).is_file():
        raise InputError(f"data file not found: {path}")
    try:
        return datagen.load_csv(path, kind)
    except datagen.ParseError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except ValueError as exc:  # arity problems and dataset validation
        raise InputError(f"{path}: {exc}") from exc


def _score_config(args, N: int) -> ScoreConfig:
    if args.score == "raw" and args.penalty is None:
        raise InputError("--score raw needs --lambda")
    if args.score != "raw" and args.penalty is not None:
        raise InputError("--lambda only applies to --score raw")
    try:
        return ScoreConfig.from_name(args.score, N, args.penalty)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


# -- commands -----------------------------------------------------------------

def cmd_learn(args, out) -> int:
    data = _load_data(args.data, args.kind)
    score_cfg = _score_config(args, data.N)
    try:
        cfg = pipeline.PipelineConfig(
            score=score_cfg,
            pricing=PricingConfig(strategy=args.pricing, hybrid_threshold=args.hybrid_threshold, seed=args.seed),
            time_limit=args.time_limit,
            threads=args.threads,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = pipeline.run(data, cfg)
    if args.output:
        Path(args.output).write_text(format_graph(report.dag, data.columns))
    _emit(out, converged=report.converged, score=report.score,
          score_with_constant=report.score_with_constant, edges=report.dag.n_edges,
          outer_iterations=report.outer_iterations)
    _emit(out, **{f"count_{k}": v for k, v in report.counts.items()})
    _emit(out, **{f"time_{k}": round(v, 6) for k, v in report.timings.items()})
    _emit(out, **{f"certificate_{k}": v for k, v in report.certificate.items()})
    _emit(out, cg_cap_hit=report.cg_cap_hit, dca_monotonicity_violations=report.dca_monotonicity_violations)
    if args.output:
        _emit(out, output=args.output)
    if report.error:
        _emit(out, error=report.error.replace("\n", " "))
    return EXIT_SOLVER if report.converged == "failed" else EXIT_OK


def cmd_simulate(args, out) -> int:
    try:
        spec = datagen.SimSpec(args.n, args.samples, args.degree, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    sim = datagen.simulate_gaussian(datagen.random_dag(spec), spec)
    data_path, truth_path = Path(args.data), Path(args.truth)
    write_csv(data_path, sim.data)
    truth_path.write_text(format_graph(sim.truth, sim.data.columns))
    _emit(out, data=str(data_path), truth=str(truth_path), nodes=spec.n, samples=spec.N,
          edges=sim.truth.n_edges, edge_probability=spec.edge_probability)
    return EXIT_OK


def cmd_evaluate(args, out) -> int:
    pred, pred_names = read_graph(args.pred)
    truth, truth_names = read_graph(args.truth)
    if pred_names != truth_names:
        raise InputError("predicted and true graphs name different nodes")
    try:
        cmp = compare(pred, truth)
    except NodeMismatch as exc:
        raise InputError(str(exc)) from exc
    _emit(out, precision=float(cmp.precision), recall=float(cmp.recall), shd=cmp.shd)
    if args.data:
        data = _load_data(args.data, args.kind)
        if tuple(data.columns) != tuple(truth_names):
            raise InputError("graph node names do not match the data columns")
        scorer = LocalScorer(data, _score_config(args, data.N))
        const = data.n * scorer.constant()
        pred_score = scorer.graph_score(pred) + const
        truth_score = scorer.graph_score(truth) + const
        gap = (truth_score - pred_score) / abs(truth_score) * 100.0 if truth_score else math.nan
        _emit(out, pred_score=pred_score, truth_score=truth_score, score_gap_pct=gap)
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bncg", description="Bayesian network structure learning "
                                     "by row and column generation.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def score_flags(p):
        p.add_argument("--score", choices=("bic", "aic", "raw"), default="bic")
        p.add_argument("--lambda", dest="penalty", type=float, help="penalty per parameter (raw mode)")
        p.add_argument("--kind", choices=("continuous", "discrete"), default="continuous",
                       help="how to read the data columns")

    learn = sub.add_parser("learn", help="learn a DAG from a CSV file")
    learn.add_argument("--data", required=True)
    score_flags(learn)
    learn.add_argument("--pricing", choices=STRATEGIES, default="hybrid")
    learn.add_argument("--hybrid-threshold", type=int, default=50)
    learn.add_argument("--seed", type=int, default=0)
    learn.add_argument("--time-limit", type=_positive_float)
    learn.add_argument("--threads", type=int, default=1)
    learn.add_argument("--output", help="write the learned graph here")
    learn.set_defaults(func=cmd_learn)

    sim = sub.add_parser("simulate", help="sample a random DAG and linear-Gaussian data")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--samples", type=int, required=True)
    sim.add_argument("--degree", type=float, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--data", default="data.csv", help="CSV output path")
    sim.add_argument("--truth", default="truth.txt", help="graph output path")
    sim.set_defaults(func=cmd_simulate)

    ev = sub.add_parser("evaluate", help="compare a learned graph with the truth")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--data", help="also report both graphs' scores on this data")
    score_flags(ev)
    ev.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

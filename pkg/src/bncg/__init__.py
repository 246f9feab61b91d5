"""Score-based Bayesian network structure learning by row and column generation.

The main entry point is :func:`bncg.pipeline.run`; the submodules expose the
scoring, pricing, master-problem and evaluation pieces separately.
"""
from .datagen import SimSpec, load_csv, random_dag, simulate_gaussian
from .metrics import compare, to_essential_graph
from .model import ClusterSet, ColumnPool, Dag, Dataset, NodeSet, Pdag
from .oracle import exact_bnsl
from .pipeline import PipelineConfig, RunReport, run
from .pricing import PricingConfig
from .scoring import LocalScorer, ScoreConfig

__version__ = "0.1.0"

__all__ = [
    "ClusterSet", "ColumnPool", "Dag", "Dataset", "LocalScorer", "NodeSet", "Pdag",
    "PipelineConfig", "PricingConfig", "RunReport", "ScoreConfig", "SimSpec",
    "compare", "exact_bnsl", "load_csv", "random_dag", "run", "simulate_gaussian",
    "to_essential_graph",
]

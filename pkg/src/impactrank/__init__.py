"""Ranking papers by expected short-term impact in citation networks."""

from impactrank._kernels import BACKEND
from impactrank.attrank import (
    AttentionMode,
    AttRankParams,
    attention_vector,
    attrank_solve,
    fit_eta,
    recency_vector,
)
from impactrank.baselines import citerank, ecm, futurerank, ram
from impactrank.corpus import (
    CitationGraph,
    SplitView,
    citation_age_distribution,
    load_files,
    load_graph,
    temporal_split,
)
from impactrank.harness import Method, SweepGrid, convergence_report, default_grid, evaluate, sweep
from impactrank.metrics import EvalReport, ndcg_at_k, recently_popular_overlap, spearman_rho
from impactrank.walkcore import (
    RankResult,
    TransitionView,
    adjusted_teleport,
    contracted_pagerank,
    matvec,
    pagerank,
    pagerank_dense_oracle,
)

__version__ = "0.1.0"

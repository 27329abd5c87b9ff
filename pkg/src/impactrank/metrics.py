"""Ranking agreement: Spearman's rho, nDCG@k and the recently-popular overlap."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from impactrank.corpus import SplitView
from impactrank.errors import DegenerateInput, DimensionMismatch, ZeroIdeal

DEFAULT_KS = (5, 10, 50, 100, 500)


def spearman_rho(scores, ground_truth, exclude_zero_truth: bool = True) -> float:
    """Pearson correlation of average ranks (ties share the mean rank).

    With ``exclude_zero_truth`` papers whose ground truth is 0 are dropped
    first.  Raises :class:`DegenerateInput` when either side is constant.
    """
    a = np.asarray(scores, dtype=np.float64)
    b = np.asarray(ground_truth, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    if exclude_zero_truth:
        keep = b != 0
        a, b = a[keep], b[keep]
    if a.size < 2:
        raise DegenerateInput(f"need at least 2 items, have {a.size}")
    # doubled average ranks are integers and centre on m + 1, so every moment
    # below is an exact integer
    m = a.size
    dtype = np.int64 if m < 1_000_000 else object
    da = np.rint(2 * rankdata(a)).astype(np.int64).astype(dtype) - (m + 1)
    db = np.rint(2 * rankdata(b)).astype(np.int64).astype(dtype) - (m + 1)
    va, vb, cov = int(np.dot(da, da)), int(np.dot(db, db)), int(np.dot(da, db))
    if va == 0 or vb == 0:
        raise DegenerateInput("a ranking is constant; correlation undefined")
    if va == vb:
        rho = cov / va
    else:
        rho = cov / math.sqrt(va * vb)
    return max(-1.0, min(1.0, rho))


def ranking_from_scores(scores) -> np.ndarray:
    """Indices by descending score; ties go to the lower index."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.lexsort((np.arange(scores.size), -scores))


def _dcg(gains) -> float:
    gains = np.asarray(gains, dtype=np.float64)
    return float(np.sum(gains / np.log2(np.arange(2, gains.size + 2))))


def ndcg_at_k(ranking, rel, k: int) -> float:
    """DCG of the top ``k`` of ``ranking`` over the ideal DCG; linear gains."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rel = np.asarray(rel, dtype=np.float64)
    ranking = np.asarray(ranking, dtype=np.int64)
    ideal = _dcg(np.sort(rel)[::-1][:k])
    if ideal <= 0:
        raise ZeroIdeal("all relevance values are zero")
    return min(1.0, _dcg(rel[ranking[:k]]) / ideal)


def recent_citation_counts(g, y: int) -> np.ndarray:
    """Citations each paper received from papers of the last ``y`` years."""
    window = g.pub_year > g.newest_year - y
    return g._count_citations_from(window)


def recently_popular_overlap(split: SplitView, y: int = 5, top_k: int = 100) -> int:
    """How many of the top-``k`` papers by STI are also top-``k`` by citations
    received during the last ``y`` years of the current view."""
    if split.n_current == 0 or not np.any(split.sti > 0):
        return 0
    k = min(top_k, split.n_current)
    by_sti = ranking_from_scores(split.sti)[:k]
    by_recent = ranking_from_scores(recent_citation_counts(split.current, y))[:k]
    return int(np.intersect1d(by_sti, by_recent).size)


@dataclass
class EvalReport:
    method: str
    params: dict
    spearman: float
    ndcg: dict
    n_evaluated: int
    iterations: int | None = None
    runtime_ms: float = 0.0
    exclude_zero_truth: bool = True
    error: str | None = None

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None or (isinstance(x, float) and math.isnan(x)) else x

        out = {
            "method": self.method,
            "params": self.params,
            "spearman": num(self.spearman),
            "ndcg": {str(k): num(v) for k, v in self.ndcg.items()},
            "n_evaluated": self.n_evaluated,
            "iterations": self.iterations,
            "runtime_ms": round(self.runtime_ms, 3),
            "exclude_zero_truth": self.exclude_zero_truth,
        }
        if self.error:
            out["error"] = self.error
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

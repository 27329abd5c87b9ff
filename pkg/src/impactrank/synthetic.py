"""Synthetic citation networks for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from impactrank.corpus import CitationGraph


def _years(n, n_years, start, growth):
    """Non-decreasing publication years with output growing by ``growth`` per year."""
    w = growth ** np.arange(n_years, dtype=np.float64)
    bounds = np.floor(np.cumsum(w) / w.sum() * n).astype(np.int64)
    return start + np.searchsorted(bounds, np.arange(n), side="right")


def _graph(n, years, src, dst, authors=None):
    ids = [str(i) for i in range(n)]
    if len(src):
        code = np.unique(np.asarray(src, dtype=np.int64) * n + np.asarray(dst, dtype=np.int64))
        src, dst = code // n, code % n
    return CitationGraph(ids, years, np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64),
                         authors=authors)


def random_citation_dag(n, rng, max_refs=5, n_years=None, dangling_share=0.1, start_year=2000,
                        n_authors=None):
    """Each paper cites up to ``max_refs`` uniformly chosen older papers.

    Roughly ``dangling_share`` of the papers cite nothing.  With ``n_authors``
    every paper gets one to three authors drawn from that pool.
    """
    rng = np.random.default_rng(rng)
    n_years = n_years or max(1, n // 5)
    years = np.sort(start_year + rng.integers(0, n_years, n))
    src, dst = [], []
    for j in range(1, n):
        if rng.random() < dangling_share:
            continue
        k = int(rng.integers(1, max_refs + 1))
        refs = rng.choice(j, size=min(k, j), replace=False)
        src.extend([j] * len(refs))
        dst.extend(refs.tolist())
    authors = None
    if n_authors:
        authors = [tuple(f"a{a}" for a in rng.choice(n_authors, size=int(rng.integers(1, 4)), replace=False))
                   for _ in range(n)]
    return _graph(n, years, src, dst, authors)


def future_sinks(n, m, rng, max_refs=4, start_year=2000):
    """A random DAG on ``n`` papers plus ``m`` trailing papers that cite only
    the first ``n`` and are never cited."""
    rng = np.random.default_rng(rng)
    base = random_citation_dag(n, rng, max_refs=max_refs, start_year=start_year)
    src, dst = (a.tolist() for a in base.edges())
    for j in range(n, n + m):
        k = int(rng.integers(1, max_refs + 1))
        refs = rng.choice(n, size=min(k, n), replace=False)
        src.extend([j] * len(refs))
        dst.extend(refs.tolist())
    years = np.concatenate([base.pub_year, np.full(m, base.pub_year[-1] + 1 if n else start_year)])
    return _graph(n + m, years, src, dst)


def preferential_attachment_graph(n, refs_per_paper=10, n_years=30, seed=0, start_year=1990,
                                  growth=1.08):
    """Citation network grown by preferential attachment.

    Paper ``j`` cites ``refs_per_paper`` older papers drawn with probability
    proportional to ``1 + citations received so far``.  Paper output grows
    geometrically per year, as in real corpora.
    """
    rng = np.random.default_rng(seed)
    years = _years(n, n_years, start_year, growth)
    pool = np.empty(n + n * refs_per_paper, dtype=np.int64)
    size = 0
    src = np.empty(n * refs_per_paper, dtype=np.int64)
    dst = np.empty(n * refs_per_paper, dtype=np.int64)
    ne = 0
    for j in range(n):
        if size:
            picks = np.unique(pool[rng.integers(0, size, refs_per_paper)])
            c = picks.size
            src[ne:ne + c] = j
            dst[ne:ne + c] = picks
            ne += c
            pool[size:size + c] = picks
            size += c
        pool[size] = j
        size += 1
    return _graph(n, years, src[:ne], dst[:ne])

"""Comparison methods: CiteRank, FutureRank, RAM and ECM.

Ages are in years relative to the newest paper of the view being ranked.
RAM and ECM weigh a citation by the age of the *citing* paper.
"""

from __future__ import annotations

import numpy as np

from impactrank.attrank import recency_vector
from impactrank.corpus import CitationGraph
from impactrank.errors import InvalidParameters, MissingAuthors, NoConvergence
from impactrank.walkcore import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    RankResult,
    TransitionView,
    matvec,
    power_iterate,
    uniform,
)


def _open_unit(name, v):
    if not 0.0 < v < 1.0:
        raise InvalidParameters(f"{name}={v} outside (0, 1)")


def _normalised(x: np.ndarray) -> np.ndarray:
    total = x.sum()
    return x / total if total > 0 else x


# -- CiteRank -----------------------------------------------------------------


def citerank_start(g: CitationGraph, tau_dir: float) -> np.ndarray:
    """Initial traffic: ``exp(-age / tau_dir)`` normalised."""
    if not tau_dir > 0:
        raise InvalidParameters(f"tau_dir={tau_dir} must be > 0")
    raw = np.exp(-g.age_years.astype(np.float64) / tau_dir)
    return raw / raw.sum()


def citerank(g: CitationGraph, alpha: float, tau_dir: float, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER) -> RankResult:
    """Traffic ``sum_k alpha^k S^k rho``, summed until a term's L1 norm is below ``tol``.

    The result is not renormalised; it sums to ``1 / (1 - alpha)``.
    """
    if not 0.0 <= alpha < 1.0:
        raise InvalidParameters(f"alpha={alpha} outside [0, 1)")
    rho = citerank_start(g, tau_dir)
    total = rho.copy()
    if alpha == 0.0:
        return RankResult(total, 0, [])
    S = TransitionView(g)
    term = rho
    residuals = []
    for k in range(1, max_iter + 1):
        term = alpha * matvec(S, term)
        total += term
        res = float(term.sum())  # terms are nonnegative
        residuals.append(res)
        if res < tol:
            return RankResult(total, k, residuals)
    raise NoConvergence("citerank series did not converge", residuals[-1], residuals, max_iter)


# -- FutureRank ---------------------------------------------------------------


def _authorship(g: CitationGraph):
    """(paper_of, author_of) pair arrays and the author count."""
    names = {}
    paper_of, author_of = [], []
    for i, auths in enumerate(g.authors):
        for a in dict.fromkeys(auths):
            paper_of.append(i)
            author_of.append(names.setdefault(a, len(names)))
    return np.asarray(paper_of, dtype=np.int64), np.asarray(author_of, dtype=np.int64), len(names)


def futurerank(g: CitationGraph, alpha: float, beta: float, gamma: float, rho: float,
               tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> RankResult:
    """Mutual paper/author reinforcement with a recency term.

    Each round, every paper splits its score evenly among its authors; every
    author then splits its total evenly among its papers.  The paper update is
    ``alpha S p + beta (author share) + gamma T + (1 - alpha - beta - gamma) / n``,
    renormalised to sum 1.  Papers without authors get no author share.
    """
    for name, v in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if not 0.0 <= v <= 1.0:
            raise InvalidParameters(f"{name}={v} outside [0, 1]")
    if alpha + beta + gamma > 1.0 + 1e-12:
        raise InvalidParameters("alpha+beta+gamma exceeds 1")
    if not rho < 0:
        raise InvalidParameters(f"rho={rho} must be < 0")
    n = g.paper_count
    S = TransitionView(g)
    rest = max(0.0, 1.0 - alpha - beta - gamma)
    base = gamma * recency_vector(g, rho) + rest / n

    if beta > 0:
        if g.authors is None:
            raise MissingAuthors("FutureRank with beta > 0 needs author data")
        paper_of, author_of, n_auth = _authorship(g)
        per_paper = np.bincount(paper_of, minlength=n).astype(np.float64)
        per_author = np.bincount(author_of, minlength=n_auth).astype(np.float64)

        def author_share(p):
            a = np.bincount(author_of, weights=p[paper_of] / per_paper[paper_of], minlength=n_auth)
            return np.bincount(paper_of, weights=a[author_of] / per_author[author_of], minlength=n)
    else:
        def author_share(p):
            return 0.0

    def step(p):
        nxt = alpha * matvec(S, p) + beta * author_share(p) + base
        return nxt / nxt.sum()

    return power_iterate(step, uniform(n), tol, max_iter, "futurerank")


# -- RAM / ECM ----------------------------------------------------------------


def citation_weights(g: CitationGraph, gamma: float) -> np.ndarray:
    """Per citing paper: ``gamma ** age`` of the paper."""
    return np.power(float(gamma), g.age_years.astype(np.float64))


def _check_ram_gamma(gamma):
    if not 0.0 < gamma <= 1.0:
        raise InvalidParameters(f"gamma={gamma} outside (0, 1]")


def ram(g: CitationGraph, gamma: float, normalize: bool = True) -> np.ndarray:
    """Age-weighted citation count: ``sum over j citing i of gamma ** age(j)``."""
    _check_ram_gamma(gamma)
    raw = g._gather_citations(citation_weights(g, gamma))
    return _normalised(raw) if normalize else raw


def ecm(g: CitationGraph, alpha: float, gamma: float, tol: float = DEFAULT_TOL,
        max_k: int = DEFAULT_MAX_ITER, normalize: bool = True) -> RankResult:
    """Weighted citation chains: ``sum_{k>=1} alpha^(k-1) R^k 1``.

    ``R[i, j] = gamma ** age(j)`` when ``j`` cites ``i``.  Summation stops
    once a term's L1 norm falls below ``tol`` times the running total, or the
    chain length reaches ``max_k``; at ``max_k`` the terms must at least be
    shrinking, otherwise the series is declared divergent.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameters(f"alpha={alpha} outside [0, 1]")
    _check_ram_gamma(gamma)
    w = citation_weights(g, gamma)
    term = g._gather_citations(w)
    total = term.copy()
    residuals = [float(term.sum())]
    k = 1
    while alpha > 0 and residuals[-1] > 0:
        if k >= max_k:
            if len(residuals) > 1 and residuals[-1] < residuals[-2]:
                break
            raise NoConvergence("ecm chain series is not shrinking", residuals[-1], residuals, k)
        term = alpha * g._gather_citations_weighted(w, term)
        total += term
        k += 1
        residuals.append(float(term.sum()))
        if residuals[-1] < tol * total.sum():
            break
    return RankResult(_normalised(total) if normalize else total, k, residuals)

"""Column-stochastic transition operator and PageRank solvers.

The operator is never materialised: a product ``S @ x`` spreads ``x[j] / k_j``
over the references of paper ``j`` and smears the mass of dangling papers
(no references) uniformly.  Contraction of reference-only future papers into an
adjusted teleport vector lives here too.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from impactrank.corpus import CitationGraph
from impactrank.errors import (
    ContractionPreconditionViolated,
    DimensionMismatch,
    InvalidParameters,
    NoConvergence,
    SingularSystem,
)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200
DENSE_ORACLE_LIMIT = 2000


@dataclass
class RankResult:
    """Scores from an iterative solver plus its convergence record."""

    scores: np.ndarray
    iterations: int
    residuals: list = field(default_factory=list)

    def __iter__(self):
        # allows ``scores, iterations = pagerank(...)``
        yield self.scores
        yield self.iterations


class TransitionView:
    """The stochastic matrix S of a citation graph.

    Column ``j`` is uniform over the references of ``j``.  A dangling column
    (no references) is uniform over the first ``dangling_support`` papers,
    which defaults to all of them.  Restricting the support is what makes a
    graph with trailing reference-only papers fit the block form needed for
    contraction (nothing flows into the trailing papers).
    """

    def __init__(self, graph: CitationGraph, dangling_support: int | None = None):
        self.graph = graph
        self.n = graph.paper_count
        if dangling_support is None:
            dangling_support = self.n
        if not 1 <= dangling_support <= max(self.n, 1):
            raise ValueError(f"dangling_support {dangling_support} outside [1, {self.n}]")
        self.dangling_support = int(dangling_support)
        k = graph.out_degree
        self.dangling_set = np.flatnonzero(k == 0)
        with np.errstate(divide="ignore"):
            inv = np.where(k > 0, 1.0 / np.maximum(k, 1), 0.0)
        self.inv_out_degree = inv
        self.inv_out_degree.setflags(write=False)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return matvec(self, x)

    def to_dense(self) -> np.ndarray:
        """Explicit S; test-scale graphs only."""
        n = self.n
        S = np.zeros((n, n))
        src, dst = self.graph.edges()
        S[dst, src] = self.inv_out_degree[src]
        S[: self.dangling_support, self.dangling_set] = 1.0 / self.dangling_support
        return S


def matvec(S: TransitionView, x: np.ndarray) -> np.ndarray:
    """Sparse product ``S @ x``; preserves the sum of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (S.n,):
        raise DimensionMismatch(f"vector of shape {x.shape} for operator of size {S.n}")
    out = S.graph._gather_citations(x * S.inv_out_degree)
    if S.dangling_set.size:
        out[: S.dangling_support] += x[S.dangling_set].sum() / S.dangling_support
    return out


def check_distribution(u, n: int, name: str = "teleport vector", atol: float = 1e-12) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (n,):
        raise DimensionMismatch(f"{name} has shape {u.shape}, expected ({n},)")
    if not np.all(np.isfinite(u)) or np.any(u < 0):
        raise InvalidParameters(f"{name} must be finite and nonnegative")
    if abs(u.sum() - 1.0) > atol:
        raise InvalidParameters(f"{name} sums to {u.sum()!r}, expected 1")
    return u


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def power_iterate(step, x0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, what="power iteration"):
    """Run ``x <- step(x)`` from ``x0`` until the L1 change drops below ``tol``."""
    x = x0
    residuals = []
    for it in range(1, max_iter + 1):
        nxt = step(x)
        res = float(np.abs(nxt - x).sum())
        residuals.append(res)
        x = nxt
        if res < tol:
            return RankResult(x, it, residuals)
    raise NoConvergence(f"{what} did not converge", residuals[-1] if residuals else np.nan,
                        residuals, max_iter)


def _check_alpha(alpha):
    if not 0.0 <= alpha < 1.0:
        raise InvalidParameters(f"alpha={alpha} outside [0, 1)")


def pagerank(S: TransitionView, u=None, alpha: float = 0.5, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER) -> RankResult:
    """PageRank of S with respect to teleport vector ``u`` (uniform if None).

    Iterates ``v <- alpha S v + (1 - alpha) u`` starting from ``v = u``.
    """
    _check_alpha(alpha)
    u = uniform(S.n) if u is None else check_distribution(u, S.n)
    jump = (1.0 - alpha) * u
    return power_iterate(lambda v: alpha * matvec(S, v) + jump, u.copy(), tol, max_iter, "pagerank")


def pagerank_dense_oracle(S_dense, u, alpha: float) -> np.ndarray:
    """Solve ``(I - alpha S) v = (1 - alpha) u`` directly."""
    S_dense = np.asarray(S_dense, dtype=np.float64)
    n = S_dense.shape[0]
    if S_dense.shape != (n, n):
        raise DimensionMismatch("dense operator must be square")
    if n > DENSE_ORACLE_LIMIT:
        raise ValueError(f"dense oracle limited to n <= {DENSE_ORACLE_LIMIT}")
    _check_alpha(alpha)
    u = np.asarray(u, dtype=np.float64)
    A = np.eye(n) - alpha * S_dense
    try:
        return np.linalg.solve(A, (1.0 - alpha) * u)
    except np.linalg.LinAlgError as exc:  # cannot happen for alpha < 1
        raise SingularSystem(str(exc)) from None


def _check_contractible(S_full: TransitionView, n: int):
    g = S_full.graph
    total = g.paper_count
    if not 0 < n <= total:
        raise ContractionPreconditionViolated(f"prefix size {n} outside (0, {total}]")
    if n == total:
        return
    if np.any(g.in_degree[n:] > 0):
        raise ContractionPreconditionViolated("a paper beyond the prefix is cited")
    src, dst = g.edges()
    if np.any(dst[src >= n] >= n):
        raise ContractionPreconditionViolated("a paper beyond the prefix cites another such paper")
    if np.any(g.out_degree[n:] == 0):
        raise ContractionPreconditionViolated("a paper beyond the prefix is dangling")
    if S_full.dangling_set.size and S_full.dangling_support > n:
        raise ContractionPreconditionViolated(
            "dangling papers leak mass beyond the prefix; build the view with dangling_support <= n"
        )


def adjusted_teleport(S_full: TransitionView, u_full, alpha: float, n: int) -> tuple[np.ndarray, float]:
    """Fold the trailing papers ``n..`` into the teleport vector of the prefix.

    Returns ``(u_adj, mass)`` where ``u_adj = u[:n] + alpha * sum_i u[n+i] S[:n, n+i]``
    is left unnormalised and ``mass`` is its sum.
    """
    _check_alpha(alpha)
    u_full = check_distribution(u_full, S_full.n)
    _check_contractible(S_full, n)
    g = S_full.graph
    w = np.zeros(g.paper_count)
    w[n:] = u_full[n:] * S_full.inv_out_degree[n:]
    spill = g._gather_citations(w)[:n]
    u_adj = u_full[:n] + alpha * spill
    return u_adj, float(u_adj.sum())


def contracted_pagerank(S_full: TransitionView, u_full, alpha: float, n: int,
                        tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> RankResult:
    """First ``n`` entries of the PageRank of ``S_full``, computed on the prefix only."""
    u_adj, mass = adjusted_teleport(S_full, u_full, alpha, n)
    S_prefix = TransitionView(S_full.graph.prefix(n), dangling_support=min(S_full.dangling_support, n))
    res = pagerank(S_prefix, u_adj / mass, alpha, tol, max_iter)
    res.scores = mass * res.scores
    return res

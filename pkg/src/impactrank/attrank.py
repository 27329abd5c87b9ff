"""AttRank: reference following mixed with attention and recency teleports.

The score vector solves::

    y = alpha * S y + beta * A + gamma * T

where ``A`` is the recent-attention distribution (citations received from
papers of the last ``y`` years) and ``T`` decays exponentially with paper age.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from impactrank.corpus import CitationGraph
from impactrank.errors import EmptyWindow, InsufficientTail, InvalidParameters
from impactrank.walkcore import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    RankResult,
    TransitionView,
    matvec,
    power_iterate,
)

SUM_TOL = 1e-12


class AttentionMode(str, enum.Enum):
    COUNT_FRACTION = "count_fraction"
    WEIGHTED_REFERENCE = "weighted_reference"

    @classmethod
    def parse(cls, value) -> "AttentionMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            try:
                return cls[str(value).strip().upper()]
            except KeyError:
                raise InvalidParameters(f"unknown attention mode {value!r}") from None


@dataclass(frozen=True)
class AttRankParams:
    alpha: float
    beta: float
    gamma: float
    eta: float = 0.0
    y: int = 1
    attention_mode: AttentionMode = AttentionMode.COUNT_FRACTION

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise InvalidParameters(f"{name}={v} outside [0, 1]")
        total = self.alpha + self.beta + self.gamma
        if abs(total - 1.0) > SUM_TOL:
            raise InvalidParameters(f"alpha+beta+gamma = {total!r}, must equal 1")
        if self.alpha >= 1.0:
            raise InvalidParameters("alpha must be < 1")
        if not self.eta <= 0.0:
            raise InvalidParameters(f"eta={self.eta} must be <= 0")
        if int(self.y) != self.y or self.y < 1:
            raise InvalidParameters(f"y={self.y} must be a positive integer")
        object.__setattr__(self, "y", int(self.y))
        object.__setattr__(self, "attention_mode", AttentionMode.parse(self.attention_mode))

    @classmethod
    def complete(cls, alpha=None, beta=None, gamma=None, **kw) -> "AttRankParams":
        """Fill in at most one missing coefficient so the three sum to 1."""
        given = {"alpha": alpha, "beta": beta, "gamma": gamma}
        missing = [k for k, v in given.items() if v is None]
        if len(missing) > 1:
            raise InvalidParameters(f"need at least two of alpha, beta, gamma; missing {missing}")
        if missing:
            rest = sum(v for v in given.values() if v is not None)
            if rest > 1.0 + SUM_TOL:
                names = "+".join(k for k in given if k not in missing)
                raise InvalidParameters(f"{names} exceeds 1")
            # snap to the decimal grid so 1 - 0.3 - 0.4 is 0.3, not 0.30000000000000004
            given[missing[0]] = round(max(0.0, 1.0 - rest), 12)
        return cls(**given, **kw)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["attention_mode"] = self.attention_mode.value
        return d


def attention_window(g: CitationGraph, y: int) -> np.ndarray:
    """Mask of papers published in the last ``y`` years of the view."""
    return g.pub_year > g.newest_year - y


def attention_counts(g: CitationGraph, y: int, mode=AttentionMode.COUNT_FRACTION) -> np.ndarray:
    """Unnormalised attention: citation counts (or reference-weighted mass)
    received from papers in the window."""
    if y < 1:
        raise InvalidParameters(f"y={y} must be >= 1")
    mode = AttentionMode.parse(mode)
    window = attention_window(g, y)
    if mode is AttentionMode.COUNT_FRACTION:
        return g._count_citations_from(window).astype(np.float64)
    # linear year weights: newest year y, the year before y - 1, ...
    weight = np.where(window, y - (g.newest_year - g.pub_year), 0).astype(np.float64)
    k = g.out_degree
    w = np.where(k > 0, weight / np.maximum(k, 1), 0.0)
    return g._gather_citations(w)


def _normalise(counts: np.ndarray) -> np.ndarray:
    total = counts.sum()
    if not total > 0:
        raise EmptyWindow("no citations originate in the attention window")
    return counts / total


def attention_vector(g: CitationGraph, y: int, mode=AttentionMode.COUNT_FRACTION) -> np.ndarray:
    """Recent-attention teleport distribution over the papers of ``g``."""
    return _normalise(attention_counts(g, y, mode))


def recency_vector(g: CitationGraph, eta: float) -> np.ndarray:
    """``exp(eta * age)`` normalised to sum 1; age in years from the newest paper."""
    raw = np.exp(eta * g.age_years.astype(np.float64))
    return raw / raw.sum()


def fit_eta(dist, tail_start: int = 0) -> float:
    """Least-squares slope of ``log p(age)`` over the tail ``age >= tail_start``.

    Buckets with zero probability are skipped.
    """
    dist = np.asarray(dist, dtype=np.float64)
    ages = np.arange(dist.size)
    sel = (ages >= tail_start) & (dist > 0)
    if sel.sum() < 3:
        raise InsufficientTail(f"only {int(sel.sum())} positive tail buckets from age {tail_start}")
    slope, _ = np.polyfit(ages[sel].astype(np.float64), np.log(dist[sel]), 1)
    return float(slope)


def default_tail_start(dist) -> int:
    """Age of the distribution's peak; the tail is everything after it."""
    return int(np.argmax(np.asarray(dist)))


def attrank_solve(g: CitationGraph, params: AttRankParams, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER, attention=None) -> RankResult:
    """Iterate ``y <- alpha S y + beta A + gamma T`` to its fixed point.

    Starts from the uniform vector.  With ``alpha = 0`` the update ignores its
    input, so the teleport mix is returned after one step.  ``attention`` may
    carry precomputed, unnormalised attention counts.
    """
    n = g.paper_count
    if n < 1:
        raise InvalidParameters("graph has no papers")
    jump = np.zeros(n)
    if params.beta > 0:
        if attention is None:
            counts = attention_counts(g, params.y, params.attention_mode)
        else:
            counts = np.asarray(attention, dtype=np.float64)
        jump += params.beta * _normalise(counts)
    if params.gamma > 0:
        jump += params.gamma * recency_vector(g, params.eta)
    if params.alpha == 0.0:
        return RankResult(jump, 1, [float(np.abs(jump - 1.0 / n).sum())])
    S = TransitionView(g)
    alpha = params.alpha
    return power_iterate(lambda v: alpha * matvec(S, v) + jump, np.full(n, 1.0 / n), tol, max_iter, "attrank")


def explicit_matrix(g: CitationGraph, params: AttRankParams) -> np.ndarray:
    """Dense ``R[i, j] = alpha S[i, j] + beta A[i] + gamma T[i]``; small graphs only."""
    S = TransitionView(g).to_dense()
    A = attention_vector(g, params.y, params.attention_mode) if params.beta > 0 else np.zeros(g.paper_count)
    T = recency_vector(g, params.eta)
    return params.alpha * S + (params.beta * A + params.gamma * T)[:, None]


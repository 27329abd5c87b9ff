"""Citation data ingestion, temporal ordering and current/future splits.

Papers are stored in publication order: internal index ``i < j`` implies
``pub_time[i] <= pub_time[j]``.  Edges are kept twice, as CSR arrays keyed by
the citing paper (references) and keyed by the cited paper (citations).
"""

from __future__ import annotations

import datetime as _dt
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from impactrank import _kernels
from impactrank.errors import EmptyGraph, MalformedRecord, MissingMetadata, RatioOutOfRange

log = logging.getLogger(__name__)

#: ``pub_time`` values at or above this are ordinal days, below it plain years.
DAY_ORDINAL_THRESHOLD = 100_000


def _frozen(a, dtype=np.int64):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _csr(rows, cols, n):
    """CSR (ptr, idx, row_of) with rows sorted, columns ascending within a row."""
    order = np.lexsort((cols, rows))
    rows = rows[order]
    cols = cols[order]
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=ptr[1:])
    return _frozen(ptr), _frozen(cols), _frozen(rows)


class CitationGraph:
    """Immutable, temporally ordered citation network.

    Parameters
    ----------
    ids : sequence of str
        External paper identifiers, already in temporal order.
    pub_time : array of int
        Publication time per paper; years, or ordinal days for day-resolution
        input.
    citing, cited : arrays of int
        Edge endpoints as internal indices (``citing`` cites ``cited``).
        Must already be deduplicated and free of self-loops.
    authors : optional sequence of tuples of str
    pub_year : optional array of int
        Calendar year per paper; derived from ``pub_time`` when omitted.
    """

    def __init__(self, ids, pub_time, citing, cited, authors=None, pub_year=None, stats=None):
        n = len(ids)
        self.ids = tuple(ids)
        self.paper_count = n
        self.pub_time = _frozen(pub_time)
        if pub_year is None:
            pub_year = _year_of(self.pub_time)
        self.pub_year = _frozen(pub_year)
        citing = np.asarray(citing, dtype=np.int64)
        cited = np.asarray(cited, dtype=np.int64)
        self.ref_ptr, self.ref_idx, self._ref_row = _csr(citing, cited, n)
        self.cit_ptr, self.cit_idx, self._cit_row = _csr(cited, citing, n)
        self.authors = None if authors is None else tuple(tuple(a) for a in authors)
        self.stats = dict(stats or {})
        if n > 1 and np.any(np.diff(self.pub_time) < 0):
            raise ValueError("papers must be in non-decreasing publication order")

    # -- structure -----------------------------------------------------------

    @property
    def edge_count(self) -> int:
        return int(self.ref_idx.shape[0])

    @property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.ref_ptr)

    @property
    def in_degree(self) -> np.ndarray:
        return np.diff(self.cit_ptr)

    def out_edges(self, j: int) -> np.ndarray:
        """Indices of the papers referenced by ``j``."""
        return self.ref_idx[self.ref_ptr[j]:self.ref_ptr[j + 1]]

    def in_edges(self, i: int) -> np.ndarray:
        """Indices of the papers citing ``i``."""
        return self.cit_idx[self.cit_ptr[i]:self.cit_ptr[i + 1]]

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(citing, cited) arrays, sorted by citing paper."""
        return self._ref_row, self.ref_idx

    @property
    def newest_year(self) -> int:
        if self.paper_count == 0:
            raise EmptyGraph("graph has no papers")
        return int(self.pub_year[-1])

    @property
    def age_years(self) -> np.ndarray:
        """Age of every paper in years, measured from the newest paper."""
        return self.newest_year - self.pub_year

    def index_of(self, paper_id: str) -> int:
        try:
            lookup = self._lookup
        except AttributeError:
            lookup = self._lookup = {pid: i for i, pid in enumerate(self.ids)}
        return lookup[paper_id]

    def prefix(self, n: int) -> "CitationGraph":
        """Induced subgraph on the ``n`` oldest papers.

        The result owns fresh arrays; nothing in it refers back to papers
        beyond the prefix.
        """
        if not 0 <= n <= self.paper_count:
            raise ValueError(f"prefix size {n} outside [0, {self.paper_count}]")
        src, dst = self.edges()
        keep = (src < n) & (dst < n)
        authors = None if self.authors is None else self.authors[:n]
        return CitationGraph(
            self.ids[:n], self.pub_time[:n].copy(), src[keep].copy(), dst[keep].copy(),
            authors=authors, pub_year=self.pub_year[:n].copy(),
        )

    # numba/numpy gather helpers; internal but shared with the solver modules
    def _gather_citations(self, w):
        """out[i] = sum of w[j] over papers j citing i."""
        return _kernels.gather_sum(self.cit_ptr, self.cit_idx, self._cit_row, w)

    def _gather_citations_weighted(self, w, x):
        return _kernels.gather_weighted(self.cit_ptr, self.cit_idx, self._cit_row, w, x)

    def _count_citations_from(self, mask):
        return _kernels.count_rows_masked(self.cit_ptr, self.cit_idx, self._cit_row, mask)

    def __repr__(self):
        return f"CitationGraph(papers={self.paper_count}, edges={self.edge_count})"


def _year_of(pub_time: np.ndarray) -> np.ndarray:
    pub_time = np.asarray(pub_time, dtype=np.int64)
    if pub_time.size == 0 or pub_time.max() < DAY_ORDINAL_THRESHOLD:
        return pub_time.copy()
    return np.array(
        [_dt.date.fromordinal(int(t)).year if t >= DAY_ORDINAL_THRESHOLD else int(t) for t in pub_time],
        dtype=np.int64,
    )


def parse_time(text: str) -> tuple[int, bool]:
    """Parse a year or ISO date; returns (value, is_day_resolution)."""
    text = text.strip()
    if text.lstrip("-").isdigit():
        return int(text), False
    return _dt.date.fromisoformat(text).toordinal(), True


def _id_key(pid: str):
    # numeric ids sort numerically, others lexically after them
    return (0, int(pid), "") if pid.isdigit() else (1, 0, pid)


def load_graph(edge_source: Iterable[Sequence], meta_source: Iterable[Sequence]) -> CitationGraph:
    """Build a :class:`CitationGraph` from edge and metadata records.

    ``meta_source`` yields ``(paper_id, pub_time[, authors])`` where
    ``pub_time`` is an int year, an ISO date string or an int-like string and
    ``authors`` is an iterable of author ids.  ``edge_source`` yields
    ``(citing_id, cited_id)``.

    Self-citations, duplicate edges and impossible citations (citing paper
    published before the cited one) are dropped; the counts end up in
    ``graph.stats``.
    """
    raw_ids, raw_times, raw_day, raw_auth = [], [], [], []
    seen = set()
    for rec in meta_source:
        if len(rec) < 2:
            raise MalformedRecord(rec, "expected paper_id and time")
        pid = str(rec[0])
        if pid in seen:
            raise MalformedRecord(rec, f"duplicate paper id {pid!r}")
        seen.add(pid)
        t = rec[1]
        if isinstance(t, (int, np.integer)):
            value, is_day = int(t), False
        else:
            try:
                value, is_day = parse_time(str(t))
            except ValueError as exc:
                raise MalformedRecord(rec, str(exc)) from None
        raw_ids.append(pid)
        raw_times.append(value)
        raw_day.append(is_day)
        raw_auth.append(tuple(rec[2]) if len(rec) > 2 and rec[2] is not None else None)

    if any(raw_day):
        # mixed resolution: year-only records are pinned to January 1st
        raw_times = [
            t if d else _dt.date(t, 1, 1).toordinal() for t, d in zip(raw_times, raw_day)
        ]

    order = sorted(range(len(raw_ids)), key=lambda k: (raw_times[k], _id_key(raw_ids[k])))
    ids = [raw_ids[k] for k in order]
    times = np.array([raw_times[k] for k in order], dtype=np.int64)
    have_authors = any(a is not None for a in raw_auth)
    authors = [raw_auth[k] or () for k in order] if have_authors else None
    index = {pid: i for i, pid in enumerate(ids)}

    src, dst = [], []
    for rec in edge_source:
        if len(rec) != 2:
            raise MalformedRecord(rec, "expected citing_id and cited_id")
        a, b = str(rec[0]), str(rec[1])
        for pid in (a, b):
            if pid not in index:
                raise MissingMetadata(pid)
        src.append(index[a])
        dst.append(index[b])
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)

    total = int(src.size)
    self_loop = src == dst
    impossible = times[src] < times[dst]
    keep = ~(self_loop | impossible)
    src, dst = src[keep], dst[keep]
    n = len(ids)
    if src.size:
        code = np.unique(src * n + dst)
        src, dst = code // n, code % n
    stats = {
        "edges_read": total,
        "self_citations_dropped": int(self_loop.sum()),
        "impossible_citations_dropped": int((impossible & ~self_loop).sum()),
        "duplicates_dropped": int(keep.sum() - src.size),
    }
    if stats["impossible_citations_dropped"]:
        log.warning("dropped %d impossible citations", stats["impossible_citations_dropped"])
    return CitationGraph(ids, times, src, dst, authors=authors, stats=stats)


def _records(path, min_fields, max_fields=None):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < min_fields or (max_fields and len(parts) > max_fields):
                raise MalformedRecord(line, "wrong number of tab-separated fields", lineno)
            if any(not p.strip() for p in parts[:min_fields]):
                raise MalformedRecord(line, "empty field", lineno)
            yield lineno, line, [p.strip() for p in parts]


def read_edges(path) -> list[tuple[str, str]]:
    """Read a ``citing_id<TAB>cited_id`` edge file."""
    return [(p[0], p[1]) for _, _, p in _records(path, 2, 2)]


def read_metadata(path) -> list[tuple]:
    """Read a ``paper_id<TAB>year_or_date[<TAB>authors]`` metadata file."""
    out = []
    for lineno, line, p in _records(path, 2, 3):
        try:
            parse_time(p[1])
        except ValueError:
            raise MalformedRecord(line, f"unparseable time {p[1]!r}", lineno) from None
        authors = tuple(a for a in p[2].split(";") if a) if len(p) == 3 else None
        out.append((p[0], p[1], authors))
    return out


def load_files(edges_path, meta_path) -> CitationGraph:
    return load_graph(read_edges(edges_path), read_metadata(meta_path))


# -- splits -------------------------------------------------------------------


@dataclass(frozen=True)
class SplitView:
    """A current/future pair of prefix views and the short-term impact vector.

    ``current`` is a standalone graph over the oldest ``n_current`` papers; it
    holds no reference to the future papers or their edges.
    """

    current: CitationGraph
    future: CitationGraph
    test_ratio: Fraction
    sti: np.ndarray

    @property
    def n_current(self) -> int:
        return self.current.paper_count

    @property
    def n_future(self) -> int:
        return self.future.paper_count


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def split_sizes(paper_count: int, test_ratio) -> tuple[int, int]:
    r = _as_fraction(test_ratio)
    if r < 1 or r > 2:
        raise RatioOutOfRange(f"test ratio {float(r)} outside [1, 2]")
    n_current = paper_count // 2
    n_future = min(math.floor(r * n_current), paper_count)
    return n_current, n_future


def short_term_impact(future: CitationGraph, n_current: int) -> np.ndarray:
    """Citations received by each of the first ``n_current`` papers from
    papers with index in ``[n_current, future.paper_count)``."""
    src, dst = future.edges()
    sel = (src >= n_current) & (dst < n_current)
    return np.bincount(dst[sel], minlength=n_current).astype(np.float64)


def temporal_split(g: CitationGraph, test_ratio) -> SplitView:
    """Split by paper count: the older half is the current state, and the
    future state holds ``floor(test_ratio * n_current)`` papers."""
    if g.paper_count < 2:
        raise EmptyGraph("need at least two papers to split")
    n_current, n_future = split_sizes(g.paper_count, test_ratio)
    future = g.prefix(n_future)
    current = future.prefix(n_current)
    sti = short_term_impact(future, n_current)
    sti.setflags(write=False)
    return SplitView(current, future, _as_fraction(test_ratio), sti)


def citation_age_distribution(g: CitationGraph, max_age: int = 10) -> np.ndarray:
    """Fraction of citations made ``a`` years after the cited paper appeared,
    for ``a = 0..max_age``; older citations are discarded."""
    if g.edge_count == 0:
        raise EmptyGraph("graph has no citations")
    src, dst = g.edges()
    ages = g.pub_year[src] - g.pub_year[dst]
    ages = ages[(ages >= 0) & (ages <= max_age)]
    counts = np.bincount(ages, minlength=max_age + 1).astype(np.float64)
    total = counts.sum()
    if total == 0:
        raise EmptyGraph(f"no citations with age <= {max_age}")
    return counts / total

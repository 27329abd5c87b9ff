"""Experiment orchestration: method registry, evaluation, grid sweeps."""

from __future__ import annotations

import csv
import inspect
import io
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from impactrank import attrank as _att
from impactrank import baselines as _bl
from impactrank.corpus import CitationGraph, SplitView
from impactrank.errors import ImpactRankError, InvalidParameters
from impactrank.metrics import DEFAULT_KS, EvalReport, ndcg_at_k, ranking_from_scores, spearman_rho
from impactrank.walkcore import DEFAULT_MAX_ITER, DEFAULT_TOL, RankResult, TransitionView, pagerank


def _run_attrank(g, alpha, beta, gamma, eta=0.0, y=1, attention_mode="count_fraction",
                 tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    params = _att.AttRankParams(alpha, beta, gamma, eta, y, attention_mode)
    return _att.attrank_solve(g, params, tol, max_iter)


def _run_pagerank(g, alpha, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    return pagerank(TransitionView(g), None, alpha, tol, max_iter)


def _run_ram(g, gamma, tol=None, max_iter=None):
    return RankResult(_bl.ram(g, gamma), 0, [])


def _run_ecm(g, alpha, gamma, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    return _bl.ecm(g, alpha, gamma, tol, max_iter)


#: name -> (runner, parameter names in canonical order)
METHODS: dict[str, tuple[Callable, tuple[str, ...]]] = {
    "attrank": (_run_attrank, ("alpha", "beta", "gamma", "eta", "y", "attention_mode")),
    "pagerank": (_run_pagerank, ("alpha",)),
    "citerank": (_bl.citerank, ("alpha", "tau_dir")),
    "futurerank": (_bl.futurerank, ("alpha", "beta", "gamma", "rho")),
    "ram": (_run_ram, ("gamma",)),
    "ecm": (_run_ecm, ("alpha", "gamma")),
}


@dataclass
class Method:
    """A named ranking method bound to its parameters."""

    name: str
    params: dict = field(default_factory=dict)
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.name not in METHODS:
            raise InvalidParameters(f"unknown method {self.name!r}; choose from {sorted(METHODS)}")
        allowed = METHODS[self.name][1]
        extra = set(self.params) - set(allowed)
        if extra:
            raise InvalidParameters(f"{self.name} does not take {sorted(extra)}")
        sig = inspect.signature(METHODS[self.name][0])
        missing = [p for p in allowed if p in sig.parameters
                   and sig.parameters[p].default is inspect.Parameter.empty and p not in self.params]
        if missing:
            raise InvalidParameters(f"{self.name} needs {missing}")

    def __call__(self, g: CitationGraph) -> RankResult:
        runner = METHODS[self.name][0]
        return runner(g, **self.params, tol=self.tol, max_iter=self.max_iter)


def _as_result(out) -> RankResult:
    if isinstance(out, RankResult):
        return out
    return RankResult(np.asarray(out, dtype=np.float64), 0, [])


def evaluate(method, split: SplitView, ks=DEFAULT_KS, exclude_zero_truth: bool = True) -> EvalReport:
    """Rank the current view with ``method`` and score it against the STI.

    ``method`` is a :class:`Method` or any callable taking a
    :class:`CitationGraph` and returning scores or a :class:`RankResult`.  The
    callable only ever sees ``split.current``.  Method and metric failures are
    recorded in the report instead of raised.
    """
    name = getattr(method, "name", getattr(method, "__name__", "custom"))
    params = dict(getattr(method, "params", {}))
    ks = tuple(int(k) for k in ks)
    nan_ndcg = {k: math.nan for k in ks}
    truth = split.sti
    n_eval = int(np.count_nonzero(truth)) if exclude_zero_truth else int(truth.size)
    t0 = time.perf_counter()
    try:
        res = _as_result(method(split.current))
    except ImpactRankError as exc:
        ms = (time.perf_counter() - t0) * 1e3
        return EvalReport(name, params, math.nan, nan_ndcg, n_eval, getattr(exc, "iterations", None),
                          ms, exclude_zero_truth, f"{type(exc).__name__}: {exc}")
    ms = (time.perf_counter() - t0) * 1e3
    if res.scores.shape != truth.shape:
        return EvalReport(name, params, math.nan, nan_ndcg, n_eval, res.iterations, ms,
                          exclude_zero_truth, f"DimensionMismatch: {res.scores.shape} vs {truth.shape}")
    errors = []
    try:
        rho = spearman_rho(res.scores, truth, exclude_zero_truth)
    except ImpactRankError as exc:
        rho = math.nan
        errors.append(f"{type(exc).__name__}: {exc}")
    ranking = ranking_from_scores(res.scores)
    ndcg = {}
    for k in ks:
        try:
            ndcg[k] = ndcg_at_k(ranking, truth, k)
        except ImpactRankError as exc:
            ndcg[k] = math.nan
            if not errors or type(exc).__name__ not in errors[-1]:
                errors.append(f"{type(exc).__name__}: {exc}")
    return EvalReport(name, params, rho, ndcg, n_eval, res.iterations, ms, exclude_zero_truth,
                      "; ".join(errors) or None)


def convergence_report(method, split_or_graph) -> tuple[int, list]:
    """Iterations to convergence and the per-iteration L1 residual trace.

    Non-convergence propagates as :class:`NoConvergence`, which carries the
    partial trace.
    """
    g = split_or_graph.current if isinstance(split_or_graph, SplitView) else split_or_graph
    res = method(g)
    return res.iterations, list(res.residuals)


# -- grids --------------------------------------------------------------------


def _axis_values(lo, hi, step):
    if not step > 0:
        raise InvalidParameters("grid step must be > 0")
    if lo > hi:
        raise InvalidParameters("grid min exceeds max")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    vals = [round(lo + i * step, 10) for i in range(count)]
    if all(float(v).is_integer() for v in (lo, hi, step)):
        vals = [int(v) for v in vals]
    return vals


@dataclass
class SweepGrid:
    """Cartesian grid over ``axes`` with an optional sum-to-one completion.

    ``axes`` maps parameter name to ``(min, max, step)``.  When ``implied`` is
    given as ``(name, lo, hi, sources)``, that parameter is set to
    ``1 - sum(sources)`` and cells where it falls outside ``[lo, hi]`` are
    dropped.  ``fixed`` parameters are passed to every cell unchanged.
    """

    axes: dict
    implied: tuple | None = None
    fixed: dict = field(default_factory=dict)

    def columns(self) -> list[str]:
        cols = list(self.axes)
        if self.implied:
            name, _, _, sources = self.implied
            # the implied coefficient sits right after the ones it completes
            at = max((cols.index(s) + 1 for s in sources if s in cols), default=len(cols))
            cols.insert(at, name)
        return cols

    def cells(self) -> list[dict]:
        names = list(self.axes)
        values = [_axis_values(*self.axes[k]) for k in names]
        out = []
        for combo in itertools.product(*values):
            cell = dict(zip(names, combo))
            if self.implied:
                name, lo, hi, sources = self.implied
                v = round(1.0 - sum(cell[s] for s in sources), 10)
                if v < lo - 1e-9 or v > hi + 1e-9:
                    continue
                cell[name] = max(v, 0.0)
            out.append(cell)
        return out


def default_grid(method: str, **fixed) -> SweepGrid:
    """The parameter spaces used to tune each method."""
    if method == "attrank":
        return SweepGrid({"alpha": (0.0, 0.5, 0.1), "beta": (0.0, 1.0, 0.1), "y": (1, 5, 1)},
                         ("gamma", 0.0, 0.9, ("alpha", "beta")), fixed)
    if method == "citerank":
        return SweepGrid({"alpha": (0.1, 0.7, 0.2), "tau_dir": (2, 10, 2)}, None, fixed)
    if method == "futurerank":
        return SweepGrid({"alpha": (0.1, 0.5, 0.1), "beta": (0.0, 0.9, 0.1), "rho": (-0.82, -0.42, 0.2)},
                         ("gamma", 0.0, 0.9, ("alpha", "beta")), fixed)
    if method == "ram":
        return SweepGrid({"gamma": (0.1, 0.9, 0.1)}, None, fixed)
    if method == "ecm":
        return SweepGrid({"alpha": (0.1, 0.5, 0.1), "gamma": (0.1, 0.5, 0.1)}, None, fixed)
    if method == "pagerank":
        return SweepGrid({"alpha": (0.1, 0.9, 0.1)}, None, fixed)
    raise InvalidParameters(f"no default grid for {method!r}")


@dataclass
class SweepResult:
    method: str
    metric: str
    columns: list
    rows: list  # (cell dict, value, error or None)
    best: dict | None
    best_value: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.columns, "metric", "value", "error"])
        for cell, value, err in self.rows:
            w.writerow([*(_fmt(cell[c]) for c in self.columns), self.metric, _fmt(value), err or ""])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _metric_label(metric: str, k: int) -> str:
    if metric == "spearman":
        return "spearman"
    if metric == "ndcg":
        return f"ndcg@{k}"
    raise InvalidParameters(f"unknown metric {metric!r}")


def sweep(method: str, grid: SweepGrid, split: SplitView, metric: str = "spearman", k: int = 50,
          jobs: int = 1, exclude_zero_truth: bool = True, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER) -> SweepResult:
    """Evaluate every grid cell; failed cells become NaN rows with an error."""
    label = _metric_label(metric, k)
    cells = grid.cells()
    if not cells:
        raise InvalidParameters("grid is empty after constraints")

    def run(cell):
        try:
            m = Method(method, {**grid.fixed, **cell}, tol, max_iter)
        except ImpactRankError as exc:
            return math.nan, f"{type(exc).__name__}: {exc}"
        rep = evaluate(m, split, (k,), exclude_zero_truth)
        value = rep.spearman if metric == "spearman" else rep.ndcg[k]
        return value, rep.error if math.isnan(value) else None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]

    rows = [(c, v, e) for c, (v, e) in zip(cells, results)]
    best, best_value = None, -math.inf
    for cell, value, _ in rows:
        if not math.isnan(value) and value > best_value:
            best, best_value = cell, value
    return SweepResult(method, label, grid.columns(), rows, best, best_value if best else math.nan)

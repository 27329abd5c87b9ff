import math

import numpy as np
import pytest

from impactrank.corpus import CitationGraph, temporal_split
from impactrank.errors import InvalidParameters, NoConvergence
from impactrank.harness import (
    METHODS,
    Method,
    SweepGrid,
    convergence_report,
    default_grid,
    evaluate,
    sweep,
)
from impactrank.synthetic import random_citation_dag
from oracles import grid_cell_count


@pytest.fixture(scope="module")
def split():
    g = random_citation_dag(400, 11, n_years=20, n_authors=40)
    return temporal_split(g, 1.6)


def test_identity_oracle_ranking(split):
    rep = evaluate(lambda g: split.sti.copy(), split)
    assert rep.spearman == 1.0
    assert all(v == 1.0 for v in rep.ndcg.values())
    assert rep.error is None
    rev = evaluate(lambda g: -split.sti, split)
    assert rev.spearman == -1.0


def test_n_evaluated(split):
    nz = int(np.count_nonzero(split.sti))
    assert evaluate(Method("ram", {"gamma": 0.5}), split).n_evaluated == nz
    assert evaluate(Method("ram", {"gamma": 0.5}), split, exclude_zero_truth=False).n_evaluated == split.n_current


def _root(a):
    while isinstance(a, np.ndarray) and a.base is not None:
        a = a.base
    return a


def test_method_cannot_see_future(split):
    seen = {}

    def snoop(g):
        seen["graph"] = g
        return np.ones(g.paper_count)

    evaluate(snoop, split)
    g = seen["graph"]
    assert isinstance(g, CitationGraph)
    assert g is not split.future
    assert g.paper_count == split.n_current
    assert g.edge_count == split.current.edge_count
    src, dst = g.edges()
    assert src.max() < split.n_current and dst.max() < split.n_current
    future_only = split.future.edge_count - split.current.edge_count
    assert future_only > 0
    # every array the method can reach is sized for the current view only
    for name, value in vars(g).items():
        if isinstance(value, np.ndarray):
            assert _root(value).size <= max(g.paper_count + 1, g.edge_count), name
        assert not isinstance(value, CitationGraph)
    assert len(g.ids) == split.n_current and len(g.authors) == split.n_current


def test_evaluate_records_errors(split):
    rep = evaluate(Method("attrank", {"alpha": 0.9, "beta": 0.0, "gamma": 0.1}, max_iter=2), split)
    assert math.isnan(rep.spearman)
    assert rep.error.startswith("NoConvergence")
    bad = evaluate(lambda g: np.ones(3), split)
    assert "DimensionMismatch" in bad.error


def test_method_validation():
    with pytest.raises(InvalidParameters):
        Method("nope")
    with pytest.raises(InvalidParameters):
        Method("ram", {"alpha": 0.1})
    with pytest.raises(InvalidParameters, match="rho"):
        Method("futurerank", {"alpha": 0.1, "beta": 0.1, "gamma": 0.1})
    assert set(METHODS) == {"attrank", "pagerank", "citerank", "futurerank", "ram", "ecm"}


def test_grid_counts():
    assert len(default_grid("attrank").cells()) == grid_cell_count(5, 10, 9, 5) == 250
    fr = sum(1 for a in range(1, 6) for b in range(10) if 0 <= 10 - a - b <= 9) * 3
    assert len(default_grid("futurerank").cells()) == fr == 120
    assert len(default_grid("citerank").cells()) == 20
    assert len(default_grid("ram").cells()) == 9
    assert len(default_grid("ecm").cells()) == 25


def test_grid_cells_unique_and_constrained():
    cells = default_grid("attrank").cells()
    keys = {tuple(sorted(c.items())) for c in cells}
    assert len(keys) == len(cells)
    for c in cells:
        assert abs(c["alpha"] + c["beta"] + c["gamma"] - 1) < 1e-12
        assert 0 <= c["gamma"] <= 0.9 + 1e-12
        assert isinstance(c["y"], int)


def test_grid_columns_keep_coefficients_together():
    assert default_grid("attrank").columns() == ["alpha", "beta", "gamma", "y"]
    assert default_grid("futurerank").columns() == ["alpha", "beta", "gamma", "rho"]


def test_grid_validation():
    with pytest.raises(InvalidParameters):
        SweepGrid({"gamma": (0.1, 0.5, 0.0)}).cells()
    with pytest.raises(InvalidParameters):
        SweepGrid({"gamma": (0.5, 0.1, 0.1)}).cells()
    with pytest.raises(InvalidParameters):
        default_grid("hits")


def test_sweep_deterministic_and_argmax(split):
    grid = default_grid("ecm")
    a = sweep("ecm", grid, split, "ndcg", k=10)
    b = sweep("ecm", grid, split, "ndcg", k=10, jobs=3)
    assert a.to_csv() == b.to_csv()
    values = [v for _, v, _ in a.rows]
    best = int(np.nanargmax(values))
    assert a.best == a.rows[best][0]
    assert a.best_value == values[best]
    lines = a.to_csv().splitlines()
    assert lines[0] == "alpha,gamma,metric,value,error"
    assert len(lines) == 26


def test_sweep_failed_cells_become_nan(split):
    grid = SweepGrid({"alpha": (0.1, 0.9, 0.4)}, fixed={"beta": 0.0, "gamma": 0.0, "rho": -0.5})
    res = sweep("futurerank", grid, split, max_iter=2)
    assert all(math.isnan(v) and e for _, v, e in res.rows)
    assert math.isnan(res.best_value) and res.best is None
    assert ",nan,NoConvergence" in res.to_csv()


def test_attrank_sweep_all_cells(split):
    res = sweep("attrank", default_grid("attrank", eta=-0.3), split, "spearman")
    assert len(res.rows) == 250
    assert all(not math.isnan(v) for _, v, _ in res.rows)


def test_convergence_report(split):
    it, trace = convergence_report(Method("attrank", {"alpha": 0.5, "beta": 0.3, "gamma": 0.2}), split)
    assert it == len(trace)
    assert trace[-1] < 1e-12
    assert all(b <= a + 1e-14 for a, b in zip(trace, trace[1:]))
    it0, _ = convergence_report(Method("attrank", {"alpha": 0.0, "beta": 0.3, "gamma": 0.7}), split)
    assert it0 == 1
    with pytest.raises(NoConvergence) as exc:
        convergence_report(Method("pagerank", {"alpha": 0.85}, max_iter=3), split.current)
    assert len(exc.value.residuals) == 3

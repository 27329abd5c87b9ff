import numpy as np
import pytest

from impactrank.corpus import load_graph


def make_toy():
    """Four papers, one per year 2000-2003; 2->1, 3->1, 3->2, 4->3."""
    meta = [("1", 2000, ("a1",)), ("2", 2001, ("a2",)), ("3", 2002, ("a1",)), ("4", 2003, ("a2",))]
    edges = [("2", "1"), ("3", "1"), ("3", "2"), ("4", "3")]
    return load_graph(edges, meta)


@pytest.fixture
def toy():
    return make_toy()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)

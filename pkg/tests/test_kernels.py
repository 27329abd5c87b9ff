import os
import subprocess
import sys

import numpy as np
import pytest

from impactrank import _kernels
from impactrank.synthetic import preferential_attachment_graph, random_citation_dag

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba path disabled")


def _csr(g):
    return g.cit_ptr, g.cit_idx, g._cit_row


@pytest.mark.parametrize("n", [1, 2, 50, 3000])
def test_numpy_gather_matches_loop(n, rng):
    g = random_citation_dag(n, rng)
    w = rng.random(n)
    expected = np.zeros(n)
    for i in range(n):
        for j in g.in_edges(i):
            expected[i] += w[j]
    np.testing.assert_allclose(_kernels.gather_sum_numpy(*_csr(g), w), expected, atol=1e-12)


@needs_numba
@pytest.mark.parametrize("n", [1, 2, 50, 3000])
def test_backends_agree(n, rng):
    g = random_citation_dag(n, rng)
    w, x = rng.random(n), rng.random(n)
    np.testing.assert_allclose(_kernels.gather_sum_numba(*_csr(g), w),
                               _kernels.gather_sum_numpy(*_csr(g), w), rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(_kernels.gather_weighted_numba(*_csr(g), w, x),
                               _kernels.gather_weighted_numpy(*_csr(g), w, x), rtol=1e-13, atol=1e-13)
    mask = rng.random(n) < 0.3
    np.testing.assert_array_equal(_kernels.count_rows_masked_numba(*_csr(g), mask),
                                  _kernels.count_rows_masked_numpy(*_csr(g), mask))


@needs_numba
def test_backends_agree_large():
    g = preferential_attachment_graph(20_000, refs_per_paper=5, seed=3)
    w = np.linspace(0, 1, g.paper_count)
    np.testing.assert_allclose(_kernels.gather_sum_numba(*_csr(g), w),
                               _kernels.gather_sum_numpy(*_csr(g), w), rtol=1e-12)


def test_env_flag_selects_numpy():
    env = dict(os.environ, IMPACTRANK_DISABLE_NUMBA="1")
    code = "import impactrank._kernels as k; print(k.BACKEND, k.gather_sum is k.gather_sum_numpy)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]

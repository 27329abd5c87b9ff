"""Sparse inner loops over the citation structure.

Every kernel has a numba implementation and a pure-numpy twin with the same
signature.  The numba path is used by default; set ``IMPACTRANK_DISABLE_NUMBA=1``
before import to force the numpy path (useful for debugging and for platforms
without a working LLVM).

The graph arrives as a CSR pair ``(ptr, idx)``: the neighbours of row ``r`` are
``idx[ptr[r]:ptr[r + 1]]``.  The kernels are written as *gathers* (each output
entry sums over its own row) so the parallel numba loop is race-free and its
result does not depend on thread scheduling.
"""

import os

import numpy as np

_DISABLED = os.environ.get("IMPACTRANK_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by IMPACTRANK_DISABLE_NUMBA")
    import numba as nb

    # sweeps call kernels from several threads at once; workqueue is not
    # thread-safe and old TBB builds only emit warnings
    if "NUMBA_THREADING_LAYER" not in os.environ:
        try:
            import numba.np.ufunc.omppool  # noqa: F401

            nb.config.THREADING_LAYER = "omp"
        except ImportError:
            nb.config.THREADING_LAYER = "threadsafe"

    HAVE_NUMBA = True
except ImportError:
    nb = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# numpy implementations -------------------------------------------------------


def gather_sum_numpy(ptr, idx, row_of, w):
    """out[r] = sum of w[c] over c in row r."""
    n = ptr.shape[0] - 1
    if idx.shape[0] == 0:
        return np.zeros(n)
    return np.bincount(row_of, weights=w[idx], minlength=n)


def gather_weighted_numpy(ptr, idx, row_of, w, x):
    """out[r] = sum of w[c] * x[c] over c in row r."""
    n = ptr.shape[0] - 1
    if idx.shape[0] == 0:
        return np.zeros(n)
    return np.bincount(row_of, weights=w[idx] * x[idx], minlength=n)


def count_rows_masked_numpy(ptr, idx, row_of, mask):
    """out[r] = number of c in row r with mask[c] true."""
    n = ptr.shape[0] - 1
    if idx.shape[0] == 0:
        return np.zeros(n, dtype=np.int64)
    return np.bincount(row_of, weights=mask[idx].astype(np.float64), minlength=n).astype(np.int64)


# numba implementations -------------------------------------------------------

if HAVE_NUMBA:

    @nb.njit(parallel=True, nogil=True, cache=True)
    def gather_sum_numba(ptr, idx, row_of, w):
        n = ptr.shape[0] - 1
        out = np.zeros(n)
        for r in nb.prange(n):
            acc = 0.0
            for p in range(ptr[r], ptr[r + 1]):
                acc += w[idx[p]]
            out[r] = acc
        return out

    @nb.njit(parallel=True, nogil=True, cache=True)
    def gather_weighted_numba(ptr, idx, row_of, w, x):
        n = ptr.shape[0] - 1
        out = np.zeros(n)
        for r in nb.prange(n):
            acc = 0.0
            for p in range(ptr[r], ptr[r + 1]):
                c = idx[p]
                acc += w[c] * x[c]
            out[r] = acc
        return out

    @nb.njit(parallel=True, nogil=True, cache=True)
    def count_rows_masked_numba(ptr, idx, row_of, mask):
        n = ptr.shape[0] - 1
        out = np.zeros(n, dtype=np.int64)
        for r in nb.prange(n):
            cnt = 0
            for p in range(ptr[r], ptr[r + 1]):
                if mask[idx[p]]:
                    cnt += 1
            out[r] = cnt
        return out

    gather_sum = gather_sum_numba
    gather_weighted = gather_weighted_numba
    count_rows_masked = count_rows_masked_numba
else:
    gather_sum_numba = gather_weighted_numba = count_rows_masked_numba = None
    gather_sum = gather_sum_numpy
    gather_weighted = gather_weighted_numpy
    count_rows_masked = count_rows_masked_numpy

"""Compare the numba and numpy kernel paths.

    python3 benchmarks/bench_kernels.py [--papers 100000] [--repeat 20]

Times each gather kernel on a preferential-attachment graph, then one full
AttRank solve per backend.  The numpy solve runs in a subprocess with
IMPACTRANK_DISABLE_NUMBA=1 so the flag is honoured at import time.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from impactrank import _kernels
from impactrank.synthetic import preferential_attachment_graph

SOLVE = """
import time
from impactrank import BACKEND
from impactrank.attrank import AttRankParams, attrank_solve
from impactrank.synthetic import preferential_attachment_graph
g = preferential_attachment_graph({n}, seed=1)
p = AttRankParams(0.5, 0.3, 0.2, eta=-0.48, y=3)
attrank_solve(g.prefix(1000), p)
t0 = time.perf_counter()
res = attrank_solve(g, p)
print(BACKEND, res.iterations, f"{{(time.perf_counter() - t0) * 1e3:.1f}}")
"""


def best_ms(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat)) * 1e3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--papers", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    g = preferential_attachment_graph(args.papers, seed=1)
    print(f"graph: {g.paper_count} papers, {g.edge_count} citations")
    csr = (g.cit_ptr, g.cit_idx, g._cit_row)
    rng = np.random.default_rng(0)
    w, x = rng.random(g.paper_count), rng.random(g.paper_count)
    mask = rng.random(g.paper_count) < 0.2

    if not _kernels.HAVE_NUMBA:
        print("numba unavailable or disabled; only the numpy path is timed")
    print(f"{'kernel':<20}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for name, extra in (("gather_sum", (w,)), ("gather_weighted", (w, x)), ("count_rows_masked", (mask,))):
        t_np = best_ms(lambda: getattr(_kernels, name + "_numpy")(*csr, *extra), args.repeat)
        if _kernels.HAVE_NUMBA:
            t_nb = best_ms(lambda: getattr(_kernels, name + "_numba")(*csr, *extra), args.repeat)
            print(f"{name:<20}{t_np:>10.2f}{t_nb:>10.2f}{t_np / t_nb:>8.1f}x")
        else:
            print(f"{name:<20}{t_np:>10.2f}{'-':>10}{'-':>9}")

    print("full attrank solve (backend, iterations, ms):")
    code = SOLVE.format(n=args.papers)
    for flag in ("0", "1"):
        env = dict(os.environ, IMPACTRANK_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        print("  " + out.stdout.strip())


if __name__ == "__main__":
    main()

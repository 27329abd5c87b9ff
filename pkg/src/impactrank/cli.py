"""Command-line front end.

    impactrank rank attrank --edges E --meta M --alpha 0.3 --beta 0.4 --y 1 --eta -0.48
    impactrank split --edges E --meta M --test-ratio 1.6 --out splitdir
    impactrank eval --edges E --meta M --method ram --ram-gamma 0.5 --k 50
    impactrank sweep --edges E --meta M --method attrank --eta -0.48 --out grid.csv
    impactrank fit-eta --edges E --meta M --max-age 10

Exit codes: 0 success, 2 usage or configuration error, 3 runtime or method error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path

from impactrank import _kernels
from impactrank.attrank import AttRankParams, default_tail_start, fit_eta
from impactrank.corpus import _id_key, citation_age_distribution, load_files, temporal_split
from impactrank.errors import ImpactRankError, InvalidParameters, RatioOutOfRange
from impactrank.harness import METHODS, Method, _axis_values, default_grid, evaluate, sweep
from impactrank.metrics import DEFAULT_KS
from impactrank.walkcore import DEFAULT_MAX_ITER, DEFAULT_TOL

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3
CONFIG_KEYS = ("alpha", "beta", "gamma", "eta", "y", "attention_mode", "tol", "max_iter",
               "tau_dir", "rho")
DEFAULT_TEST_RATIO = "1.6"

# method-prefixed flag -> (method, parameter)
PREFIXED = {
    "cr_alpha": ("citerank", "alpha"), "cr_tau_dir": ("citerank", "tau_dir"),
    "fr_alpha": ("futurerank", "alpha"), "fr_beta": ("futurerank", "beta"),
    "fr_gamma": ("futurerank", "gamma"), "fr_rho": ("futurerank", "rho"),
    "ram_gamma": ("ram", "gamma"),
    "ecm_alpha": ("ecm", "alpha"), "ecm_gamma": ("ecm", "gamma"),
}
DEFAULTS = {
    "attrank": {"eta": 0.0, "y": 1, "attention_mode": "count_fraction"},
    "pagerank": {"alpha": 0.5},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (p.strip() for p in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def _num(key, value):
    if key == "attention_mode":
        return str(value)
    if key in ("y", "max_iter"):
        f = float(value)
        if not f.is_integer():
            raise UsageError(f"{key} must be an integer, got {value!r}")
        return int(f)
    try:
        return float(value)
    except ValueError:
        raise UsageError(f"{key} must be a number, got {value!r}") from None


def _collect(name: str, args) -> dict:
    """Merge defaults, the config file, generic flags and prefixed flags."""
    if name not in METHODS:
        raise UsageError(f"unknown method {name!r}")
    merged = dict(DEFAULTS.get(name, {}))
    if getattr(args, "config", None):
        merged.update(read_config(args.config))
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    for flag, (method, key) in PREFIXED.items():
        v = getattr(args, flag, None)
        if v is not None:
            if method != name:
                raise UsageError(f"--{flag.replace('_', '-')} does not apply to {name}")
            merged[key] = v
    return merged


def method_from_args(name: str, args) -> Method:
    """Build a bound method from flags; attrank's missing coefficient is inferred."""
    allowed = METHODS[name][1] if name in METHODS else ()
    merged = _collect(name, args)
    tol = _num("tol", merged.pop("tol", DEFAULT_TOL))
    max_iter = _num("max_iter", merged.pop("max_iter", DEFAULT_MAX_ITER))
    params = {k: _num(k, v) for k, v in merged.items() if k in allowed}
    if name == "attrank":
        try:
            full = AttRankParams.complete(**params)
        except TypeError as exc:
            raise UsageError(str(exc)) from None
        params = full.as_dict()
    missing = [k for k in allowed if k not in params]
    if missing:
        raise UsageError(f"{name} needs {', '.join('--' + m.replace('_', '-') for m in missing)}")
    return Method(name, params, tol, max_iter)


def _add_data_args(p, ratio_default=None):
    p.add_argument("--edges", required=True, help="edge file: citing_id<TAB>cited_id")
    p.add_argument("--meta", required=True, help="metadata file: paper_id<TAB>year_or_date[<TAB>authors]")
    p.add_argument("--test-ratio", default=ratio_default,
                   help="future/current size ratio in [1, 2] (default: %(default)s)")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker threads (default: $IMPACTRANK_JOBS or 1)")


def _add_method_args(p):
    g = p.add_argument_group("method parameters")
    g.add_argument("--config", help="file of 'key = value' lines; flags override it")
    g.add_argument("--alpha", type=float, help="reference-following probability")
    g.add_argument("--beta", type=float, help="attention coefficient (attrank, futurerank)")
    g.add_argument("--gamma", type=float, help="recency coefficient (attrank, futurerank) or age base (ram, ecm)")
    g.add_argument("--eta", type=float, help="attrank recency exponent, <= 0 (default: 0)")
    g.add_argument("--y", type=int, help="attrank attention window in years (default: 1)")
    g.add_argument("--attention-mode", choices=["count_fraction", "weighted_reference"],
                   help="attrank attention estimator (default: count_fraction)")
    g.add_argument("--tau-dir", type=float, help="citerank aging time")
    g.add_argument("--rho", type=float, help="futurerank recency exponent, < 0")
    for flag in PREFIXED:
        g.add_argument("--" + flag.replace("_", "-"), type=float, help=argparse.SUPPRESS)
    g.add_argument("--tol", type=float, help=f"L1 convergence tolerance (default: {DEFAULT_TOL})")
    g.add_argument("--max-iter", type=int, help=f"iteration cap (default: {DEFAULT_MAX_ITER})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="impactrank", description="Rank papers by expected short-term impact.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rank", help="score papers with one method")
    p.add_argument("method", choices=sorted(METHODS))
    _add_data_args(p)
    p.add_argument("--view", choices=["full", "current"], default="full",
                   help="rank the whole corpus or the current view of a split (default: %(default)s)")
    p.add_argument("--out", help="score CSV path (default: stdout)")
    _add_method_args(p)

    p = sub.add_parser("split", help="write the current/future split manifest and STI")
    _add_data_args(p, DEFAULT_TEST_RATIO)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("eval", help="evaluate one method on a split")
    p.add_argument("--method", required=True, choices=sorted(METHODS))
    _add_data_args(p, DEFAULT_TEST_RATIO)
    p.add_argument("--k", type=int, action="append", help="nDCG cutoff, repeatable (default: 5 10 50 100 500)")
    p.add_argument("--include-zero-truth", action="store_true",
                   help="keep papers with zero STI in Spearman's rho")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    _add_method_args(p)

    p = sub.add_parser("sweep", help="grid-search a method's parameters on a split")
    p.add_argument("--method", required=True, choices=sorted(METHODS))
    _add_data_args(p, DEFAULT_TEST_RATIO)
    p.add_argument("--metric", choices=["spearman", "ndcg"], default="spearman")
    p.add_argument("--k", type=int, default=50, help="nDCG cutoff (default: %(default)s)")
    p.add_argument("--axis", action="append", default=[], metavar="NAME=MIN:MAX:STEP",
                   help="override one grid axis")
    p.add_argument("--include-zero-truth", action="store_true")
    p.add_argument("--out", help="sweep CSV path (default: stdout)")
    _add_method_args(p)

    p = sub.add_parser("fit-eta", help="fit the recency exponent to the citation-age distribution")
    _add_data_args(p)
    p.add_argument("--max-age", type=int, default=10, help="oldest citation age kept (default: %(default)s)")
    p.add_argument("--tail-start", type=int, default=None,
                   help="first age of the fitted tail (default: the distribution's peak)")
    return parser


def _jobs(args) -> int:
    jobs = args.jobs
    if jobs is None:
        env = os.environ.get("IMPACTRANK_JOBS")
        try:
            jobs = int(env) if env else 1
        except ValueError:
            raise UsageError(f"IMPACTRANK_JOBS must be an integer, got {env!r}") from None
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if _kernels.HAVE_NUMBA:
        import numba

        numba.set_num_threads(min(jobs, numba.config.NUMBA_NUM_THREADS))
    return jobs


def _load(args):
    for path in (args.edges, args.meta):
        if not Path(path).is_file():
            raise UsageError(f"no such file: {path}")
    return load_files(args.edges, args.meta)


def _ratio(args):
    try:
        return float(args.test_ratio)
    except (TypeError, ValueError):
        raise UsageError(f"bad --test-ratio {args.test_ratio!r}") from None


def _open_out(path):
    if not path:
        return sys.stdout
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="")


def write_scores(fh, ids, scores):
    """``paper_id,score`` by descending score, ties by ascending id."""
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], _id_key(ids[i])))
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["paper_id", "score"])
    for i in order:
        w.writerow([ids[i], f"{scores[i]:.17g}"])


def cmd_rank(args):
    method = method_from_args(args.method, args)
    g = _load(args)
    if args.view == "current":
        g = temporal_split(g, _ratio(args) if args.test_ratio else 2.0).current
    t0 = time.perf_counter()
    res = method(g)
    ms = (time.perf_counter() - t0) * 1e3
    out = _open_out(args.out)
    try:
        write_scores(out, g.ids, res.scores)
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"{args.method}: papers={g.paper_count} iterations={res.iterations} runtime_ms={ms:.1f}",
          file=sys.stderr)


def cmd_split(args):
    g = _load(args)
    split = temporal_split(g, _ratio(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sti.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["paper_id", "sti"])
        for pid, v in zip(split.current.ids, split.sti):
            w.writerow([pid, int(v)])
    manifest = {
        "test_ratio": float(split.test_ratio),
        "n_papers": g.paper_count,
        "n_current": split.n_current,
        "n_future": split.n_future,
        "edges_current": split.current.edge_count,
        "edges_future": split.future.edge_count,
        "sti_total": int(split.sti.sum()),
        "sti_file": "sti.csv",
    }
    (out / "split.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"n_current={split.n_current} n_future={split.n_future}", file=sys.stderr)


def cmd_eval(args):
    method = method_from_args(args.method, args)
    split = temporal_split(_load(args), _ratio(args))
    report = evaluate(method, split, tuple(args.k or DEFAULT_KS), not args.include_zero_truth)
    out = _open_out(args.out)
    try:
        out.write(report.to_json() + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if report.error:
        print(f"error: {report.error}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _parse_axis(text):
    try:
        name, rng = text.split("=", 1)
        lo, hi, step = (float(x) for x in rng.split(":"))
    except ValueError:
        raise UsageError(f"bad --axis {text!r}; expected NAME=MIN:MAX:STEP") from None
    try:
        _axis_values(lo, hi, step)
    except (InvalidParameters, RatioOutOfRange) as exc:
        raise UsageError(str(exc)) from None
    return name.strip().replace("-", "_"), (lo, hi, step)


def cmd_sweep(args):
    jobs = _jobs(args)
    allowed = METHODS[args.method][1]
    merged = _collect(args.method, args)
    tol = _num("tol", merged.pop("tol", DEFAULT_TOL))
    max_iter = _num("max_iter", merged.pop("max_iter", DEFAULT_MAX_ITER))
    grid = default_grid(args.method)
    for text in args.axis:
        name, triple = _parse_axis(text)
        if name not in allowed:
            raise UsageError(f"{args.method} has no parameter {name!r}")
        if grid.implied and name == grid.implied[0]:
            raise UsageError(f"{name} is implied by the other coefficients and cannot be swept")
        grid.axes[name] = triple
    varying = set(grid.columns())
    fixed = {k: _num(k, v) for k, v in merged.items() if k in allowed and k not in varying}
    grid.fixed = fixed
    split = temporal_split(_load(args), _ratio(args))
    result = sweep(args.method, grid, split, args.metric, args.k, jobs, not args.include_zero_truth,
                   tol, max_iter)
    out = _open_out(args.out)
    try:
        out.write(result.to_csv())
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"cells={len(result.rows)} best={json.dumps(result.best)} {result.metric}={result.best_value!r}",
          file=sys.stderr)


def cmd_fit_eta(args):
    g = _load(args)
    if args.test_ratio:
        g = temporal_split(g, _ratio(args)).current
    dist = citation_age_distribution(g, args.max_age)
    tail = default_tail_start(dist) if args.tail_start is None else args.tail_start
    eta = fit_eta(dist, tail)
    print(f"{eta:.6g}")


COMMANDS = {"rank": cmd_rank, "split": cmd_split, "eval": cmd_eval, "sweep": cmd_sweep,
            "fit-eta": cmd_fit_eta}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.command != "sweep":
            _jobs(args)
        return COMMANDS[args.command](args) or EXIT_OK
    except UsageError as exc:
        print(f"impactrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidParameters, RatioOutOfRange) as exc:
        print(f"impactrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ImpactRankError as exc:
        print(f"impactrank: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands::

    sfacdf eval      CDF at one point
    sfacdf oracle    CDF at one point, analytic vs tanh-sinh quadrature
    sfacdf simulate  Monte-Carlo accuracy |F(Q*(p)) - p| over a parameter grid
    sfacdf bench     analytic vs quadrature timing and accuracy over a grid

Exit codes: 0 ok, 2 bad flags or values, 3 method not valid for the family
or parameters, 4 I/O failure, 5 quadrature did not converge.
"""

import argparse
import concurrent.futures
import csv
import io
import math
import sys
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .composed import (
    DEFAULT_METHOD,
    ExpComposedParams,
    MethodError,
    ParameterError,
    TruncNormalComposedParams,
    cdf,
    resolve_method,
)
from .oracle import QuadratureSettings, mc_accuracy, quad_cdf

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_METHOD = 3
EXIT_IO = 4
EXIT_NOT_CONVERGED = 5

SIMULATE_COLUMNS = ("family", "mu", "sigma_u", "lambda", "sigma_v", "p",
                    "q_star", "analytic_cdf", "abs_error", "method", "n",
                    "seed")
BENCH_COLUMNS = ("family", "method", "comparator", "rel_accuracy", "rel_time",
                 "n_evals")

TN_METHODS = ("owen", "bvn")
EXP_METHODS = ("direct", "emg")


class CliError(Exception):
    """Abort with a one-line message and an exit code."""

    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose errors are a single line and exit code 2."""

    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridSpec:
    mu: tuple = (-8.0, -4.0, -2.0, -1.0, 1.0, 2.0, 4.0, 8.0)
    sigma_u: tuple = (0.25, 0.5, 1.0, 2.0, 4.0)
    sigma_v: tuple = (0.25, 0.5, 1.0, 2.0, 4.0)
    lam: tuple = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
    p: tuple = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99)

    def __post_init__(self):
        for name in ("sigma_u", "sigma_v", "lam"):
            values = getattr(self, name)
            if not values or any(not (v > 0.0 and math.isfinite(v))
                                 for v in values):
                raise ValueError(f"grid {name} entries must be positive")
        if not self.mu or any(not math.isfinite(v) for v in self.mu):
            raise ValueError("grid mu entries must be finite")
        if not self.p or any(not 0.0 < v < 1.0 for v in self.p):
            raise ValueError("grid p entries must lie in (0, 1)")
        if any(b <= a for a, b in zip(self.p, self.p[1:])):
            raise ValueError("grid p entries must be strictly increasing")

    def tn_cells(self):
        return [TruncNormalComposedParams(m, su, sv) for m in self.mu
                for su in self.sigma_u for sv in self.sigma_v]

    def exp_cells(self):
        return [ExpComposedParams(lam, sv) for lam in self.lam
                for sv in self.sigma_v]


_GRID_KEYS = {"mu": "mu", "sigma_u": "sigma_u", "sigma_v": "sigma_v",
              "lambda": "lam", "lam": "lam", "p": "p"}


def parse_grid(text):
    """Grid from ``key = v1, v2, ...`` lines; '#' starts a comment.

    Keys: mu, sigma_u, sigma_v, lambda, p.  Missing keys keep the defaults.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition("=")
        key = key.strip().lower()
        if not sep or key not in _GRID_KEYS:
            raise ValueError(f"grid line {lineno}: expected one of "
                             f"{', '.join(sorted(_GRID_KEYS))} = values")
        try:
            nums = tuple(float(v) for v in rest.split(",") if v.strip())
        except ValueError:
            raise ValueError(f"grid line {lineno}: values must be numbers") \
                from None
        values[_GRID_KEYS[key]] = nums
    return GridSpec(**values)


def load_grid(spec):
    if spec in (None, "default"):
        return GridSpec()
    try:
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read grid file {spec}: {exc.strerror}",
                       EXIT_IO) from None
    try:
        return parse_grid(text)
    except ValueError as exc:
        raise CliError(f"{spec}: {exc}", EXIT_USAGE) from None


# ---------------------------------------------------------------------------
# formatting and output


def fmt(x):
    """Shortest round-trip float text; empty for missing values."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    data = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(data)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO) \
            from None


class _Progress:
    """Throttled progress lines on stderr."""

    def __init__(self, label, total, quiet):
        self.label = label
        self.total = total
        self.quiet = quiet
        self.last = 0.0

    def update(self, done):
        if self.quiet:
            return
        now = time.monotonic()
        if done == self.total or now - self.last >= 0.5:
            self.last = now
            print(f"{self.label}: {done}/{self.total}", file=sys.stderr,
                  flush=True)


# ---------------------------------------------------------------------------
# parameter flags


def _finite(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("NaN is not allowed")
    return v


def _count(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(v) and v >= 1 and v == int(v)):
        raise argparse.ArgumentTypeError(f"expected a positive integer, "
                                         f"got {text!r}")
    return int(v)


def _add_point_flags(p):
    p.add_argument("--family", required=True, choices=("tn", "exp"))
    p.add_argument("--mu", type=_finite, help="pre-truncation mean (tn)")
    p.add_argument("--sigma-u", type=_finite, help="inefficiency scale (tn)")
    p.add_argument("--lambda", dest="lam", type=_finite,
                   help="exponential rate (exp)")
    p.add_argument("--sigma-v", type=_finite, required=True,
                   help="noise standard deviation")
    p.add_argument("--kappa", type=_finite, required=True,
                   help="evaluation point; write --kappa=-inf for -inf")
    p.add_argument("--method", choices=TN_METHODS + EXP_METHODS,
                   help="tn: owen|bvn (default bvn); exp: direct|emg "
                        "(default emg)")
    p.add_argument("--orientation", choices=("production", "cost"),
                   default="production")


def _params_from_flags(args):
    try:
        if args.family == "tn":
            missing = [f for f, v in (("--mu", args.mu),
                                      ("--sigma-u", args.sigma_u)) if v is None]
            if missing:
                raise CliError(f"--family tn requires {' and '.join(missing)}",
                               EXIT_USAGE)
            if args.lam is not None:
                raise CliError("--lambda does not apply to --family tn",
                               EXIT_USAGE)
            params = TruncNormalComposedParams(args.mu, args.sigma_u,
                                               args.sigma_v)
        else:
            if args.lam is None:
                raise CliError("--family exp requires --lambda", EXIT_USAGE)
            if args.mu is not None or args.sigma_u is not None:
                raise CliError("--mu/--sigma-u do not apply to --family exp",
                               EXIT_USAGE)
            params = ExpComposedParams(args.lam, args.sigma_v)
    except ParameterError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    return params


def _check_method(params, method):
    """Resolve the method, mapping inapplicable combinations to exit 3."""
    try:
        resolve_method(params, method)
    except MethodError as exc:
        raise CliError(str(exc), EXIT_METHOD) from None
    if (method == "owen" and isinstance(params, TruncNormalComposedParams)
            and params.mu == 0.0):
        raise CliError("--method owen is undefined for --mu 0 "
                       "(use bvn, the half-normal case)", EXIT_METHOD)


def _analytic(args):
    params = _params_from_flags(args)
    _check_method(params, args.method)
    return params, cdf(params, args.kappa, args.orientation, args.method)


# ---------------------------------------------------------------------------
# eval / oracle


def cmd_eval(args):
    _, value = _analytic(args)
    print(f"{value:.17g}")
    return EXIT_OK


def cmd_oracle(args):
    try:
        settings = QuadratureSettings(level_max=args.level_max,
                                      abs_tol=args.abs_tol,
                                      lower_cut=args.lower_cut)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    params, value = _analytic(args)
    kappa = args.kappa
    cost = args.orientation == "cost"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = quad_cdf(params, -kappa if cost else kappa, settings,
                       full_output=True)
    quad = 1.0 - res.value if cost else res.value
    print(f"analytic   {value:.17g}")
    print(f"quadrature {quad:.17g}")
    print(f"abs_diff   {abs(value - quad):.3e}")
    if not res.converged:
        print(f"quadrature NOT converged at level {res.level} "
              f"(error estimate {res.error:.3e})")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def _family_cells(grid, family):
    out = []
    if family in ("tn", "both"):
        out += [("tn", i, c) for i, c in enumerate(grid.tn_cells())]
    if family in ("exp", "both"):
        out += [("exp", i, c) for i, c in enumerate(grid.exp_cells())]
    return out


_FAMILY_ID = {"tn": 0, "exp": 1}


def cell_seed(seed, family, index):
    """Per-cell SeedSequence: entropy (seed, family id, cell index)."""
    return np.random.SeedSequence([seed, _FAMILY_ID[family], index])


def _simulate_cell(task):
    family, index, params, p_list, n, seed, method = task
    records = mc_accuracy(params, p_list, n, cell_seed(seed, family, index),
                          method)
    rows = []
    for r in records:
        rows.append((r.family, fmt(r.mu), fmt(r.sigma_u), fmt(r.lam),
                     fmt(r.sigma_v), fmt(r.p), fmt(r.q_star), fmt(r.analytic),
                     fmt(r.abs_error), r.method, str(n), str(seed)))
    return rows


def _family_method(family, method):
    if method is None:
        return None
    allowed = TN_METHODS if family == "tn" else EXP_METHODS
    if method not in allowed:
        raise CliError(f"method {method!r} does not apply to family "
                       f"{family!r} (use {'|'.join(allowed)})", EXIT_METHOD)
    return method


def _run_cells(func, tasks, jobs, progress):
    """Apply func to tasks, possibly in parallel, keeping task order."""
    results = [None] * len(tasks)
    if jobs <= 1:
        for i, t in enumerate(tasks):
            results[i] = func(t)
            progress.update(i + 1)
        return results
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = {pool.submit(func, t): i for i, t in enumerate(tasks)}
        done = 0
        for fut in concurrent.futures.as_completed(futures):
            results[futures[fut]] = fut.result()
            done += 1
            progress.update(done)
    return results


def cmd_simulate(args):
    grid = load_grid(args.grid)
    cells = _family_cells(grid, args.family)
    if args.method is not None and args.family == "both":
        raise CliError("--method needs --family tn or --family exp",
                       EXIT_METHOD)
    tasks = []
    for family, index, params in cells:
        method = _family_method(family, args.method)
        if (method == "owen" and params.mu == 0.0):
            raise CliError("--method owen is undefined for mu = 0 in the "
                           "grid", EXIT_METHOD)
        tasks.append((family, index, params, grid.p, args.n, args.seed,
                      method))
    progress = _Progress("simulate cells", len(tasks), args.quiet)
    results = _run_cells(_simulate_cell, tasks, args.jobs, progress)
    rows = [row for cell_rows in results for row in cell_rows]
    _write_csv(args.out, SIMULATE_COLUMNS, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench

BENCH_SETTINGS = QuadratureSettings(level_max=12, abs_tol=1e-12)
REFERENCE_SETTINGS = QuadratureSettings(level_max=14, abs_tol=1e-15)
ERROR_FLOOR = 1e-16


def bench_points(params, count, rng):
    """Evaluation points spread over +/-3 spreads around the bulk."""
    if isinstance(params, TruncNormalComposedParams):
        centre, scale = -max(params.mu, 0.0), params.s
    else:
        centre, scale = -1.0 / params.lam, math.hypot(params.sigma_v,
                                                      1.0 / params.lam)
    z = rng.uniform(-3.0, 3.0, count)
    return [float(centre + scale * v) for v in z]


def _split(total, parts):
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def bench_cell(params, method, points, reference=True):
    """Time and score analytic vs quadrature on ``points``.

    Returns (analytic_seconds, comparator_seconds, analytic_error,
    comparator_error); errors are max abs deviations from a level_max=14
    quadrature reference (NaN when ``reference`` is False).
    """
    fn = resolve_method(params, method)
    t0 = time.perf_counter()
    analytic = [fn(params, k) for k in points]
    t1 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        quad = [quad_cdf(params, k, BENCH_SETTINGS) for k in points]
        t2 = time.perf_counter()
        if reference:
            ref = [quad_cdf(params, k, REFERENCE_SETTINGS) for k in points]
    if not reference:
        return t1 - t0, t2 - t1, math.nan, math.nan
    e_a = max(abs(a - r) for a, r in zip(analytic, ref))
    e_c = max(abs(q - r) for q, r in zip(quad, ref))
    return t1 - t0, t2 - t1, e_a, e_c


def _bench_task(task):
    params, method, points, reference = task
    return bench_cell(params, method, points, reference)


def run_bench(family, method, n_evals, seed=0, reference=True, jobs=1,
              progress=None):
    """BenchRecord rows for one family, one row per default-grid cell."""
    grid = GridSpec()
    cells = grid.tn_cells() if family == "tn" else grid.exp_cells()
    if method is None:
        method = DEFAULT_METHOD[type(cells[0])].value
    counts = _split(n_evals, len(cells))
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([seed, _FAMILY_ID[family]])))
    tasks = []
    for params, count in zip(cells, counts):
        pts = bench_points(params, count, rng)
        if count:
            tasks.append((params, method, pts, reference))
    progress = progress or _Progress("bench", 0, True)
    progress.total = len(tasks)
    results = _run_cells(_bench_task, tasks, jobs, progress)
    rows = []
    for (params, _, pts, _), (ta, tc, ea, ec) in zip(tasks, results):
        rel_acc = (max(ec, ERROR_FLOOR) / max(ea, ERROR_FLOOR)
                   if reference else math.nan)
        rows.append(dict(family=family, method=method, comparator="tanh-sinh",
                         rel_accuracy=rel_acc, rel_time=tc / ta,
                         n_evals=len(pts), analytic_seconds=ta,
                         comparator_seconds=tc))
    return rows


def cmd_bench(args):
    families = ("tn", "exp") if args.family == "both" else (args.family,)
    if args.method is not None and args.family == "both":
        raise CliError("--method needs --family tn or --family exp",
                       EXIT_METHOD)
    out = []
    for family in families:
        method = _family_method(family, args.method)
        progress = _Progress(f"bench {family}", 0, args.quiet)
        rows = run_bench(family, method, args.n_evals, args.seed,
                         not args.no_reference, args.jobs, progress)
        total_a = sum(r["analytic_seconds"] for r in rows)
        total_c = sum(r["comparator_seconds"] for r in rows)
        if not args.quiet:
            med = float(np.median([r["rel_time"] for r in rows]))
            print(f"bench {family}: {sum(r['n_evals'] for r in rows)} evals, "
                  f"overall rel_time {total_c / total_a:.1f}, "
                  f"median {med:.1f}", file=sys.stderr)
        out += [(r["family"], r["method"], r["comparator"],
                 fmt(r["rel_accuracy"]), fmt(r["rel_time"]), str(r["n_evals"]))
                for r in rows]
    _write_csv(args.out, BENCH_COLUMNS, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser():
    parser = _Parser(prog="sfacdf", description="Analytic CDFs of the "
                     "stochastic-frontier composed error eps = v - u.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate the CDF at one point")
    _add_point_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle", help="compare the CDF with quadrature")
    _add_point_flags(p)
    p.add_argument("--level-max", type=int, default=12)
    p.add_argument("--abs-tol", type=_finite, default=1e-12)
    p.add_argument("--lower-cut", type=_finite, default=-40.0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("simulate",
                       help="Monte-Carlo accuracy over a parameter grid")
    p.add_argument("--family", choices=("tn", "exp", "both"), default="both")
    p.add_argument("--n", type=_count, default=1_000_000,
                   help="draws per grid cell (default 1e6)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", default="default",
                   help="'default' or a file of 'key = v1, v2' lines")
    p.add_argument("--method", choices=TN_METHODS + EXP_METHODS)
    p.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    p.add_argument("--jobs", type=_count, default=1)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="analytic vs quadrature timing")
    p.add_argument("--family", choices=("tn", "exp", "both"), default="both")
    p.add_argument("--method", choices=TN_METHODS + EXP_METHODS)
    p.add_argument("--n-evals", type=_count, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    p.add_argument("--no-reference", action="store_true",
                   help="skip the level-14 reference (timing only)")
    p.add_argument("--jobs", type=_count, default=1)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"sfacdf {args.command}: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

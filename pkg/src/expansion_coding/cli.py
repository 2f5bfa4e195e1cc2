"""Command-line front end. Every subcommand writes one CSV table.

CSV schemas (header row, fixed column order, 12 significant digits):

  levels         level,p_l
  rd-curve       scheme,D_target,rate_bits,distortion,shannon_rate,gap_bits,alpha
  gap-report     scheme,D_target,rate_bits,distortion,shannon_rate,gap_bits,alpha,gap_bound,within_bound
  verify-lemma1  lambda,l1,l2,n,seed,sample_mean,mean_rel_error,ks_statistic,ks_critical,mean_pass,ks_pass
  verify-mgf     lambda,t,l1,l2,partial_product,target,abs_error
  simulate       scheme,lambda,l1,l2,D_target,n,seed,empirical_distortion,ci_radius,window_distortion,
                 window_ci_radius,analytic_window_distortion,truncation_defect,truncation_bound,overflow_fraction
  oracle-check   trial,levels,l1,l2,lambda,recursion_exact,recursion_published,oracle,abs_err_exact,abs_err_published

Exit status: 0 ok, 2 invalid configuration or violated precondition,
3 internal invariant violation (``oracle-check --strict``).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from .expansion import LevelRange, level_params, mgf_partial_product, sample_by_levels
from .mc_sim import analytic_window_distortion, ks_critical, ks_statistic, simulate
from .numerics import SourceKind, SourceModel
from .schemes_exp import GAP_CONSTANT, Scheme, exp_sweep, gap_report, heuristic_allocation
from .schemes_laplace import (
    distortion_oracle,
    distortion_trace,
    laplace_gap_report,
    laplace_sweep,
    oracle_battery,
)

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 3

_MODELS = {"exp": SourceKind.EXPONENTIAL, "laplace": SourceKind.LAPLACE}
_SCHEMES = {"z": Scheme.EXP_Z, "successive": Scheme.EXP_SUCCESSIVE, "laplace": Scheme.LAPLACE_BASE}


class InvariantViolation(RuntimeError):
    pass


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(getattr(v, "value", v))


def d_grid(args) -> np.ndarray:
    if not args.dmin > 0 or args.dmax < args.dmin:
        raise ValueError("grid needs 0 < dmin <= dmax")
    if args.points < 1:
        raise ValueError("grid needs at least one point")
    if args.points == 1:
        return np.array([args.dmin])
    if args.log:
        return np.geomspace(args.dmin, args.dmax, args.points)
    return np.linspace(args.dmin, args.dmax, args.points)


def alpha_grid(args) -> np.ndarray:
    if args.alpha_points < 2:
        raise ValueError("alpha grid needs at least two points")
    return np.linspace(0.0, 1.0, args.alpha_points)


def _gap_rows(rows):
    return [[r.scheme, r.D_target, r.rate_bits, r.distortion, r.shannon_rate, r.gap_bits, r.alpha]
            for r in rows]


def cmd_levels(args):
    profile = level_params(args.lam, LevelRange(args.l1, args.l2))
    return ["level", "p_l"], [[int(l), p] for l, p in zip(profile.levels, profile.p)]


def cmd_rd_curve(args):
    range_ = LevelRange(args.l1, args.l2)
    grid = d_grid(args)
    if args.model == "exp":
        rows = exp_sweep(SourceModel(SourceKind.EXPONENTIAL, args.lam), range_, grid)
    else:
        rows = laplace_sweep(range_, args.lam, grid, alpha_grid(args))
    header = ["scheme", "D_target", "rate_bits", "distortion", "shannon_rate", "gap_bits", "alpha"]
    return header, _gap_rows(rows)


def cmd_gap_report(args):
    range_ = LevelRange(args.l1, args.l2)
    grid = d_grid(args)
    if args.model == "exp":
        rows = gap_report(SourceModel(SourceKind.EXPONENTIAL, args.lam), range_, grid)
        bound = GAP_CONSTANT
    else:
        rows = laplace_gap_report(range_, args.lam, grid, alpha_grid(args))
        bound = 1.0
    header = ["scheme", "D_target", "rate_bits", "distortion", "shannon_rate", "gap_bits", "alpha",
              "gap_bound", "within_bound"]
    out = [row + [bound, r.gap_bits <= bound] for row, r in zip(_gap_rows(rows), rows)]
    return header, out


def cmd_verify_lemma1(args):
    profile = level_params(args.lam, LevelRange(args.l1, args.l2))
    x = np.sort(sample_by_levels(profile, args.n, args.seed, workers=args.workers))
    mean = math.fsum(x) / x.size
    rel = abs(mean * args.lam - 1.0)
    ks = ks_statistic(x, SourceModel(SourceKind.EXPONENTIAL, args.lam))
    crit = ks_critical(args.n)
    header = ["lambda", "l1", "l2", "n", "seed", "sample_mean", "mean_rel_error", "ks_statistic",
              "ks_critical", "mean_pass", "ks_pass"]
    return header, [[args.lam, args.l1, args.l2, args.n, args.seed, mean, rel, ks, crit, rel < 0.01, ks < crit]]


def cmd_verify_mgf(args):
    target = args.lam / (args.lam - args.t) if args.t < args.lam else math.inf
    rows = []
    for w in range(max(args.l1, args.l2) + 1):
        l1, l2 = min(w, args.l1), min(w, args.l2)
        val = mgf_partial_product(args.lam, args.t, LevelRange(l1, l2))
        rows.append([args.lam, args.t, l1, l2, val, target, abs(val - target)])
    return ["lambda", "t", "l1", "l2", "partial_product", "target", "abs_error"], rows


def cmd_simulate(args):
    scheme = _SCHEMES[args.scheme]
    kind = SourceKind.LAPLACE if scheme is Scheme.LAPLACE_BASE else SourceKind.EXPONENTIAL
    model = SourceModel(kind, args.lam)
    range_ = LevelRange(args.l1, args.l2)
    profile = level_params(args.lam, range_)
    alloc = heuristic_allocation(args.D, range_)
    if np.any(alloc.d > profile.p):
        raise ValueError(f"target distortion {args.D} exceeds 1/lambda; heuristic allocation is not codable")
    rep = simulate(model, range_, alloc, scheme, args.n, args.seed, args.workers)
    header = ["scheme", "lambda", "l1", "l2", "D_target", "n", "seed", "empirical_distortion", "ci_radius",
              "window_distortion", "window_ci_radius", "analytic_window_distortion", "truncation_defect",
              "truncation_bound", "overflow_fraction"]
    row = [scheme, args.lam, args.l1, args.l2, args.D, args.n, args.seed, rep.empirical_distortion,
           rep.ci_radius, rep.window_distortion, rep.window_ci_radius,
           analytic_window_distortion(model, alloc, scheme), rep.truncation_defect,
           range_.truncation_bound(args.lam), rep.overflow_fraction]
    return header, [row]


def cmd_oracle_check(args):
    rows = []
    worst = 0.0
    for t, (profile, alloc) in enumerate(oracle_battery(args.seed, args.trials, args.max_levels)):
        exact = float(distortion_trace(profile, alloc, "exact").D_acc[-1])
        published = float(distortion_trace(profile, alloc, "published").D_acc[-1])
        oracle = distortion_oracle(profile, alloc)
        worst = max(worst, abs(exact - oracle))
        r = profile.range
        rows.append([t, r.size, r.L1, r.L2, profile.lam, exact, published, oracle,
                     abs(exact - oracle), abs(published - oracle)])
    header = ["trial", "levels", "l1", "l2", "lambda", "recursion_exact", "recursion_published", "oracle",
              "abs_err_exact", "abs_err_published"]
    if args.strict and worst > args.tol:
        raise InvariantViolation(f"recursion deviates from enumeration by {worst:.3g} > {args.tol:g}")
    return header, rows


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="expansion-coding", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, l1=10, l2=10):
        p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="source rate parameter")
        p.add_argument("--l1", type=int, default=l1, help="lowest level is -L1")
        p.add_argument("--l2", type=int, default=l2, help="highest level is L2")
        p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")

    def grid(p):
        p.add_argument("--model", choices=sorted(_MODELS), default="exp")
        p.add_argument("--dmin", type=float, default=0.003)
        p.add_argument("--dmax", type=float, default=1.0)
        p.add_argument("--points", type=int, default=60)
        p.add_argument("--log", action="store_true", help="log-spaced distortion grid")
        p.add_argument("--alpha-points", type=int, default=101, help="time-sharing grid size (laplace)")

    def stochastic(p):
        p.add_argument("--n", type=int, default=1_000_000)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("levels", help="per-level Bernoulli parameters: level,p_l")
    common(p)
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser("rd-curve", help="achievable rate-distortion points along a distortion grid")
    common(p, 25, 25)
    grid(p)
    p.set_defaults(func=cmd_rd_curve)

    p = sub.add_parser("gap-report", help="gap to the Shannon limit with level-count checks")
    common(p, 25, 25)
    grid(p)
    p.set_defaults(func=cmd_gap_report)

    p = sub.add_parser("verify-lemma1", help="mean and KS test of level-wise exponential samples")
    common(p, 30, 30)
    stochastic(p)
    p.set_defaults(func=cmd_verify_lemma1)

    p = sub.add_parser("verify-mgf", help="moment generating function partial products over growing windows")
    common(p, 60, 60)
    p.add_argument("--t", type=float, default=0.5)
    p.set_defaults(func=cmd_verify_mgf)

    p = sub.add_parser("simulate", help="Monte Carlo distortion of one scheme")
    common(p, 20, 20)
    stochastic(p)
    p.add_argument("--scheme", choices=sorted(_SCHEMES), default="z")
    p.add_argument("--D", type=float, default=2.0 ** -4, help="target distortion of the heuristic allocation")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle-check", help="Laplace distortion recursion vs exact enumeration")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-levels", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="exit 3 if the exact recursion deviates")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def render(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        header, rows = args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    text = render(header, rows)
    if args.out == "-":
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

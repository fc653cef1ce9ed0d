"""Command-line front door: ``python -m bdsfs <subcommand> ...``.

Generator subcommands (``forward``, ``contour``, ``coalescent``, ``approx``)
write one row per replicate.  Verification subcommands (``lln``, ``clt``,
``oracle``, ``moments``, ``identity``, and ``contour --compare``) write
report rows and set the exit status: 0 if every check passed, 2 if any
failed, 1 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from functools import partial

import numpy as np

from .approx import approx_r_ge2_terms, approx_r_k_terms, sample_approx
from .bdmath import RateParams, SamplingFrame
from .coalescent import sample_marked_tree, to_newick
from .contour import contour_population_at_T, simulate_contour
from .errors import BdsfsError
from .forward import conditioned_forward, sfs_from_genealogy
from .harness.experiments import (
    clt_report,
    clt_samples,
    run_contour_compare,
    run_lln,
    run_oracle_compare,
    run_replicates,
)
from .harness.quadrature import verify_calculus_identity, verify_moments
from .harness.report import ExperimentConfig, reports_to_csv, reports_to_json
from .rng import replicate_rng
from .sfsstats import sfs_from_marked_tree

EXIT_PASS, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _t_rule(text: str):
    if text == "clt":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'clt' or a number c (T = c log n / r)") from None


def _add_common(p: argparse.ArgumentParser, *, n=None, reps=1, horizon=True) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=2.0, help="birth rate (default 2)")
    p.add_argument("--mu", type=float, default=1.0, help="death rate (default 1)")
    p.add_argument("--nu", type=float, default=0.0, help="mutations per birth (default 0)")
    p.add_argument("--n", type=int, default=n, help="sample size")
    if horizon:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--T", type=float, help="sampling time")
        g.add_argument("--t-rule", type=_t_rule, help="'clt' or c, meaning T = c log(n) / r")
    p.add_argument("--reps", type=int, default=reps, help=f"replicates (default {reps})")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bdsfs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("forward", help="conditioned forward simulation, SFS per replicate")
    _add_common(p, n=3)

    p = sub.add_parser("coalescent", help="backward construction, SFS per replicate")
    _add_common(p, n=3)
    p.add_argument("--newick", action="store_true", help="emit Newick trees instead of spectra")

    p = sub.add_parser("contour", help="contour encoding of the population at T")
    _add_common(p)
    p.add_argument("--path", action="store_true", help="emit the corner points of replicate 0")
    p.add_argument("--compare", action="store_true", help="test against the forward simulator")
    p.add_argument("--alpha", type=float, default=0.01)

    p = sub.add_parser("approx", help="large-n approximation, event counts per replicate")
    _add_common(p, n=100)
    p.add_argument("--k", type=int, default=2)

    p = sub.add_parser("lln", help="law of large numbers for R^k")
    _add_common(p, n=5000, reps=20)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--mode", choices=("coalescent", "approx"), default="coalescent")
    p.add_argument("--rel-tol", type=float, default=0.02)

    p = sub.add_parser("clt", help="central limit theorem for R^>=2 and M^>=2")
    _add_common(p, n=2000, reps=2000)
    p.add_argument("--mode", choices=("coalescent", "forward", "approx"), default="coalescent")
    p.add_argument("--center", type=float, help="override the centring n lam / r (power check)")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--var-tol", type=float, default=0.10)

    p = sub.add_parser("oracle", help="forward versus backward generator, joint (R^>=2, M^>=2)")
    _add_common(p, n=3, reps=10_000)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--arms", nargs=2, default=("forward", "coalescent"),
                   choices=("forward", "coalescent", "approx"))

    p = sub.add_parser("moments", help="quadrature check of the limiting moment constants")
    _add_common(p, horizon=False)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("identity", help="quadrature check of the binomial-sum integral identity")
    _add_common(p, n=12, horizon=False)
    p.add_argument("--m", type=int, help="single m; default is every 0 <= m <= n' - 2, n' <= n")
    p.add_argument("--tol", type=float, default=1e-10)
    return parser


# --- helpers -----------------------------------------------------------------


def _params(args) -> RateParams:
    return RateParams(args.lam, args.mu, args.nu)


def _config(args, **extra) -> ExperimentConfig:
    if args.T is None and args.t_rule is None:
        raise UsageError("one of --T or --t-rule is required")
    if args.n is None:
        raise UsageError("--n is required")
    return ExperimentConfig(
        params=_params(args), n=args.n, reps=args.reps, seed=args.seed, T=args.T,
        t_rule=args.t_rule, workers=args.workers, **extra,
    )


def _table(header, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _reports(reports, fmt: str) -> tuple[str, int]:
    text = reports_to_json(reports) + "\n" if fmt == "json" else reports_to_csv(reports)
    return text, EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


def _sfs_rows(reports) -> list[tuple]:
    rows = []
    for i, rep in enumerate(reports):
        for k in range(1, rep.n):
            rows.append((i, k, int(rep.R[k]), int(rep.M[k])))
    return rows


# --- per-replicate workers (module level so they pickle) ---------------------


def _forward_rep(params, frame, rng):
    g, sample = conditioned_forward(params, frame, rng)
    return sfs_from_genealogy(g, sample)


def _coalescent_rep(params, frame, newick, rng):
    marked = sample_marked_tree(params, frame, rng)
    return to_newick(marked) if newick else sfs_from_marked_tree(marked)


def _contour_rep(params, T, rng):
    path = simulate_contour(params, T, rng)
    return path.n_individuals, contour_population_at_T(path)


def _approx_rep(params, frame, k, rng):
    draw = sample_approx(params, frame, rng)
    r_ge2 = int(approx_r_ge2_terms(params, frame, rng, draw).sum()) if frame.n >= 3 else 0
    r_k = int(approx_r_k_terms(params, frame, k, rng, draw).sum())
    return draw.W, draw.Y, r_ge2, r_k


# --- subcommands ---------------------------------------------------------------


def cmd_forward(args):
    cfg = _config(args)
    frame = SamplingFrame(cfg.n, cfg.horizon)
    reps = run_replicates(partial(_forward_rep, cfg.params, frame), args.seed, args.reps, workers=args.workers)
    if args.format == "json":
        return json.dumps([r.to_dict() for r in reps], indent=2) + "\n", EXIT_PASS
    return _table(("replicate", "k", "R_k", "M_k"), _sfs_rows(reps), "csv"), EXIT_PASS


def cmd_coalescent(args):
    cfg = _config(args)
    frame = SamplingFrame(cfg.n, cfg.horizon)
    fn = partial(_coalescent_rep, cfg.params, frame, args.newick)
    reps = run_replicates(fn, args.seed, args.reps, workers=args.workers)
    if args.newick:
        if args.format == "json":
            return json.dumps(reps, indent=2) + "\n", EXIT_PASS
        return "".join(t + "\n" for t in reps), EXIT_PASS
    if args.format == "json":
        return json.dumps([r.to_dict() for r in reps], indent=2) + "\n", EXIT_PASS
    return _table(("replicate", "k", "R_k", "M_k"), _sfs_rows(reps), "csv"), EXIT_PASS


def cmd_contour(args):
    if args.T is None:
        raise UsageError("contour needs --T")
    params = _params(args)
    if args.compare:
        reports = run_contour_compare(params, args.T, args.reps, seed=args.seed, workers=args.workers, alpha=args.alpha)
        return _reports(reports, args.format)
    if args.path:
        path = simulate_contour(params, args.T, replicate_rng(args.seed, 0))
        if args.format == "json":
            return json.dumps([{"search_length": s, "level": v} for s, v in path.points()], indent=2) + "\n", EXIT_PASS
        return path.to_csv(), EXIT_PASS
    reps = run_replicates(partial(_contour_rep, params, args.T), args.seed, args.reps, workers=args.workers)
    rows = [(i, a, b) for i, (a, b) in enumerate(reps)]
    return _table(("replicate", "individuals", "N_T"), rows, args.format), EXIT_PASS


def cmd_approx(args):
    cfg = _config(args)
    frame = SamplingFrame(cfg.n, cfg.horizon)
    if not 2 <= args.k <= cfg.n - 1:
        raise UsageError("need 2 <= k <= n - 1")
    reps = run_replicates(partial(_approx_rep, cfg.params, frame, args.k), args.seed, args.reps, workers=args.workers)
    rows = [(i, w, y, a, b) for i, (w, y, a, b) in enumerate(reps)]
    return _table(("replicate", "W", "Y", "R_ge2", f"R_{args.k}"), rows, args.format), EXIT_PASS


def cmd_lln(args):
    cfg = _config(args, mode=args.mode, k=args.k, rel_tol=args.rel_tol)
    return _reports([run_lln(cfg)], args.format)


def cmd_clt(args):
    cfg = _config(args, mode=args.mode, alpha=args.alpha, var_tol=args.var_tol)
    cfg.require_clt()
    r_vals, m_vals = clt_samples(cfg)
    reports = [clt_report(cfg, r_vals, "R", args.center)]
    if cfg.params.nu > 0:
        center = None if args.center is None else args.center * cfg.params.nu
        reports.append(clt_report(cfg, m_vals, "M", center))
    return _reports(reports, args.format)


def cmd_oracle(args):
    cfg = _config(args, alpha=args.alpha)
    return _reports([run_oracle_compare(cfg, tuple(args.arms))], args.format)


def cmd_moments(args):
    return _reports(verify_moments(_params(args), tol=args.tol), args.format)


def cmd_identity(args):
    n = args.n
    if n is None or n < 2:
        raise UsageError("identity needs --n >= 2")
    if args.m is not None:
        pairs = [(args.m, n)]
    else:
        pairs = [(m, nn) for nn in range(2, n + 1) for m in range(nn - 1)]
    return _reports([verify_calculus_identity(m, nn, tol=args.tol) for m, nn in pairs], args.format)


COMMANDS = {
    "forward": cmd_forward,
    "coalescent": cmd_coalescent,
    "contour": cmd_contour,
    "approx": cmd_approx,
    "lln": cmd_lln,
    "clt": cmd_clt,
    "oracle": cmd_oracle,
    "moments": cmd_moments,
    "identity": cmd_identity,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.reps < 1:
            raise UsageError("--reps must be >= 1")
        text, code = COMMANDS[args.command](args)
    except (UsageError, ValueError, BdsfsError) as exc:
        print(f"bdsfs {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())

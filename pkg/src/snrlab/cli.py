"""Command-line interface.

Subcommands
-----------
sweep   run a configured SNR sweep and write the canonical CSV
theory  print the regime classification and risk-formula table
bayes   run the spike-prior posterior diagnostics
fit     generate one dataset, fit one estimator, print the estimate
plot    render a sweep CSV to an SVG chart

Exit codes: 0 success, 2 configuration/usage error, 1 runtime error.
The worker count defaults to the ``SNRLAB_THREADS`` environment variable.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from .bayes import SpikePriorConfig, ab_diagnostics, bayes_risk_mc, spike_posterior
from .datamodel import Dataset, ParamSpace, classify_regime
from .harness import (ConfigError, CsvSchemaError, compare_theory, load_config,
                      read_csv, run_sweep, write_csv)
from .plotting import emit_plot
from .rng import RngStream
from .theory import (AsymptoticValidityWarning, enet_second_order_bounds,
                     minimax_first_order, ridge_second_order_risk, risk_curves,
                     zero_estimator_risk)
from .tuning import (Family, RegimeMismatchError, Tuning, enet_default_tuning,
                     lasso_default_lambda, ridge_default_lambda)
from .estimators import bss_fit, enet_fit, lasso_fit, ridge_fit, zero_fit

__all__ = ["cli_main", "main"]


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SNRLAB_THREADS", "1")))
    except ValueError:
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snrlab",
        description="Sparse-regression estimators and SNR-aware risk experiments")
    parser.add_argument("--version", action="version", version=f"snrlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run an SNR sweep from a config file")
    sw.add_argument("--config", required=True, help="flat key = value config file")
    sw.add_argument("--out", required=True, help="output CSV path")
    sw.add_argument("--seed", type=int, default=None, help="override master_seed")
    sw.add_argument("--trials", type=int, default=None, help="override trial count")
    sw.add_argument("--threads", type=int, default=_default_threads())
    sw.add_argument("--plot", default=None, help="also render an SVG to this path")
    sw.add_argument("--report", action="store_true",
                    help="print the theory comparison table")

    th = sub.add_parser("theory", help="print the risk-formula table")
    th.add_argument("--k", type=int, required=True)
    th.add_argument("--p", type=int, required=True)
    th.add_argument("--tau", type=float, required=True)
    th.add_argument("--sigma", type=float, required=True)

    by = sub.add_parser("bayes", help="spike-prior lower-bound diagnostics")
    by.add_argument("--n", type=int, default=300)
    by.add_argument("--m", type=int, default=300)
    by.add_argument("--lam-factor", type=float, default=0.5,
                    help="spike height as a multiple of sqrt(2 log m)")
    by.add_argument("--trials", type=int, default=200)
    by.add_argument("--risk-trials", type=int, default=400)
    by.add_argument("--symmetric", action="store_true")
    by.add_argument("--seed", type=int, default=0)

    ft = sub.add_parser("fit", help="fit one estimator on one generated dataset")
    ft.add_argument("--estimator", required=True,
                    choices=[f.value for f in Family])
    ft.add_argument("--n", type=int, required=True)
    ft.add_argument("--p", type=int, required=True)
    ft.add_argument("--k", type=int, required=True)
    ft.add_argument("--tau", type=float, required=True)
    ft.add_argument("--sigma", type=float, required=True)
    ft.add_argument("--seed", type=int, default=0)
    ft.add_argument("--lam", type=float, default=None,
                    help="penalty weight (default: closed-form tuning)")
    ft.add_argument("--gamma", type=float, default=None,
                    help="elastic-net l2 weight (default: closed-form tuning)")
    ft.add_argument("--budget", type=int, default=1_000_000,
                    help="best-subset node budget")

    pl = sub.add_parser("plot", help="render a sweep CSV to SVG")
    pl.add_argument("csv", help="input CSV (write_csv schema)")
    pl.add_argument("svg", help="output SVG path")
    pl.add_argument("--y-max", type=float, default=1.0)
    pl.add_argument("--title", default="")
    pl.add_argument("--k", type=int, default=None)
    pl.add_argument("--p", type=int, default=None)
    pl.add_argument("--tau", type=float, default=None)
    return parser


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        from dataclasses import replace
        config = replace(config, master_seed=args.seed)
    if args.trials is not None:
        from dataclasses import replace
        config = replace(config, trials=args.trials)
    config = config.validate()
    result = run_sweep(config, threads=args.threads)
    write_csv(result, args.out)
    print(f"wrote {args.out} ({len(result.cells)} cells, "
          f"{config.trials} trials/cell, seed {config.master_seed})")
    if args.report:
        print(compare_theory(result).to_text())
    if args.plot:
        emit_plot(args.out, args.plot, {"overlays": result.curves})
        print(f"wrote {args.plot}")
    return 0


def _cmd_theory(args) -> int:
    space = ParamSpace(k=args.k, tau=args.tau, sigma=args.sigma)
    regime = classify_regime(args.p, space)
    print(f"mu = {space.mu:.6g}, rho = {regime.rho:.6g}, "
          f"regime = {regime.label.value}")
    scale = zero_estimator_risk(space)
    print(f"zero-estimator worst-case risk (k tau^2): {scale:.6g}")
    first = minimax_first_order(args.p, space, regime)
    print(f"first-order minimax risk:                 {first:.6g}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AsymptoticValidityWarning)
        ridge2 = ridge_second_order_risk(args.p, space)
        lam = ridge_default_lambda(args.p, space).lam
        note = "  [outside validity]" if caught else ""
    print(f"ridge second-order risk (lambda={lam:.6g}): {ridge2:.6g}{note}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AsymptoticValidityWarning)
        lo, up = enet_second_order_bounds(args.p, space)
        note = "  [outside validity]" if caught else ""
    print(f"elastic-net second-order bounds:          "
          f"[{up:.6g}, {lo:.6g}]{note}")
    try:
        t = enet_default_tuning(args.p, space)
        print(f"elastic-net closed-form tuning: lambda={t.lam:.6g}, "
              f"gamma={t.gamma:.6g}")
    except RegimeMismatchError as exc:
        print(f"elastic-net closed-form tuning: unavailable ({exc})")
    lam_l = lasso_default_lambda(args.p, args.k, args.sigma).lam
    print(f"lasso closed-form tuning: lambda={lam_l:.6g}")
    return 0


def _cmd_bayes(args) -> int:
    lam = args.lam_factor * math.sqrt(2.0 * math.log(args.m))
    root = RngStream(args.seed)
    p1s, As, logBs = [], [], []
    for t in range(args.trials):
        g = root.child(10, t).generator()
        X = g.standard_normal((args.n, args.m)) / math.sqrt(args.n)
        z = g.standard_normal(args.n)
        y = lam * X[:, 0] + z
        diag = spike_posterior(y, X, lam, symmetric=args.symmetric)
        p1s.append(diag.p[0])
        A, logB = ab_diagnostics(X, z, lam)
        As.append(A)
        logBs.append(logB)
    p1s, As, logBs = map(np.asarray, (p1s, As, logBs))
    print(f"spike height lambda = {lam:.6g} ({args.lam_factor} * sqrt(2 log m))")
    print(f"median p1           = {np.median(p1s):.6g}")
    print(f"mean A              = {As.mean():.6g}")
    print(f"frac(log B >= log 10) = {(logBs >= math.log(10)).mean():.4g}")
    cfg = SpikePriorConfig(m=args.m, lam=lam, symmetric=args.symmetric)
    risk, se = bayes_risk_mc(cfg, args.n, args.risk_trials, root.child(20))
    print(f"bayes risk          = {risk:.6g} +- {se:.3g}  "
          f"(lambda^2 = {lam * lam:.6g}, ratio {risk / lam**2:.4g})")
    return 0


def _cmd_fit(args) -> int:
    space = ParamSpace(k=args.k, tau=args.tau, sigma=args.sigma)
    ds = Dataset.generate(args.n, args.p, space, RngStream(args.seed))
    family = Family(args.estimator)
    if family is Family.RIDGE:
        lam = args.lam if args.lam is not None \
            else ridge_default_lambda(args.p, space).lam
        est = ridge_fit(ds.X, ds.y, lam)
        used = Tuning(family, lam=lam)
    elif family is Family.LASSO:
        lam = args.lam if args.lam is not None \
            else lasso_default_lambda(args.p, args.k, args.sigma).lam
        est = lasso_fit(ds.X, ds.y, lam)
        used = Tuning(family, lam=lam)
    elif family is Family.ELASTIC_NET:
        if args.lam is not None and args.gamma is not None:
            lam, gamma = args.lam, args.gamma
        else:
            t = enet_default_tuning(args.p, space)
            lam, gamma = t.lam, t.gamma
        est = enet_fit(ds.X, ds.y, lam, gamma)
        used = Tuning(family, lam=lam, gamma=gamma)
    elif family is Family.BEST_SUBSET:
        est = bss_fit(ds.X, ds.y, args.k, budget=args.budget)
        used = Tuning(family, k=args.k)
    else:
        est = zero_fit(args.p)
        used = Tuning(family)
    beta = ds.beta.to_dense()
    d = est.coefficients - beta
    print(f"estimator     : {family.value}")
    print(f"tuning        : lam={used.lam:.6g} gamma={used.gamma:.6g} k={used.k}")
    print(f"objective     : {est.objective:.10g}")
    print(f"iterations    : {est.iterations}")
    print(f"converged     : {est.converged}")
    print(f"kkt residual  : {est.kkt_residual:.3g}")
    print(f"certificate   : {est.certificate.value if est.certificate else '-'}")
    print(f"nonzeros      : {int(np.count_nonzero(est.coefficients))}")
    print(f"unscaled error: {float(d @ d):.10g}")
    print(f"scaled error  : {float(d @ d) / float(beta @ beta):.10g}")
    return 0


def _cmd_plot(args) -> int:
    options = {"y_max": args.y_max, "title": args.title}
    if args.k is not None and args.p is not None and args.tau is not None:
        rows = read_csv(args.csv)
        grid = sorted({r["inv_snr"] for r in rows})
        options["overlays"] = risk_curves(args.p, args.k, args.tau, grid)
    emit_plot(args.csv, args.svg, options)
    print(f"wrote {args.svg}")
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "theory": _cmd_theory,
    "bayes": _cmd_bayes,
    "fit": _cmd_fit,
    "plot": _cmd_plot,
}


def cli_main(argv=None) -> int:
    """Entry point; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, CsvSchemaError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:  # covers ConfigError and bad parameter values
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

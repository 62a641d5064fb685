"""Command line entry point: ``mimpac {simulate,fit,experiment,rate,check}``."""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness, theory
from .model import Dataset, empirical_risk, excess_risk_mc, lambda_from_constants
from .sampler import ChainConfig, draw_estimator

log = logging.getLogger("mimpac")


def _config(args) -> harness.ExperimentConfig:
    return harness.load_config(args.config) if args.config else harness.ExperimentConfig()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_dataset(path: str, K: float, C: float) -> Dataset:
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Dataset(raw[:, :-1], raw[:, -1], K=K, C=C)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    n = args.n if args.n is not None else cfg.n_grid[0]
    data, _ = harness.generate_synthetic(cfg, args.seed, n)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{j + 1}" for j in range(data.p)] + ["y"])
    for x, y in zip(data.X, data.Y):
        writer.writerow([repr(float(v)) for v in x] + [repr(float(y))])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_fit(args) -> int:
    cfg = _config(args)
    truth = None
    if args.data:
        data = _read_dataset(args.data, cfg.K, cfg.C)
    else:
        n = args.n if args.n is not None else cfg.n_grid[0]
        data, truth = harness.generate_synthetic(cfg, args.seed, n)
    if data.p != cfg.p:
        cfg = harness.ExperimentConfig(**{**cfg.__dict__, "p": data.p, "sparsity_true": min(cfg.sparsity_true, data.p)})
    noise = cfg.noise
    _, lam = lambda_from_constants(data.n, cfg.C, noise.Gamma, noise.sigma)
    lam *= cfg.lambda_scale
    spec = harness.prior_for(cfg, data.n)
    chain = ChainConfig(lam=lam, steps=cfg.chain_steps, burn_in=cfg.burn_in, seed=args.seed)
    state, risk, result = draw_estimator(data, spec, chain, np.random.default_rng(args.seed))
    lines = [
        f"lambda = {lam:.6g}",
        f"d_hat = {state.d}",
        f"sparsity_hat = {state.index_set.size}",
        f"M_hat = {state.M}",
        f"support = {list(state.index_set.rows)}",
        f"empirical_risk = {empirical_risk(state, data):.6g}",
    ]
    if truth is not None:
        excess, se = excess_risk_mc(state, truth, harness.covariates(cfg), cfg.n_eval, seed=[0, args.seed, 3])
        lines.append(f"excess_risk = {excess:.6g} +- {se:.2g}")
    lines.append(f"acceptance = {result.acceptance_rate():.3f}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_experiment(args) -> int:
    cfg = _config(args)

    def progress(row):
        log.info("n=%s seed=%s excess=%.4g", row["n"], row["seed"], row["excess_risk"])

    rows = harness.run_experiment(cfg, threads=args.threads, root=args.seed, progress=progress)
    harness.write_csv(rows, args.out or cfg.output)
    return 0


def cmd_rate(args) -> int:
    fit = harness.fit_rate(args.csv)
    _emit(fit.report(), args.out)
    return 0


def cmd_check(args) -> int:
    names = args.only.split(",") if args.only else None
    if names:
        unknown = set(names) - set(theory.CHECKS)
        if unknown:
            raise ValueError(f"unknown check groups: {sorted(unknown)}")
    results = theory.run_checks(names, seed=args.seed)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["check", "status", "value", "threshold", "note"])
    for r in results:
        writer.writerow([r.name, "pass" if r.passed else "FAIL", repr(float(r.value)), repr(float(r.threshold)), r.note])
    _emit(buf.getvalue(), args.out)
    return 0 if all(r.passed for r in results) else 1


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags; SUPPRESS keeps them from clobbering values given earlier
    def default(v):
        return argparse.SUPPRESS if suppress else v

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=default(None), help="key = value experiment config")
    common.add_argument("--seed", type=int, default=default(0), help="root seed (unsigned 64-bit)")
    common.add_argument("--out", metavar="PATH", default=default(None), help="output file (stdout when omitted)")
    common.add_argument("--threads", type=int, default=default(1), help="worker processes for experiment")
    common.add_argument("--verbose", action="store_true", default=default(False))
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    parser = argparse.ArgumentParser(prog="mimpac", description=__doc__, parents=[_global_flags(suppress=False)])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="write one synthetic dataset as CSV")
    p.add_argument("--n", type=int, help="sample size (first of the n grid by default)")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("fit", parents=[common], help="one estimator draw; prints structure and risks")
    p.add_argument("--data", metavar="PATH", help="CSV with columns x1..xp,y (synthetic when omitted)")
    p.add_argument("--n", type=int, help="sample size for synthetic data")
    p.set_defaults(func=cmd_fit)
    p = sub.add_parser("experiment", parents=[common], help="run the (n, seed) grid to CSV")
    p.set_defaults(func=cmd_experiment)
    p = sub.add_parser("rate", parents=[common], help="slope of log median excess risk vs log n")
    p.add_argument("csv", help="experiment CSV")
    p.set_defaults(func=cmd_rate)
    p = sub.add_parser("check", parents=[common], help="numerical lemma checks as a pass/fail CSV")
    p.add_argument("--only", help=f"comma-separated subset of {','.join(theory.CHECKS)}")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if not 0 <= args.seed < 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

Subcommands::

    denoise    --input Y.csv --snr 1.0 --noise gaussian --output est.csv
    experiment --config sweep.json
    overlap    --config overlap.json [--sigma-indices 100,200,300]
    mmse-curve --prior gaussian-iid --lambda-max 3 --points 20
    check      (runs the numerical property suites)

Exit codes: 0 success, 1 validation/usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np


class _Parser(argparse.ArgumentParser):
    # usage problems must exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit_(message)


class SystemExit_(Exception):
    pass


def _build_parser() -> _Parser:
    p = _Parser(prog="rrie", description="Rectangular rotation-invariant matrix denoising")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("denoise", help="denoise a stored observation matrix")
    d.add_argument("--input", required=True)
    d.add_argument("--snr", type=float, required=True)
    d.add_argument("--noise", choices=["gaussian", "uniform02"], default="gaussian")
    d.add_argument("--alpha", type=float, default=None,
                   help="expected aspect ratio n/m; checked against the input")
    d.add_argument("--eta", type=float, default=None)
    d.add_argument("--output", required=True)

    e = sub.add_parser("experiment", help="run a configured MSE sweep")
    e.add_argument("--config", required=True)

    o = sub.add_parser("overlap", help="run a fixed-signal overlap experiment")
    o.add_argument("--config", required=True)
    o.add_argument("--sigma-indices", default=None,
                   help="comma-separated signal singular value ranks")

    mc = sub.add_parser("mmse-curve", help="Gaussian-noise asymptotic MMSE curve")
    mc.add_argument("--prior", default="gaussian-iid",
                    help='"gaussian-iid" or "sparse-diag:<p>"')
    mc.add_argument("--lambda-max", type=float, required=True)
    mc.add_argument("--points", type=int, required=True)
    mc.add_argument("--n", type=int, default=500)
    mc.add_argument("--m", type=int, default=None)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--output", default="mmse_curve.csv")

    sub.add_parser("check", help="run the numerical property suites")
    return p


def _cmd_denoise(args) -> int:
    from .estimator import RectangularRIE
    from .matrixio import read_matrix, write_matrix

    y = read_matrix(args.input)
    n, m = y.shape
    if n > m:
        print(f"error: input is {n}x{m}; transpose so rows <= columns", file=sys.stderr)
        return 1
    if args.alpha is not None and abs(args.alpha - n / m) > 1e-12:
        print(f"error: --alpha {args.alpha} != n/m = {n / m}", file=sys.stderr)
        return 1
    est = RectangularRIE(snr=args.snr, noise=args.noise, eta=args.eta)
    try:
        shat = est.denoise(y)
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    write_matrix(args.output, shat)
    print(f"wrote {args.output} ({n}x{m})")
    return 0


def _cmd_experiment(args) -> int:
    from .harness import ExperimentConfig, emit_plot_data, run_experiment

    config = ExperimentConfig.from_json(args.config)
    result = run_experiment(config)
    out = config.output_path or (Path(args.config).stem + "_aggregate.csv")
    emit_plot_data(result, out)
    if result.failures:
        print(f"warning: {result.failures} failed trials excluded", file=sys.stderr)
    for a in result.aggregates:
        print(f"{a.estimator} lambda={a.snr:g} mse={a.mean_mse:.4f} (se {a.stderr:.4f})")
    print(f"wrote {out}")
    return 0


def _cmd_overlap(args) -> int:
    from .harness import ExperimentConfig, run_overlap_experiment

    config = ExperimentConfig.from_json(args.config)
    if args.sigma_indices:
        indices = [int(s) for s in args.sigma_indices.split(",")]
    else:
        indices = [config.n // 4, config.n // 2, (3 * config.n) // 4]
    out = config.output_path or (Path(args.config).stem + "_overlap.csv")
    run_overlap_experiment(config, indices, output_path=out)
    print(f"wrote {out}")
    return 0


def _cmd_mmse_curve(args) -> int:
    from .ensembles import ChannelParams, NoiseModel, SignalPrior, sample_noise, sample_signal
    from .mmse import mmse_gaussian, reports_to_csv
    from .spectral import estimate_density, svd_spectrum

    if args.prior == "gaussian-iid":
        prior = SignalPrior(kind="gaussian-iid")
    elif args.prior.startswith("sparse-diag:"):
        prior = SignalPrior(kind="sparse-diag", sparsity=float(args.prior.split(":", 1)[1]))
    else:
        print(f"error: unknown prior spec {args.prior!r}", file=sys.stderr)
        return 1
    if args.lambda_max <= 0 or args.points < 1:
        print("error: need lambda-max > 0 and points >= 1", file=sys.stderr)
        return 1
    m = args.m or args.n
    noise = NoiseModel(kind="gaussian-iid")
    lams = np.linspace(args.lambda_max / args.points, args.lambda_max, args.points)
    rng = np.random.default_rng(args.seed)
    reports = []
    for lam in lams:
        params = ChannelParams(n=args.n, m=m, snr=float(lam))
        S = sample_signal(prior, params, rng)
        Z = sample_noise(noise, params, rng)
        spec = svd_spectrum(np.sqrt(lam) * S + Z, keep_vectors=False)
        density = estimate_density(spec).positive_half()
        reports.append(mmse_gaussian(density, float(lam), params.alpha))
    reports_to_csv(reports, args.output)
    print(f"wrote {args.output}")
    return 0


def _cmd_check(_args) -> int:
    """Fast invariant suites; exit 2 when any numerical property fails."""
    from . import checks

    failures = checks.run_all(verbose=True)
    return 0 if failures == 0 else 2


def cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit_ as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and friends
        return int(exc.code or 0)
    handlers = {
        "denoise": _cmd_denoise,
        "experiment": _cmd_experiment,
        "overlap": _cmd_overlap,
        "mmse-curve": _cmd_mmse_curve,
        "check": _cmd_check,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli())

"""Config-driven experiment runner: MSE sweeps and overlap experiments.

Each trial draws a signal and a noise realization from split RNG streams,
applies the selected estimators, and records per-trial mean squared errors.
Results are deterministic given (config, master_seed) regardless of the
execution schedule.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .ensembles import (
    ChannelParams,
    NoiseModel,
    SignalPrior,
    sample_noise,
    sample_signal,
    trial_seed,
)
from .mmse import empirical_mse
from .rie import (
    OverlapCurve,
    gaussian_rie_shrink,
    general_rie_shrink,
    identity_shrink,
    oracle_singular_values,
    overlap_empirical,
    overlap_theory,
    reconstruct,
)
from .spectral import eta_policy, eval_at_singular_values, svd_spectrum

ESTIMATORS = ("rie", "oracle", "identity")

#: Default SNR sweep, matching the figure abscissae of the reference data.
DEFAULT_LAMBDA_GRID = (0.1, 0.3, 0.5, 0.7, 0.9, 1.0, 2.0, 3.0, 4.0, 5.0)

_CONFIG_KEYS = {
    "prior",
    "noise",
    "n",
    "m",
    "lambda_grid",
    "trials",
    "master_seed",
    "estimators",
    "eta_override",
    "output_path",
    "fixed_s",
    "normalizer",
}


def _threads() -> int:
    env = os.environ.get("RRIE_THREADS", "").strip()
    if env:
        k = int(env)
        if k < 1:
            raise ValueError("RRIE_THREADS must be >= 1")
        return k
    return os.cpu_count() or 1


def _prior_from_dict(d: dict) -> SignalPrior:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind == "sparse-diag":
        p = d.pop("sparsity")
        if d:
            raise ValueError(f"unknown prior keys: {sorted(d)}")
        return SignalPrior(kind="sparse-diag", sparsity=float(p))
    if kind == "gaussian-iid":
        if d:
            raise ValueError(f"unknown prior keys: {sorted(d)}")
        return SignalPrior(kind="gaussian-iid")
    raise ValueError(f"prior kind {kind!r} is not configurable from a file")


def _noise_from_dict(d: dict) -> NoiseModel:
    d = dict(d)
    kind = d.pop("kind", None)
    if d:
        raise ValueError(f"unknown noise keys: {sorted(d)}")
    if kind in ("gaussian-iid", "haar-uniform"):
        return NoiseModel(kind=kind)
    raise ValueError(f"noise kind {kind!r} is not configurable from a file")


@dataclass
class ExperimentConfig:
    """Everything one MSE sweep needs; validates eagerly."""

    prior: SignalPrior
    noise: NoiseModel
    n: int
    m: int
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID
    trials: int = 10
    master_seed: int = 0
    estimators: Sequence[str] = ("rie",)
    eta_override: Optional[float] = None
    output_path: Optional[str] = None
    fixed_s: bool = False
    normalizer: Optional[float] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        grid = np.asarray(self.lambda_grid, dtype=float)
        if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
            raise ValueError("lambda_grid must be strictly increasing and positive")
        self.lambda_grid = tuple(float(x) for x in grid)
        if self.n > self.m:
            raise ValueError("need n <= m")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad:
            raise ValueError(f"unknown estimators: {sorted(bad)}")
        self.estimators = tuple(self.estimators)

    @property
    def alpha(self) -> float:
        return self.n / self.m

    def mse_normalizer(self) -> float:
        if self.normalizer is not None:
            return self.normalizer
        if self.prior.kind == "sparse-diag":
            return 1.0 - self.prior.sparsity
        return 1.0

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        missing = {"prior", "noise", "n", "m"} - set(d)
        if missing:
            raise ValueError(f"missing config keys: {sorted(missing)}")
        kwargs = dict(d)
        kwargs["prior"] = _prior_from_dict(d["prior"])
        kwargs["noise"] = _noise_from_dict(d["noise"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class TrialRow:
    estimator: str
    snr: float
    trial: int
    mse: float
    normalized_mse: float
    seed: str
    runtime_ms: float
    failed: bool = False


@dataclass
class Aggregate:
    estimator: str
    snr: float
    mean_mse: float
    stderr: float
    trials: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    aggregates: list = field(default_factory=list)
    failures: int = 0

    def mean_mse(self, estimator: str, snr: float) -> float:
        for a in self.aggregates:
            if a.estimator == estimator and a.snr == snr:
                return a.mean_mse
        raise KeyError((estimator, snr))

    def stderr(self, estimator: str, snr: float) -> float:
        for a in self.aggregates:
            if a.estimator == estimator and a.snr == snr:
                return a.stderr
        raise KeyError((estimator, snr))


def _rie_shrinker(config: ExperimentConfig):
    """Pick the shrinkage rule matching the configured noise."""
    if config.noise.kind == "gaussian-iid" and config.noise.rtransform is None:
        return lambda spec, lam, pg: gaussian_rie_shrink(spec, lam, per_gamma=pg)
    rt = config.noise.rtransform_for(config.alpha)
    return lambda spec, lam, pg: general_rie_shrink(spec, lam, rt, per_gamma=pg)


def _run_trial(config: ExperimentConfig, li: int, lam: float, ti: int, S_fixed, shrinker):
    t0 = time.perf_counter()
    params = ChannelParams(n=config.n, m=config.m, snr=lam)
    seed = trial_seed(config.master_seed, 1, li, ti)
    rng = np.random.default_rng(seed)
    norm = config.mse_normalizer()
    rows = []
    try:
        S = S_fixed if S_fixed is not None else sample_signal(config.prior, params, rng)
        Z = sample_noise(config.noise, params, rng)
        Y = np.sqrt(lam) * S + Z
        spectrum = svd_spectrum(Y, keep_vectors=True)
        per_gamma = None
        for name in config.estimators:
            if name == "rie":
                if per_gamma is None:
                    per_gamma = eval_at_singular_values(spectrum, eta=config.eta_override)
                shrinkage = shrinker(spectrum, lam, per_gamma)
            elif name == "oracle":
                shrinkage = oracle_singular_values(S, spectrum)
            else:
                shrinkage = identity_shrink(spectrum, lam)
            err = empirical_mse(S, reconstruct(spectrum, shrinkage))
            rows.append(
                TrialRow(
                    estimator=name,
                    snr=lam,
                    trial=ti,
                    mse=err,
                    normalized_mse=err / norm,
                    seed=f"{config.master_seed}:{li}:{ti}",
                    runtime_ms=(time.perf_counter() - t0) * 1e3,
                )
            )
    except np.linalg.LinAlgError:
        rows.append(
            TrialRow(
                estimator="*",
                snr=lam,
                trial=ti,
                mse=float("nan"),
                normalized_mse=float("nan"),
                seed=f"{config.master_seed}:{li}:{ti}",
                runtime_ms=(time.perf_counter() - t0) * 1e3,
                failed=True,
            )
        )
    return rows


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the configured sweep and aggregate per-estimator MSE curves.

    A fresh signal is drawn per trial unless ``fixed_s`` is set, in which
    case a single signal (its own RNG stream) is shared by every trial.
    Per-trial linear-algebra failures are recorded and excluded from the
    aggregates instead of aborting the sweep.
    """
    S_fixed = None
    if config.fixed_s:
        params0 = ChannelParams(n=config.n, m=config.m, snr=config.lambda_grid[0])
        S_fixed = sample_signal(
            config.prior, params0, np.random.default_rng(trial_seed(config.master_seed, 2, 0))
        )
    shrinker = _rie_shrinker(config) if "rie" in config.estimators else None
    tasks = [
        (li, lam, ti)
        for li, lam in enumerate(config.lambda_grid)
        for ti in range(config.trials)
    ]
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(
                pool.map(lambda t: _run_trial(config, t[0], t[1], t[2], S_fixed, shrinker), tasks)
            )
    else:
        chunks = [_run_trial(config, li, lam, ti, S_fixed, shrinker) for li, lam, ti in tasks]
    result = ExperimentResult(config=config)
    for chunk in chunks:
        for row in chunk:
            if row.failed:
                result.failures += 1
            result.rows.append(row)
    result.rows.sort(key=lambda r: (r.snr, r.trial, r.estimator))
    for name in config.estimators:
        for lam in config.lambda_grid:
            vals = np.array(
                [r.mse for r in result.rows if r.estimator == name and r.snr == lam and not r.failed]
            )
            if vals.size == 0:
                continue
            stderr = float(np.std(vals, ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
            result.aggregates.append(
                Aggregate(
                    estimator=name,
                    snr=lam,
                    mean_mse=float(vals.mean()),
                    stderr=stderr,
                    trials=int(vals.size),
                )
            )
    return result


AGGREGATE_CSV_HEADER = "estimator,lambda,mean_mse,stderr,n,m,trials"


def emit_plot_data(result: ExperimentResult, path, fmt: str = "csv") -> Path:
    """Write the aggregate table; ``fmt="dat"`` adds a gnuplot twin."""
    if not result.aggregates:
        raise ValueError("empty result")
    path = Path(path)
    cfg = result.config
    with open(path, "w") as fh:
        fh.write(AGGREGATE_CSV_HEADER + "\n")
        for a in result.aggregates:
            fh.write(
                f"{a.estimator},{a.snr:.17g},{a.mean_mse:.17g},{a.stderr:.17g},"
                f"{cfg.n},{cfg.m},{a.trials}\n"
            )
    if fmt == "dat":
        dat = path.with_suffix(".dat")
        with open(dat, "w") as fh:
            fh.write("# " + AGGREGATE_CSV_HEADER.replace(",", " ") + "\n")
            for a in result.aggregates:
                fh.write(
                    f"{a.estimator} {a.snr:.17g} {a.mean_mse:.17g} {a.stderr:.17g} "
                    f"{cfg.n} {cfg.m} {a.trials}\n"
                )
    return path


def read_aggregate_csv(path) -> list:
    """Parse an aggregate CSV back into Aggregate rows (round-trip exact)."""
    out = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != AGGREGATE_CSV_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        for line in fh:
            est, lam, mean, se, n, m, k = line.strip().split(",")
            out.append(
                Aggregate(
                    estimator=est,
                    snr=float(lam),
                    mean_mse=float(mean),
                    stderr=float(se),
                    trials=int(k),
                )
            )
    return out


def run_overlap_experiment(
    config: ExperimentConfig,
    sigma_indices: Sequence[int],
    output_path=None,
):
    """Fixed-signal overlap experiment: Monte-Carlo curves plus theory.

    Returns (curves, theory) where theory[k] aligns with curves[k]; the
    theory argument is the effective signal singular value sqrt(snr)*sigma.
    With ``output_path`` the pairs are written side by side as
    ``gamma,sigma,overlap_empirical,overlap_theory``.
    """
    if not config.fixed_s:
        raise ValueError("overlap experiments require fixed_s")
    if len(config.lambda_grid) != 1:
        raise ValueError("overlap experiments run at a single snr")
    lam = config.lambda_grid[0]
    params = ChannelParams(n=config.n, m=config.m, snr=lam)
    S = sample_signal(
        config.prior, params, np.random.default_rng(trial_seed(config.master_seed, 2, 0))
    )
    curves, mean_gamma, pooled = overlap_empirical(
        S,
        config.noise,
        params,
        config.trials,
        sigma_indices=sigma_indices,
        master_seed=config.master_seed,
    )
    eta = config.eta_override or eta_policy(float(mean_gamma.max()), config.n)
    rt = config.noise.rtransform_for(config.alpha)
    theory = []
    for c in curves:
        vals = overlap_theory(
            c.gamma_grid, np.sqrt(lam) * c.sigma, pooled, config.alpha, rt, eta
        )
        theory.append(
            OverlapCurve(
                gamma_grid=c.gamma_grid,
                sigma=c.sigma,
                values=vals,
                sigma_index=c.sigma_index,
            )
        )
    if output_path is not None:
        with open(output_path, "w") as fh:
            fh.write("gamma,sigma,overlap_empirical,overlap_theory\n")
            for c, t in zip(curves, theory):
                for g, e, th in zip(c.gamma_grid, c.values, t.values):
                    fh.write(f"{g:.17g},{c.sigma:.17g},{e:.17g},{th:.17g}\n")
    return curves, theory

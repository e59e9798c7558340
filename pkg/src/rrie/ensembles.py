"""Random matrix ensembles and the additive observation channel.

Signal and noise matrices are drawn from rotationally invariant ensembles:
either i.i.d. Gaussian entries, or a Haar rotation ``U @ Sigma @ V.T`` of a
sampled singular spectrum.  The observation channel is

    Y = sqrt(snr) * S + Z

with ``S`` (N x M) the signal and ``Z`` (N x M) the noise.  Everything here
works with N <= M (aspect ratio ``alpha = N/M`` in (0, 1]); transpose taller
inputs before use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

RngLike = Union[None, int, np.random.SeedSequence, np.random.Generator]

SIGNAL_KINDS = ("gaussian-iid", "sparse-diag", "haar-spectrum")
NOISE_KINDS = ("gaussian-iid", "haar-uniform", "haar-spectrum")


def as_generator(seed: RngLike) -> np.random.Generator:
    """Coerce ints, SeedSequences, Generators or None to a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_seed(master_seed: int, *key: int) -> np.random.SeedSequence:
    """Derive an independent, reproducible stream for one trial.

    Streams are split from the master seed with a spawn key, so any subset
    of trials can be regenerated without drawing the others.
    """
    return np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))


@dataclass(frozen=True)
class ChannelParams:
    """Dimensions and SNR of the observation channel.

    ``alpha`` is derived as ``n / m``; passing it explicitly is allowed as a
    consistency check only.
    """

    n: int
    m: int
    snr: float
    alpha: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("dimensions must be positive")
        if self.n > self.m:
            raise ValueError(
                f"n={self.n} > m={self.m}: transpose the problem so that n <= m"
            )
        if self.snr < 0:
            raise ValueError("snr must be nonnegative")
        ratio = self.n / self.m
        if self.alpha is None:
            object.__setattr__(self, "alpha", ratio)
        elif abs(self.alpha - ratio) > 1e-12:
            raise ValueError(f"alpha={self.alpha} does not equal n/m={ratio}")


@dataclass(frozen=True)
class SignalPrior:
    """Rotationally invariant signal prior.

    kinds
        ``gaussian-iid``   entries N(0, 1/n)
        ``sparse-diag``    singular values 0 w.p. ``sparsity``, 1 otherwise,
                           Haar-rotated
        ``haar-spectrum``  user-supplied ``sampler(n, rng) -> n nonnegative
                           values``, Haar-rotated
    """

    kind: str
    sparsity: float = 0.0
    sampler: Optional[Callable[[int, np.random.Generator], np.ndarray]] = None

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise ValueError(f"unknown signal prior kind {self.kind!r}")
        if self.kind == "sparse-diag" and not 0.0 <= self.sparsity <= 1.0:
            raise ValueError("sparsity must lie in [0, 1]")
        if self.kind == "haar-spectrum" and self.sampler is None:
            raise ValueError("haar-spectrum prior requires a sampler")

    def second_moment(self, params: ChannelParams) -> float:
        """Limiting second moment of the signal singular-value distribution."""
        if self.kind == "gaussian-iid":
            return 1.0 / params.alpha
        if self.kind == "sparse-diag":
            return 1.0 - self.sparsity
        raise ValueError("second moment of a custom spectrum is not known a priori")


@dataclass(frozen=True)
class NoiseModel:
    """Rotationally invariant noise ensemble.

    kinds
        ``gaussian-iid``   entries N(0, 1/n); rectangular R-transform z/alpha
        ``haar-uniform``   singular values i.i.d. uniform on [0, 2] (known
                           R-transform only at alpha = 1)
        ``haar-spectrum``  custom sampler; supply ``rtransform`` for the
                           general shrinker

    ``rtransform``, when given, must accept complex arguments: it is evaluated
    inside the general shrinker off the real axis.
    """

    kind: str
    sampler: Optional[Callable[[int, np.random.Generator], np.ndarray]] = None
    rtransform: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "haar-spectrum" and self.sampler is None:
            raise ValueError("haar-spectrum noise requires a sampler")

    def rtransform_for(self, alpha: float) -> Callable[[np.ndarray], np.ndarray]:
        """Analytic rectangular R-transform of the noise at aspect ratio alpha."""
        from .freeprob import marchenko_pastur_rtransform, uniform02_rtransform

        if self.rtransform is not None:
            return self.rtransform
        if self.kind == "gaussian-iid":
            return marchenko_pastur_rtransform(alpha)
        if self.kind == "haar-uniform":
            if abs(alpha - 1.0) > 1e-12:
                raise ValueError(
                    "haar-uniform noise has a known R-transform only at alpha=1; "
                    "supply rtransform explicitly"
                )
            return uniform02_rtransform()
        raise ValueError(
            f"noise kind {self.kind!r} carries no analytic R-transform; "
            "supply one to use the general shrinker"
        )


@dataclass(frozen=True)
class Observation:
    """One draw of the channel: y = sqrt(snr) * truth + noise."""

    y: np.ndarray
    params: ChannelParams
    truth: Optional[np.ndarray] = None
    seed: Optional[np.random.SeedSequence] = None


def sample_gaussian_matrix(
    n: int, m: int, entry_variance: float, rng: RngLike = None
) -> np.ndarray:
    """n x m matrix of i.i.d. centered Gaussians with the given entry variance."""
    if n < 1 or m < 1:
        raise ValueError("dimensions must be positive")
    if entry_variance < 0:
        raise ValueError("entry_variance must be nonnegative")
    rng = as_generator(rng)
    if entry_variance == 0.0:
        return np.zeros((n, m))
    return rng.standard_normal((n, m)) * np.sqrt(entry_variance)


def haar_orthogonal(n: int, rng: RngLike = None) -> np.ndarray:
    """Haar-distributed n x n orthogonal matrix.

    QR of a Gaussian matrix, with the columns of Q rescaled by the signs of
    the diagonal of R so that the factorization is unique and Q is exactly
    Haar (Mezzadri's correction).
    """
    rng = as_generator(rng)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def sample_haar_rotated(
    sigma: np.ndarray, n: int, m: int, rng: RngLike = None
) -> np.ndarray:
    """U @ Sigma @ V.T with independent Haar U (n x n), V (m x m).

    ``Sigma`` is the n x m rectangular diagonal built from ``sigma`` (length
    n, nonnegative).  Only the first n columns of V touch the product, but V
    is drawn as a full Haar matrix.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (n,):
        raise ValueError(f"sigma must have length n={n}, got shape {sigma.shape}")
    if n > m:
        raise ValueError("need n <= m")
    if not np.all(np.isfinite(sigma)) or np.any(sigma < 0):
        raise ValueError("singular values must be finite and nonnegative")
    rng = as_generator(rng)
    u = haar_orthogonal(n, rng)
    v = haar_orthogonal(m, rng)
    return (u * sigma) @ v[:, :n].T


def sample_signal(
    prior: SignalPrior, params: ChannelParams, rng: RngLike = None
) -> np.ndarray:
    """Draw one signal matrix from the prior at the channel dimensions."""
    rng = as_generator(rng)
    n, m = params.n, params.m
    if prior.kind == "gaussian-iid":
        return sample_gaussian_matrix(n, m, 1.0 / n, rng)
    if prior.kind == "sparse-diag":
        sigma = (rng.uniform(size=n) >= prior.sparsity).astype(float)
        return sample_haar_rotated(sigma, n, m, rng)
    sigma = np.asarray(prior.sampler(n, rng), dtype=float)
    return sample_haar_rotated(sigma, n, m, rng)


def sample_noise(
    noise: NoiseModel, params: ChannelParams, rng: RngLike = None
) -> np.ndarray:
    """Draw one noise matrix at the channel dimensions."""
    rng = as_generator(rng)
    n, m = params.n, params.m
    if noise.kind == "gaussian-iid":
        return sample_gaussian_matrix(n, m, 1.0 / n, rng)
    if noise.kind == "haar-uniform":
        return sample_haar_rotated(rng.uniform(0.0, 2.0, size=n), n, m, rng)
    sigma = np.asarray(noise.sampler(n, rng), dtype=float)
    return sample_haar_rotated(sigma, n, m, rng)


def observe(
    S: np.ndarray,
    noise: NoiseModel,
    params: ChannelParams,
    rng: RngLike = None,
) -> Observation:
    """Push a signal through the channel: Y = sqrt(snr) * S + Z.

    When ``rng`` is an int or a SeedSequence it is recorded on the
    Observation, so the noise draw can be regenerated exactly.
    """
    S = np.asarray(S, dtype=float)
    if S.shape != (params.n, params.m):
        raise ValueError(f"S has shape {S.shape}, expected {(params.n, params.m)}")
    seed: Optional[np.random.SeedSequence]
    if isinstance(rng, np.random.SeedSequence):
        seed = rng
    elif isinstance(rng, (int, np.integer)):
        seed = np.random.SeedSequence(int(rng))
    else:
        seed = None
    Z = sample_noise(noise, params, seed if seed is not None else rng)
    y = np.sqrt(params.snr) * S + Z
    return Observation(y=y, params=params, truth=S, seed=seed)

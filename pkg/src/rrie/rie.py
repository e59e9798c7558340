"""Rotation-invariant shrinkage estimators and singular-vector overlaps.

An estimator that commutes with two-sided rotations must keep the observed
singular vectors and can only shrink the singular values.  Three shrinkage
rules live here:

* ``oracle_singular_values``: the per-realization optimum, using the true
  signal (benchmark only);
* ``gaussian_rie_shrink``: the closed form for Gaussian i.i.d. noise,
  needing only the density and Hilbert transform of the observed spectrum;
* ``general_rie_shrink``: the rule for arbitrary rotationally invariant
  noise, consuming the noise's rectangular R-transform at a matched complex
  argument.

The overlap machinery (`zeta_star`, `overlap_theory`, `overlap_empirical`)
computes and measures the rescaled products of observed and true singular
vectors that underlie the shrinkers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .ensembles import ChannelParams, NoiseModel, as_generator, sample_noise, trial_seed
from .spectral import (
    DensityEstimate,
    SingularSpectrum,
    eval_at_singular_values,
    stieltjes_cauchy,
    svd_spectrum,
)


@dataclass
class ShrinkageResult:
    """Shrunk singular values xi aligned with the observed gamma (descending)."""

    gamma: np.ndarray
    xi: np.ndarray
    edge_flags: np.ndarray
    method: str

    def __len__(self) -> int:
        return len(self.xi)

    def clamped(self) -> np.ndarray:
        """Nonnegative view of xi, for consumers needing valid singular values."""
        return np.clip(self.xi, 0.0, None)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("gamma,xi,flag\n")
            for g, x, f in zip(self.gamma, self.xi, self.edge_flags):
                fh.write(f"{g:.17g},{x:.17g},{int(f)}\n")


@dataclass
class ZetaPair:
    """Subordination-style shift pair evaluated at one complex point."""

    zeta_a: complex
    zeta_b: complex
    z: complex
    m_value: complex   # M_{mu_Y}(1/z^2), kept for consistency checks
    big_z: complex     # C_{mu_Z} evaluated at the matched argument


@dataclass
class OverlapCurve:
    """Rescaled overlap values along the observed spectrum, at one sigma."""

    gamma_grid: np.ndarray
    sigma: float
    values: np.ndarray
    sigma_index: Optional[int] = None

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("gamma,sigma,overlap\n")
            for g, v in zip(self.gamma_grid, self.values):
                fh.write(f"{g:.17g},{self.sigma:.17g},{v:.17g}\n")


def _require_vectors(spectrum: SingularSpectrum) -> None:
    if not spectrum.has_vectors():
        raise ValueError("spectrum must retain its singular vectors")


def oracle_singular_values(S: np.ndarray, spectrum: SingularSpectrum) -> ShrinkageResult:
    """Optimal shrinkage given the true signal.

    xi_i = sum_j sigma_j (u_i . s_j^left)(v_i . s_j^right), the unconstrained
    minimizer of the squared error over all spectra sharing Y's vectors.
    """
    _require_vectors(spectrum)
    S = np.asarray(S, dtype=float)
    if S.shape != (spectrum.n, spectrum.m):
        raise ValueError("signal shape does not match the spectrum's source")
    s_spec = svd_spectrum(S, keep_vectors=True)
    a = spectrum.left.T @ s_spec.left          # (u_i . s_j^left)
    b = spectrum.right.T @ s_spec.right        # (v_i . s_j^right)
    xi = (a * b) @ s_spec.values
    return ShrinkageResult(
        gamma=spectrum.values,
        xi=xi,
        edge_flags=np.zeros(len(xi), dtype=bool),
        method="oracle",
    )


def _one_minus_alpha_over_gamma(gamma: np.ndarray, alpha: float) -> np.ndarray:
    """(1 - alpha)/gamma with the alpha = 1 cancellation taken exactly."""
    if alpha == 1.0:
        return np.zeros_like(gamma)
    if np.any(gamma == 0):
        raise ValueError("gamma = 0 with alpha < 1: the 1/gamma term diverges")
    return (1.0 - alpha) / gamma


def gaussian_rie_shrink(
    spectrum: SingularSpectrum,
    snr: float,
    alpha: Optional[float] = None,
    per_gamma: Optional[DensityEstimate] = None,
) -> ShrinkageResult:
    """Shrinkage for Gaussian i.i.d. noise of entry variance 1/n.

    xi_i = (1/sqrt(snr)) [ gamma_i - ((1-alpha)/alpha)/gamma_i
                           - 2 pi H[mu-bar](gamma_i) ]

    Edge-flagged gammas (density under the floor) get the conservative
    passthrough xi = gamma / sqrt(snr), flag retained.
    """
    if snr <= 0:
        raise ValueError("snr must be positive")
    if alpha is None:
        alpha = spectrum.alpha
    if per_gamma is None:
        per_gamma = eval_at_singular_values(spectrum)
    gamma = spectrum.values
    pi_h = np.pi * per_gamma.hilbert
    xi = (gamma - _one_minus_alpha_over_gamma(gamma, alpha) / alpha - 2.0 * pi_h) / np.sqrt(snr)
    flags = per_gamma.edge_flags.copy()
    xi = np.where(flags, gamma / np.sqrt(snr), xi)
    return ShrinkageResult(gamma=gamma, xi=xi, edge_flags=flags, method="gaussian-rie")


def general_rie_shrink(
    spectrum: SingularSpectrum,
    snr: float,
    noise_rtransform: Callable,
    alpha: Optional[float] = None,
    per_gamma: Optional[DensityEstimate] = None,
) -> ShrinkageResult:
    """Shrinkage for arbitrary rotationally invariant additive noise.

    With p = pi mu-bar(gamma), h = pi H[mu-bar](gamma), r = (1-alpha)/gamma:

        w  = r h + alpha h^2 - alpha p^2 + i p (r + 2 alpha h)
        xi = (gamma - Im C_Z(w) / p) / sqrt(snr)

    ``noise_rtransform`` must be evaluable at complex arguments.  Plugging
    C(z) = z/alpha reduces this algebraically to `gaussian_rie_shrink`.
    """
    if snr <= 0:
        raise ValueError("snr must be positive")
    if alpha is None:
        alpha = spectrum.alpha
    if per_gamma is None:
        per_gamma = eval_at_singular_values(spectrum)
    gamma = spectrum.values
    p = np.pi * per_gamma.mu
    h = np.pi * per_gamma.hilbert
    r = _one_minus_alpha_over_gamma(gamma, alpha)
    w = r * h + alpha * h**2 - alpha * p**2 + 1j * p * (r + 2.0 * alpha * h)
    flags = per_gamma.edge_flags.copy()
    c = np.asarray(noise_rtransform(w))
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = (gamma - np.imag(c) / p) / np.sqrt(snr)
    xi = np.where(flags, gamma / np.sqrt(snr), xi)
    if not np.all(np.isfinite(xi)):
        bad = ~np.isfinite(xi)
        xi = np.where(bad, gamma / np.sqrt(snr), xi)
        flags = flags | bad
    return ShrinkageResult(gamma=gamma, xi=xi, edge_flags=flags, method="general-rie")


def identity_shrink(spectrum: SingularSpectrum, snr: float) -> ShrinkageResult:
    """No shrinkage: xi = gamma / sqrt(snr), i.e. S-hat = Y / sqrt(snr)."""
    if snr <= 0:
        raise ValueError("snr must be positive")
    gamma = spectrum.values
    return ShrinkageResult(
        gamma=gamma,
        xi=gamma / np.sqrt(snr),
        edge_flags=np.zeros(len(gamma), dtype=bool),
        method="identity",
    )


def reconstruct(spectrum: SingularSpectrum, shrinkage) -> np.ndarray:
    """Assemble the estimate U diag(xi) V^T from the observed factors."""
    _require_vectors(spectrum)
    xi = shrinkage.xi if isinstance(shrinkage, ShrinkageResult) else np.asarray(shrinkage, float)
    if len(xi) != len(spectrum.values):
        raise ValueError("shrinkage length does not match the spectrum")
    return (spectrum.left * xi) @ spectrum.right.T


def zeta_star(
    z: complex,
    mu_y_atoms,
    alpha: float,
    noise_rtransform: Callable,
) -> ZetaPair:
    """Shift pair (zeta_a, zeta_b) at a point z in the lower half-plane.

    M = M_{mu_Y}(1/z^2) is obtained from the symmetrized resolvent through
    M = z G(z) - 1, then

        Z      = C_Z( T(M) / z^2 )
        zeta_a = z Z / (M + 1)
        zeta_b = alpha z Z / (alpha M + 1)
    """
    z = complex(z)
    if z.imag >= 0:
        raise ValueError("z must lie in the lower half-plane (z = x - i y, y > 0)")
    atoms = np.asarray(
        mu_y_atoms.values if isinstance(mu_y_atoms, SingularSpectrum) else mu_y_atoms,
        dtype=float,
    )
    g = 0.5 * (np.mean(1.0 / (z - atoms)) + np.mean(1.0 / (z + atoms)))
    m = z * g - 1.0
    u = (alpha * m + 1.0) * (m + 1.0) / z**2
    big_z = complex(np.asarray(noise_rtransform(np.array([u], dtype=complex)))[0])
    zeta_a = z * big_z / (m + 1.0)
    zeta_b = alpha * z * big_z / (alpha * m + 1.0)
    return ZetaPair(zeta_a=zeta_a, zeta_b=zeta_b, z=z, m_value=m, big_z=big_z)


def overlap_theory(
    gamma,
    sigma: float,
    mu_y_atoms,
    alpha: float,
    noise_rtransform: Callable,
    eta: float,
) -> np.ndarray:
    """Asymptotic rescaled overlap O(gamma, sigma) along the spectrum.

    O = Im[ sigma / ((z - zeta_b)(z - zeta_a) - sigma^2) ] / (pi mu-bar(gamma))
    at z = gamma - i eta.  ``sigma`` is the singular value of the
    SNR-absorbed signal sqrt(snr) * S.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if eta <= 0:
        raise ValueError("eta must be positive")
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    atoms = np.asarray(
        mu_y_atoms.values if isinstance(mu_y_atoms, SingularSpectrum) else mu_y_atoms,
        dtype=float,
    )
    ev = stieltjes_cauchy(atoms, gamma, eta)
    z = gamma - 1j * eta
    m = z * ev.g - 1.0
    u = (alpha * m + 1.0) * (m + 1.0) / z**2
    big_z = np.asarray(noise_rtransform(u))
    zeta_a = z * big_z / (m + 1.0)
    zeta_b = alpha * z * big_z / (alpha * m + 1.0)
    pimu = ev.g.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.imag(sigma / ((z - zeta_b) * (z - zeta_a) - sigma**2)) / pimu
    return out


def overlap_empirical(
    S_fixed: np.ndarray,
    noise: NoiseModel,
    params: ChannelParams,
    trials: int,
    rng=None,
    sigma_indices: Optional[Sequence[int]] = None,
    master_seed: Optional[int] = None,
) -> tuple:
    """Monte-Carlo rescaled overlaps for a fixed signal.

    For each trial the noise is redrawn, Y = sqrt(snr) S + Z decomposed, and
    N (u_i . s_j^left)(v_i . s_j^right) accumulated per rank i for each
    requested signal index j.  Returns (curves, mean_gamma, all_gammas):
    one OverlapCurve per j (values trial-averaged at fixed rank, abscissae =
    trial-averaged gamma), plus the pooled singular values of all trials.

    With ``master_seed`` given, per-trial streams are split deterministically
    and the result is independent of execution order.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    S_fixed = np.asarray(S_fixed, dtype=float)
    n = params.n
    s_spec = svd_spectrum(S_fixed, keep_vectors=True)
    if sigma_indices is None:
        sigma_indices = [n // 4, n // 2, (3 * n) // 4]
    sigma_indices = list(sigma_indices)
    sl = s_spec.left[:, sigma_indices]
    sr = s_spec.right[:, sigma_indices]
    base = as_generator(rng) if master_seed is None else None
    per_trial = np.empty((trials, n, len(sigma_indices)))
    gammas = np.empty((trials, n))
    for t in range(trials):
        stream = trial_seed(master_seed, t) if master_seed is not None else base
        Z = sample_noise(noise, params, stream)
        Y = np.sqrt(params.snr) * S_fixed + Z
        u, g, vt = np.linalg.svd(Y, full_matrices=False)
        per_trial[t] = n * (u.T @ sl) * (vt @ sr)
        gammas[t] = g
    mean_overlap = per_trial.mean(axis=0)
    mean_gamma = gammas.mean(axis=0)
    curves = [
        OverlapCurve(
            gamma_grid=mean_gamma,
            sigma=float(s_spec.values[j]),
            values=mean_overlap[:, k],
            sigma_index=int(j),
        )
        for k, j in enumerate(sigma_indices)
    ]
    return curves, mean_gamma, gammas.ravel()

"""Asymptotic MMSE formulas, empirical MSE, and mutual information.

The asymptotic minimum error under the optimal rotation-invariant shrinkage
is (second moment of the signal) minus (second moment of the shrunk values
under the observed spectrum).  Under Gaussian noise it collapses further to
a quadrature over the observed singular value density alone:

    (1/snr) [ 1/alpha - (1/alpha - 1)^2 * int mu_Y(x)/x^2 dx
              - (pi^2/3) * int mu_Y(x)^3 dx ]

and the mutual information follows by integrating the MMSE over the SNR.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .spectral import EDGE_DENSITY_FLOOR, DensityEstimate


@dataclass
class MmseReport:
    """One asymptotic-MMSE evaluation with its quadrature components."""

    snr: float
    alpha: float
    theory_mmse: float
    empirical_mse: Optional[float] = None
    stderr: Optional[float] = None
    second_moment_s: Optional[float] = None
    int_mu_over_x2: float = 0.0
    int_mu_cubed: float = 0.0
    divergent_flag: bool = False

    def csv_row(self) -> str:
        emp = "" if self.empirical_mse is None else f"{self.empirical_mse:.17g}"
        se = "" if self.stderr is None else f"{self.stderr:.17g}"
        return (
            f"{self.snr:.17g},{self.alpha:.17g},{self.theory_mmse:.17g},{emp},{se},"
            f"{self.int_mu_over_x2:.17g},{self.int_mu_cubed:.17g}"
        )


MMSE_CSV_HEADER = "lambda,alpha,theory_mmse,empirical_mse,stderr,int_mu_over_x2,int_mu_cubed"


def reports_to_csv(reports: Sequence[MmseReport], path) -> None:
    with open(path, "w") as fh:
        fh.write(MMSE_CSV_HEADER + "\n")
        for r in reports:
            fh.write(r.csv_row() + "\n")


def empirical_mse(S: np.ndarray, S_hat: np.ndarray) -> float:
    """(1/N) || S - S_hat ||_F^2 with N the row count."""
    S = np.asarray(S, dtype=float)
    S_hat = np.asarray(S_hat, dtype=float)
    if S.shape != S_hat.shape:
        raise ValueError(f"shape mismatch: {S.shape} vs {S_hat.shape}")
    return float(np.sum((S - S_hat) ** 2) / S.shape[0])


def mmse_general(
    second_moment_s: float,
    xi_star_values: np.ndarray,
    mu_y_weights: Optional[np.ndarray] = None,
) -> float:
    """Asymptotic MMSE: int x^2 mu_S - int xi*(x)^2 mu_Y.

    The second integral is taken against the empirical measure of the
    observed spectrum: by default the plain mean of xi^2.
    """
    xi = np.asarray(xi_star_values, dtype=float)
    if mu_y_weights is None:
        second = float(np.mean(xi**2))
    else:
        w = np.asarray(mu_y_weights, dtype=float)
        if w.shape != xi.shape:
            raise ValueError("weights must match xi in length")
        second = float(np.sum(w * xi**2))
    return second_moment_s - second


def mmse_gaussian(mu_y_density: DensityEstimate, snr: float, alpha: float) -> MmseReport:
    """Gaussian-noise asymptotic MMSE by quadrature over the observed density.

    ``mu_y_density`` must be the unsymmetrized density on the nonnegative
    half line (see DensityEstimate.positive_half).  For alpha = 1 the
    1/x^2 term carries a zero coefficient and is skipped entirely; for
    alpha < 1 it is integrated from the first grid point with density above
    the edge floor, and flagged if the support appears to touch the origin.
    """
    if snr <= 0:
        raise ValueError("snr must be positive")
    if mu_y_density.symmetrized:
        raise ValueError("pass the positive-half (unsymmetrized) density")
    x = mu_y_density.grid
    mu = mu_y_density.mu
    int_mu_cubed = float(np.trapezoid(mu**3, x))
    int_mu_over_x2 = 0.0
    divergent = False
    if alpha != 1.0:
        floor = EDGE_DENSITY_FLOOR * mu.max()
        above = np.nonzero(mu > floor)[0]
        if above.size == 0:
            raise ValueError("density is entirely below the edge floor")
        lo = above[0]
        sel = slice(lo, None)
        int_mu_over_x2 = float(np.trapezoid(mu[sel] / x[sel] ** 2, x[sel]))
        # support reaching the first strictly positive grid point means the
        # 1/x^2 integral is cutoff-dependent: flag it
        divergent = lo == 0
    theory = (
        1.0 / alpha
        - (1.0 / alpha - 1.0) ** 2 * int_mu_over_x2
        - (np.pi**2 / 3.0) * int_mu_cubed
    ) / snr
    return MmseReport(
        snr=snr,
        alpha=alpha,
        theory_mmse=theory,
        int_mu_over_x2=int_mu_over_x2,
        int_mu_cubed=int_mu_cubed,
        divergent_flag=divergent,
    )


def _odd_ratio(num: np.ndarray, x: np.ndarray, at_zero: float) -> np.ndarray:
    out = np.empty_like(num)
    zero = x == 0
    out[~zero] = num[~zero] / x[~zero]
    out[zero] = at_zero
    return out


def hilbert_identity_suite(f: DensityEstimate) -> Tuple[float, float, float]:
    """Residuals of the three Hilbert-transform identities on a grid density.

    r1 = int f H[f]^2 - (1/3) int f^3
    r2 = int x f H[f] - (1/(2 pi)) (int f)^2
    r3 = int (H[f]/x) f + (1/(2 pi)) (int f/x)^2

    The first two hold for any compactly supported, sufficiently regular f.
    The third additionally needs f to vanish at the origin: for even f with
    f(0) > 0 the principal-value rearrangement behind it picks up a
    correction (pi/2) f(0)^2, and r3 converges to that value instead of 0.
    """
    x = f.grid
    dens = f.mu
    h = f.hilbert
    tz = np.trapezoid
    r1 = tz(dens * h**2, x) - tz(dens**3, x) / 3.0
    r2 = tz(x * dens * h, x) - (tz(dens, x)) ** 2 / (2.0 * np.pi)
    h_over_x = _odd_ratio(h, x, at_zero=float(np.interp(0.0, x, np.gradient(h, x))))
    f_over_x = _odd_ratio(dens, x, at_zero=0.0)
    r3 = tz(h_over_x * dens, x) + (tz(f_over_x, x)) ** 2 / (2.0 * np.pi)
    return float(r1), float(r2), float(r3)


def mutual_information_curve(
    mmse_samples: Sequence[Tuple[float, float]], alpha: float
) -> np.ndarray:
    """Per-entry mutual information from MMSE samples via the I-MMSE relation.

    I(snr) / (N M) = (alpha / 2) * int_0^snr MMSE(s) ds, by trapezoid rule.
    The sample grid must start at 0 and be strictly increasing.
    """
    arr = np.asarray(mmse_samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a sequence of (snr, mmse) pairs")
    lam, mmse = arr[:, 0], arr[:, 1]
    if lam[0] != 0.0 or np.any(np.diff(lam) <= 0):
        raise ValueError("the snr grid must start at 0 and be strictly increasing")
    mi = (alpha / 2.0) * cumulative_trapezoid(mmse, lam, initial=0.0)
    return np.column_stack([lam, mi])

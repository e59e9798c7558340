"""Empirical singular spectra and Cauchy-kernel spectral estimates.

The resolvent of the symmetrized spectrum, evaluated just below the real
axis, carries both the density and the Hilbert transform:

    G(x - i eta) -> pi * H[mu](x) + i pi * mu(x)    as eta -> 0+

Evaluating at small positive ``eta`` (the Cauchy-kernel estimate) smooths
the empirical atoms into usable density and Hilbert-transform values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# Density below this fraction of the peak is treated as "outside support":
# shrinkers fall back to a flagged passthrough there.
EDGE_DENSITY_FLOOR = 1e-4

# Atoms per chunk in the kernel sum; bounds memory at ~tens of MB.
_CHUNK = 200_000


def eta_policy(gamma_max: float, n: int) -> float:
    """Default imaginary offset for spectra of an n-row matrix.

    eta = w / sqrt(n) with w = max(gamma_max / 4, 1e-3).  The rate balances
    the O(eta) smoothing bias against the O(1/(n*eta)) atom fluctuation.
    """
    if n < 1:
        raise ValueError("n must be positive")
    w = max(gamma_max / 4.0, 1e-3)
    return w / np.sqrt(n)


@dataclass
class SingularSpectrum:
    """Singular values (descending) and, optionally, the SVD factors."""

    values: np.ndarray
    n: int
    m: int
    left: Optional[np.ndarray] = None    # U, n x n
    right: Optional[np.ndarray] = None   # V, m x n  (source = U @ diag @ V.T)

    @property
    def alpha(self) -> float:
        return self.n / self.m

    def has_vectors(self) -> bool:
        return self.left is not None and self.right is not None

    def eta(self) -> float:
        return eta_policy(float(self.values.max()) if self.values.size else 1.0, self.n)


@dataclass
class StieltjesEval:
    """G(x - i eta) of the symmetrized spectrum at real abscissae x."""

    points: np.ndarray
    eta: float
    g: np.ndarray  # complex, Im g > 0


@dataclass
class DensityEstimate:
    """Grid density / Hilbert-transform estimate of a (symmetrized) measure.

    ``mu`` is Im G / pi (clipped at zero, optionally renormalized to unit
    trapezoid mass); ``hilbert`` is Re G / pi.  ``edge_flags`` marks points
    whose density sits below EDGE_DENSITY_FLOOR relative to the peak.
    """

    grid: np.ndarray
    mu: np.ndarray
    hilbert: np.ndarray
    symmetrized: bool = True
    eta: float = 0.0
    raw_mass: float = float("nan")
    clipped: int = 0
    renormalized: bool = False
    edge_flags: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.edge_flags is None:
            peak = self.mu.max() if self.mu.size else 0.0
            self.edge_flags = self.mu < EDGE_DENSITY_FLOOR * peak

    def mass(self) -> float:
        return float(np.trapezoid(self.mu, self.grid))

    def positive_half(self) -> "DensityEstimate":
        """Restriction to x > 0 with density doubled (unsymmetrized measure)."""
        if not self.symmetrized:
            raise ValueError("already unsymmetrized")
        keep = self.grid > 0
        return DensityEstimate(
            grid=self.grid[keep],
            mu=2.0 * self.mu[keep],
            hilbert=self.hilbert[keep],
            symmetrized=False,
            eta=self.eta,
            raw_mass=self.raw_mass,
            clipped=self.clipped,
            renormalized=self.renormalized,
            edge_flags=self.edge_flags[keep],
        )

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("x,mu,hilbert,flag\n")
            for x, d, h, f in zip(self.grid, self.mu, self.hilbert, self.edge_flags):
                fh.write(f"{x:.17g},{d:.17g},{h:.17g},{int(f)}\n")


def svd_spectrum(matrix: np.ndarray, keep_vectors: bool = True) -> SingularSpectrum:
    """Full (economy) SVD; values descending, factors retained on request."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("expected a 2-d array")
    n, m = matrix.shape
    if n > m:
        raise ValueError(f"n={n} > m={m}: transpose the input so that n <= m")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix contains non-finite entries")
    if keep_vectors:
        u, s, vt = np.linalg.svd(matrix, full_matrices=False)
        return SingularSpectrum(values=s, n=n, m=m, left=u, right=vt.T)
    s = np.linalg.svd(matrix, compute_uv=False)
    return SingularSpectrum(values=s, n=n, m=m)


def symmetrize(spectrum) -> np.ndarray:
    """Signed values {-gamma_i} U {+gamma_i}, ascending, 2N atoms of mass 1/2N."""
    values = spectrum.values if isinstance(spectrum, SingularSpectrum) else np.asarray(spectrum, float)
    asc = np.sort(values)
    return np.concatenate([-asc[::-1], asc])


def stieltjes_cauchy(
    spectrum,
    points: np.ndarray,
    eta: float,
    exclude_index: Optional[int] = None,
) -> StieltjesEval:
    """Resolvent of the symmetrized atoms at z = x - i eta.

    G(x - i eta) = (1/2N) sum_k [ 1/(x - i eta - gamma_k) + 1/(x - i eta + gamma_k) ]

    The atom coinciding with an evaluation point is included by default (its
    contribution vanishes at scale); ``exclude_index`` drops atom k from the
    +gamma branch of every point, the leave-one-out diagnostic.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    values = spectrum.values if isinstance(spectrum, SingularSpectrum) else np.asarray(spectrum, float)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    z = points - 1j * eta
    total = np.zeros(points.shape, dtype=complex)
    nval = len(values)
    step = max(1, _CHUNK // max(1, len(points)))
    zz = z[:, None]
    for start in range(0, nval, step):
        a = values[start : start + step][None, :]
        total += np.sum(1.0 / (zz - a), axis=1) + np.sum(1.0 / (zz + a), axis=1)
    if exclude_index is not None:
        total -= 1.0 / (z - values[exclude_index])
        g = total / (2 * (nval - 0.5))
    else:
        g = total / (2 * nval)
    return StieltjesEval(points=points, eta=eta, g=g)


def density_and_hilbert(ev: StieltjesEval, renormalize: bool = True) -> DensityEstimate:
    """Plemelj split of a Stieltjes evaluation into density and Hilbert values.

    mu = Im G / pi, hilbert = Re G / pi.  Negative density values (possible
    only on user-supplied data, never from `stieltjes_cauchy`) are clipped to
    zero and counted.  With ``renormalize`` the density is scaled to unit
    trapezoid mass over the grid; the raw mass is kept for diagnostics.
    """
    mu = ev.g.imag / np.pi
    hilbert = ev.g.real / np.pi
    clipped = int(np.sum(mu < 0))
    if clipped:
        mu = np.clip(mu, 0.0, None)
    grid = ev.points
    raw_mass = float(np.trapezoid(mu, grid)) if len(grid) > 1 else float("nan")
    renormed = False
    if renormalize and len(grid) > 1 and raw_mass > 0:
        mu = mu / raw_mass
        renormed = True
    return DensityEstimate(
        grid=grid,
        mu=mu,
        hilbert=hilbert,
        symmetrized=True,
        eta=ev.eta,
        raw_mass=raw_mass,
        clipped=clipped,
        renormalized=renormed,
    )


def symmetric_grid(gamma_max: float, npoints: int = 512) -> np.ndarray:
    """Uniform grid on [-1.05 gamma_max, 1.05 gamma_max]."""
    span = 1.05 * gamma_max if gamma_max > 0 else 1.0
    return np.linspace(-span, span, npoints)


def estimate_density(
    spectrum: SingularSpectrum,
    npoints: int = 512,
    eta: Optional[float] = None,
    renormalize: bool = True,
) -> DensityEstimate:
    """Grid density/Hilbert estimate of the symmetrized spectrum."""
    if eta is None:
        eta = spectrum.eta()
    grid = symmetric_grid(float(spectrum.values.max()), npoints)
    return density_and_hilbert(stieltjes_cauchy(spectrum, grid, eta), renormalize)


def eval_at_singular_values(
    spectrum: SingularSpectrum,
    eta: Optional[float] = None,
    leave_one_out: bool = False,
) -> DensityEstimate:
    """Density and Hilbert values at the singular values themselves.

    This is what the shrinkers consume: per-gamma values of mu-bar and
    H[mu-bar], aligned with ``spectrum.values`` (descending).  The result is
    never renormalized; its grid is not monotone in general.
    """
    if spectrum.values.size == 0:
        raise ValueError("empty spectrum")
    if eta is None:
        eta = spectrum.eta()
    if not leave_one_out:
        ev = stieltjes_cauchy(spectrum, spectrum.values, eta)
        return density_and_hilbert(ev, renormalize=False)
    # leave-one-out: drop atom i from the +gamma branch when evaluating at gamma_i
    pts = spectrum.values
    g = np.empty(len(pts), dtype=complex)
    for i, x in enumerate(pts):
        g[i] = stieltjes_cauchy(spectrum, np.array([x]), eta, exclude_index=i).g[0]
    return density_and_hilbert(StieltjesEval(points=pts, eta=eta, g=g), renormalize=False)

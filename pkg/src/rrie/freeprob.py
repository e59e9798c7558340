"""Rectangular free-probability transforms.

For a probability measure mu supported in [0, K] and aspect ratio
alpha in (0, 1]:

    M(z) = integral mu(t) / (1 - t^2 z) dt - 1        (moment generating)
    T(z) = (alpha z + 1)(z + 1)
    H(z) = z T(M(z))
    C(z) = T^{-1}( z / H^{-1}(z) )                    (rectangular R-transform)

C linearizes free rectangular convolution: the R-transform of the singular
value distribution of A + U B V^T (independent Haar U, V) is the sum of the
R-transforms of A and B.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

#: Newton stays this fraction inside the bracket to keep off the edge pole.
EDGE_MARGIN = 1.0 - 1e-9


class TransformDomainError(ValueError):
    """Evaluation outside the transform's domain (pole crossing / range)."""


@dataclass(frozen=True)
class AtomMeasure:
    """Finite measure: nonnegative atoms with weights summing to one."""

    values: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("values must be a nonempty 1-d array")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("atoms must be finite and nonnegative")
        if self.weights is None:
            object.__setattr__(
                self, "weights", np.full(values.size, 1.0 / values.size)
            )
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != values.shape or np.any(w < 0):
                raise ValueError("weights must be nonnegative, same length as values")
            if abs(w.sum() - 1.0) > 1e-10:
                raise ValueError("weights must sum to 1")
            object.__setattr__(self, "weights", w)

    @property
    def support_bound(self) -> float:
        return float(self.values.max())

    def m(self, z):
        return np.sum(self.weights / (1.0 - self.values**2 * z)) - 1.0

    def m_prime(self, z):
        return np.sum(self.weights * self.values**2 / (1.0 - self.values**2 * z) ** 2)


@dataclass(frozen=True)
class GridMeasure:
    """Density on a grid over [0, K]; M evaluated by trapezoid quadrature.

    Second-class citizen: atom sets make M exact and are preferred for
    empirical spectra.
    """

    grid: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        dens = np.asarray(self.density, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "density", dens)
        if grid.ndim != 1 or grid.shape != dens.shape or grid.size < 2:
            raise ValueError("grid and density must be matching 1-d arrays")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(grid < 0) or np.any(dens < 0):
            raise ValueError("grid measure must live on [0, K] with density >= 0")

    @property
    def support_bound(self) -> float:
        return float(self.grid.max())

    def m(self, z):
        return np.trapezoid(self.density / (1.0 - self.grid**2 * z), self.grid) - 1.0

    def m_prime(self, z):
        return np.trapezoid(
            self.density * self.grid**2 / (1.0 - self.grid**2 * z) ** 2, self.grid
        )


@dataclass(frozen=True)
class AnalyticMeasure:
    """Measure given directly by its moment generating function M(z)."""

    m_func: Callable
    support_bound: float
    m_prime_func: Optional[Callable] = None

    def m(self, z):
        return self.m_func(z)

    def m_prime(self, z):
        if self.m_prime_func is not None:
            return self.m_prime_func(z)
        h = 1e-7 * max(1.0, abs(z))
        return (self.m_func(z + h) - self.m_func(z - h)) / (2 * h)


MeasureRep = Union[AtomMeasure, GridMeasure, AnalyticMeasure]


@dataclass(frozen=True)
class TransformContext:
    """A (measure, alpha) pair on which the rectangular transforms act."""

    alpha: float
    measure: MeasureRep

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")

    @property
    def z_edge(self) -> float:
        k = self.measure.support_bound
        return np.inf if k == 0 else 1.0 / k**2


def atoms_context(values, alpha: float, weights=None) -> TransformContext:
    return TransformContext(alpha=alpha, measure=AtomMeasure(values, weights))


def m_transform(ctx: TransformContext, z):
    """M of the context's measure. Real z must stay below the edge 1/K^2."""
    if np.isrealobj(z) and np.ndim(z) == 0:
        if z >= ctx.z_edge:
            raise TransformDomainError(
                f"z={z} crosses the pole at 1/K^2={ctx.z_edge}"
            )
    return ctx.measure.m(z)


def t_alpha(z, alpha: float):
    """T(z) = (alpha z + 1)(z + 1)."""
    return (alpha * z + 1.0) * (z + 1.0)


def t_alpha_inverse(x, alpha: float):
    """Branch of T^{-1} with T^{-1}(1) = 0.

    Root of alpha y^2 + (1 + alpha) y + 1 - x = 0 continuous at x = 1:
    y = [-(1+alpha) + sqrt((1+alpha)^2 - 4 alpha (1-x))] / (2 alpha).
    """
    disc = (1.0 + alpha) ** 2 - 4.0 * alpha * (1.0 - np.asarray(x))
    if np.isrealobj(disc) and np.any(disc < 0):
        raise TransformDomainError("T-inverse branch undefined (negative discriminant)")
    return (-(1.0 + alpha) + np.sqrt(disc)) / (2.0 * alpha)


def h_transform(ctx: TransformContext, z):
    """H(z) = z T(M(z))."""
    return z * t_alpha(m_transform(ctx, z), ctx.alpha)


def invert_h(ctx: TransformContext, w: float, tol: float = 1e-12, max_newton: int = 100) -> float:
    """Solve H(z) = w on [0, z_edge) for w >= 0.

    Safeguarded Newton: steps falling outside the current sign-change bracket
    are replaced by bisection.  Raises TransformDomainError when w exceeds
    the attainable range (no extrapolation past the edge).
    """
    if w < 0:
        raise TransformDomainError("w must be nonnegative")
    if w == 0.0:
        return 0.0
    if ctx.measure.support_bound == 0.0:
        return float(w)  # delta at zero: H is the identity
    hi = ctx.z_edge * EDGE_MARGIN
    f_hi = h_transform(ctx, hi) - w
    if not np.isfinite(f_hi) or f_hi < 0:
        raise TransformDomainError(
            f"w={w} beyond the attainable range of H on [0, {ctx.z_edge})"
        )
    lo, f_lo = 0.0, -w
    z = min(w, hi)  # H(z) ~ z near 0
    target = tol * max(1.0, w)
    for _ in range(max_newton):
        fz = h_transform(ctx, z) - w
        if abs(fz) < target:
            return z
        if fz > 0:
            hi, f_hi = z, fz
        else:
            lo, f_lo = z, fz
        m = ctx.measure.m(z)
        deriv = t_alpha(m, ctx.alpha) + z * (
            (2.0 * ctx.alpha * m + 1.0 + ctx.alpha) * ctx.measure.m_prime(z)
        )
        step_ok = np.isfinite(deriv) and deriv > 0
        if step_ok:
            z_new = z - fz / deriv
            step_ok = lo < z_new < hi
        z = z_new if step_ok else 0.5 * (lo + hi)
    fz = h_transform(ctx, z) - w
    if abs(fz) < target:
        return z
    # pure bisection finish
    for _ in range(200):
        z = 0.5 * (lo + hi)
        fz = h_transform(ctx, z) - w
        if abs(fz) < target:
            return z
        if fz > 0:
            hi = z
        else:
            lo = z
    raise TransformDomainError(f"H inversion did not converge at w={w}")


def rect_r_transform(ctx: TransformContext, z: float) -> float:
    """Rectangular R-transform C(z) = T^{-1}(z / H^{-1}(z)), with C(0) = 0."""
    if z == 0.0:
        return 0.0
    hinv = invert_h(ctx, z)
    return float(t_alpha_inverse(z / hinv, ctx.alpha))


def marchenko_pastur_rtransform(alpha: float) -> Callable:
    """C(z) = z / alpha: Gaussian i.i.d. noise of entry variance 1/N."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")

    def c(z):
        return np.asarray(z) / alpha

    return c


# x coth x = sum B_{2n} (2x)^{2n} / (2n)!; in u = x^2 up to u^5
_COTH_SERIES = (1.0 / 3.0, -1.0 / 45.0, 2.0 / 945.0, -1.0 / 4725.0, 2.0 / 93555.0)


def uniform02_rtransform() -> Callable:
    """C(z) = 2 sqrt(z) coth(2 sqrt(z)) - 1 for singular values U[0, 2], alpha=1.

    Principal square root; an even function of sqrt(z), hence single-valued
    in z with poles only at z = -(k pi / 2)^2.  Near zero the difference is
    evaluated by series to avoid cancellation; C(0) = 0.
    """

    def c(z):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        w = 2.0 * np.sqrt(z)
        out = np.empty_like(z)
        small = np.abs(w) < 0.25
        if np.any(~small):
            ws = w[~small]
            out[~small] = ws / np.tanh(ws) - 1.0
        if np.any(small):
            u = w[small] ** 2
            acc = np.zeros_like(u)
            up = u.copy()
            for coef in _COTH_SERIES:
                acc += coef * up
                up = up * u
            out[small] = acc
        return out[0] if scalar else out

    return c


def closed_form_rtransforms() -> dict:
    """Catalog of the closed-form rectangular R-transforms used in practice.

    ``mp(z, alpha)`` for Gaussian i.i.d. noise and ``uniform02(z)`` for
    uniform-[0,2] singular values at alpha = 1.  Both accept complex input.
    """
    u = uniform02_rtransform()

    def mp(z, alpha):
        return np.asarray(z) / alpha

    return {"mp": mp, "uniform02": u}


@dataclass
class ConvolutionResidual:
    z: float
    c_y: float
    c_s: float
    c_z: float

    @property
    def residual(self) -> float:
        return self.c_y - self.c_s - self.c_z


def check_free_convolution(
    mu_s_ctx: TransformContext,
    mu_z_ctx: TransformContext,
    mu_y_atoms,
    z_points: Sequence[float],
) -> list:
    """Additivity residuals C_Y(z) - C_S(z) - C_Z(z) at the given points.

    All three measures must share the aspect ratio; mu_y_atoms is the atom
    set (singular values) of the combined matrix.
    """
    if abs(mu_s_ctx.alpha - mu_z_ctx.alpha) > 1e-12:
        raise ValueError("signal and noise contexts must share alpha")
    y_ctx = atoms_context(mu_y_atoms, mu_s_ctx.alpha) if not isinstance(
        mu_y_atoms, TransformContext
    ) else mu_y_atoms
    rows = []
    for z in z_points:
        rows.append(
            ConvolutionResidual(
                z=float(z),
                c_y=rect_r_transform(y_ctx, z),
                c_s=rect_r_transform(mu_s_ctx, z),
                c_z=rect_r_transform(mu_z_ctx, z),
            )
        )
    return rows


def residuals_to_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write("z,c_y,c_s,c_z,residual\n")
        for r in rows:
            fh.write(f"{r.z:.17g},{r.c_y:.17g},{r.c_s:.17g},{r.c_z:.17g},{r.residual:.17g}\n")

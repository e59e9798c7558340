"""Fast numerical property suites backing the ``rrie check`` subcommand.

Desk-scale versions of the package invariants: run in seconds, exit
nonzero on any violation.  The pytest suite carries the full-size variants.
"""

from __future__ import annotations

import numpy as np

from .ensembles import haar_orthogonal, sample_haar_rotated
from .freeprob import atoms_context, h_transform, invert_h, m_transform, rect_r_transform
from .mmse import hilbert_identity_suite, mutual_information_curve
from .rie import gaussian_rie_shrink, general_rie_shrink, oracle_singular_values, reconstruct
from .spectral import (
    density_and_hilbert,
    estimate_density,
    eval_at_singular_values,
    stieltjes_cauchy,
    svd_spectrum,
)


def _plemelj(rng):
    atoms = rng.uniform(0.1, 3.0, 50)
    pts = np.linspace(-3, 3, 40)
    ev = stieltjes_cauchy(atoms, pts, eta=0.1)
    est = density_and_hilbert(ev, renormalize=False)
    recon = np.pi * (est.hilbert + 1j * est.mu)
    return np.max(np.abs(recon - ev.g)) < 1e-14, "plemelj two-view exactness"


def _haar(rng):
    sigma = rng.uniform(0, 2, 30)
    a = sample_haar_rotated(sigma, 30, 45, rng)
    s = np.linalg.svd(a, compute_uv=False)
    ok1 = np.allclose(s, np.sort(sigma)[::-1], atol=1e-10)
    q = haar_orthogonal(40, rng)
    ok2 = np.max(np.abs(q.T @ q - np.eye(40))) < 1e-12
    return ok1 and ok2, "haar rotation: spectrum preserved, factors orthogonal"


def _scaling(rng):
    atoms = rng.uniform(0.2, 1.5, 64)
    c = 1.7
    ctx, ctx_c = atoms_context(atoms, 0.5), atoms_context(c * atoms, 0.5)
    zs = np.linspace(0.0, 0.3 / c**2 / atoms.max() ** 2, 7)
    return (
        all(abs(m_transform(ctx_c, z) - m_transform(ctx, c**2 * z)) < 1e-12 for z in zs),
        "M scaling law",
    )


def _inverse(rng):
    atoms = rng.uniform(0.2, 2.0, 64)
    ctx = atoms_context(atoms, 0.7)
    ok = True
    for w in np.linspace(0.01, 5.0, 12):
        z = invert_h(ctx, w)
        ok = ok and abs(h_transform(ctx, z) - w) < 1e-10 * max(1, w)
    ok = ok and rect_r_transform(ctx, 0.0) == 0.0
    return ok, "H inversion consistency, C(0)=0"


def _mp_rtransform(rng):
    a = rng.standard_normal((400, 800)) / np.sqrt(400)
    atoms = np.linalg.svd(a, compute_uv=False)
    ctx = atoms_context(atoms, 0.5)
    ok = all(abs(rect_r_transform(ctx, z) / (z / 0.5) - 1) < 0.05 for z in (0.05, 0.1))
    return ok, "Marchenko-Pastur R-transform ~ z/alpha"


def _gaussian_reduction(rng):
    y = rng.standard_normal((80, 120)) / np.sqrt(80)
    spec = svd_spectrum(y)
    alpha = spec.alpha
    pg = eval_at_singular_values(spec)
    a = gaussian_rie_shrink(spec, 1.3, per_gamma=pg)
    b = general_rie_shrink(spec, 1.3, lambda z: z / alpha, per_gamma=pg)
    return np.max(np.abs(a.xi - b.xi)) < 1e-10, "general shrinker reduces to Gaussian form"


def _mse_decomposition(rng):
    n, m = 40, 60
    S = rng.standard_normal((n, m)) / np.sqrt(n)
    Y = S + rng.standard_normal((n, m)) / np.sqrt(n)
    spec = svd_spectrum(Y)
    xi = rng.uniform(-1, 1, n)
    direct = np.sum((S - reconstruct(spec, xi)) ** 2) / n
    sig = np.linalg.svd(S, compute_uv=False)
    orc = oracle_singular_values(S, spec).xi
    expand = (np.sum(sig**2) + np.sum(xi**2) - 2 * np.sum(xi * orc)) / n
    return abs(direct - expand) < 1e-8, "squared-error three-term expansion"


def _equivariance(rng):
    y = rng.standard_normal((40, 60))
    u, v = haar_orthogonal(40, rng), haar_orthogonal(60, rng)
    def pipeline(mat):
        spec = svd_spectrum(mat)
        return reconstruct(spec, gaussian_rie_shrink(spec, 1.0, alpha=40 / 60))
    lhs = pipeline(u @ y @ v.T)
    rhs = u @ pipeline(y) @ v.T
    rel = np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs)
    return rel < 1e-6, "rotation equivariance of the pipeline"


def _hilbert_identities(rng):
    from .spectral import DensityEstimate

    x = np.linspace(-2.1, 2.1, 1024)
    f = np.where(np.abs(x) <= 2, np.sqrt(np.clip(4 - x**2, 0, None)) / (2 * np.pi), 0.0)
    h = np.where(
        np.abs(x) <= 2,
        x / (2 * np.pi),
        (x - np.sign(x) * np.sqrt(np.clip(x**2 - 4, 0, None))) / (2 * np.pi),
    )
    est = DensityEstimate(grid=x, mu=f, hilbert=h, symmetrized=True)
    r1, r2, _ = hilbert_identity_suite(est)
    # third identity needs a density vanishing at the origin
    a = rng.standard_normal((300, 1200)) / np.sqrt(300)
    spec = svd_spectrum(np.asarray(a), keep_vectors=False)
    gapped = estimate_density(spec, npoints=1024)
    _, _, r3 = hilbert_identity_suite(gapped)
    return abs(r1) < 1e-3 and abs(r2) < 1e-3 and abs(r3) < 5e-3, "Hilbert-transform identities"


def _immse(_rng):
    lam = np.linspace(0, 3, 200)
    curve = mutual_information_curve(np.column_stack([lam, 1 / (1 + lam)]), alpha=1.0)
    err = np.max(np.abs(curve[:, 1] - 0.5 * np.log1p(lam)))
    return err < 1e-3, "I-MMSE integration matches ln(1+snr)/2"


_CHECKS = (
    _plemelj,
    _haar,
    _scaling,
    _inverse,
    _mp_rtransform,
    _gaussian_reduction,
    _mse_decomposition,
    _equivariance,
    _hilbert_identities,
    _immse,
)


def run_all(verbose: bool = False, seed: int = 20240 ) -> int:
    failures = 0
    rng = np.random.default_rng(seed)
    for fn in _CHECKS:
        ok, label = fn(rng)
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {label}")
        failures += 0 if ok else 1
    return failures

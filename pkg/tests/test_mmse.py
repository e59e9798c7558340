import numpy as np
import pytest

from rrie import (
    empirical_mse,
    estimate_density,
    gaussian_rie_shrink,
    hilbert_identity_suite,
    mmse_gaussian,
    mmse_general,
    mutual_information_curve,
    oracle_singular_values,
    reconstruct,
    svd_spectrum,
)
from rrie.mmse import MMSE_CSV_HEADER, reports_to_csv
from rrie.spectral import DensityEstimate


def semicircle_estimate(npoints=1024, span=2.1):
    """Radius-2 semicircle with its closed-form Hilbert transform.

    mu = sqrt(4 - x^2)/(2 pi) and pi H = x/2 inside the support; outside,
    H continues as the real part of the resolvent, (x - sgn(x) sqrt(x^2-4))/(2 pi).
    """
    x = np.linspace(-span, span, npoints)
    inside = np.abs(x) <= 2.0
    mu = np.where(inside, np.sqrt(np.clip(4 - x**2, 0, None)) / (2 * np.pi), 0.0)
    h = np.where(
        inside,
        x / (2 * np.pi),
        (x - np.sign(x) * np.sqrt(np.clip(x**2 - 4, 0, None))) / (2 * np.pi),
    )
    return DensityEstimate(grid=x, mu=mu, hilbert=h, symmetrized=True)


def test_empirical_mse_trivial():
    S = np.random.default_rng(0).standard_normal((6, 9))
    assert empirical_mse(S, S) == 0.0
    assert empirical_mse(S, np.zeros_like(S)) == pytest.approx(np.sum(S**2) / 6)
    with pytest.raises(ValueError):
        empirical_mse(S, S.T)


def test_mmse_general_zero_shrinkage():
    assert mmse_general(1.7, np.zeros(10)) == 1.7


def test_mmse_general_weights():
    xi = np.array([1.0, 2.0])
    assert mmse_general(5.0, xi, mu_y_weights=np.array([0.5, 0.5])) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        mmse_general(5.0, xi, mu_y_weights=np.array([1.0]))


def test_mmse_general_high_snr_vanishes():
    rng = np.random.default_rng(7)
    n = 1000
    S = rng.standard_normal((n, n)) / np.sqrt(n)
    Y = np.sqrt(50.0) * S + rng.standard_normal((n, n)) / np.sqrt(n)
    spec = svd_spectrum(Y, keep_vectors=False)
    val = mmse_general(1.0, gaussian_rie_shrink(spec, 50.0).xi)
    assert 0.0 <= val < 0.03


def test_mmse_general_agrees_with_empirical():
    rng = np.random.default_rng(8)
    n = 1000
    S = rng.standard_normal((n, n)) / np.sqrt(n)
    Y = S + rng.standard_normal((n, n)) / np.sqrt(n)
    spec = svd_spectrum(Y)
    sh = gaussian_rie_shrink(spec, 1.0)
    theory = mmse_general(1.0, sh.xi)
    emp = empirical_mse(S, reconstruct(spec, sh))
    assert abs(theory - emp) / emp < 0.05


def test_mmse_general_oracle_bounds():
    rng = np.random.default_rng(9)
    n = 400
    S = rng.standard_normal((n, n)) / np.sqrt(n)
    Y = S + rng.standard_normal((n, n)) / np.sqrt(n)
    spec = svd_spectrum(Y)
    second = np.sum(np.linalg.svd(S, compute_uv=False) ** 2) / n
    val = mmse_general(second, oracle_singular_values(S, spec).xi)
    assert -1e-6 <= val <= second * (1 + 1e-6)


def test_mmse_gaussian_alpha_one_skips_inverse_term(gauss2000):
    n = gauss2000["n"]
    from rrie.spectral import SingularSpectrum

    spec = SingularSpectrum(values=gauss2000["gy"], n=n, m=n)
    half = estimate_density(spec).positive_half()
    rep = mmse_gaussian(half, 1.0, 1.0)
    assert rep.int_mu_over_x2 == 0.0
    assert rep.theory_mmse == pytest.approx(
        1.0 - (np.pi**2 / 3) * rep.int_mu_cubed, abs=1e-12
    )
    assert not rep.divergent_flag


def test_mmse_gaussian_snr_four(gauss2000):
    # mu_Y at snr=4 from the shared S, Z draw; closed form gives 1/(1+snr) = 0.2
    n = gauss2000["n"]
    vals = np.linalg.svd(2.0 * gauss2000["S"] + gauss2000["Z"], compute_uv=False)
    from rrie.spectral import SingularSpectrum

    half = estimate_density(SingularSpectrum(values=vals, n=n, m=n)).positive_half()
    rep = mmse_gaussian(half, 4.0, 1.0)
    assert abs(rep.theory_mmse - 0.2) < 0.02


def test_mmse_gaussian_rejects_symmetrized_input(gauss2000):
    from rrie.spectral import SingularSpectrum

    n = gauss2000["n"]
    est = estimate_density(SingularSpectrum(values=gauss2000["gy"], n=n, m=n))
    with pytest.raises(ValueError):
        mmse_gaussian(est, 1.0, 1.0)


def test_mmse_monotone_in_snr():
    rng = np.random.default_rng(10)
    n = 500
    S = rng.standard_normal((n, n)) / np.sqrt(n)
    Z = rng.standard_normal((n, n)) / np.sqrt(n)
    vals = []
    from rrie.spectral import SingularSpectrum

    for lam in [0.5, 1.0, 2.0, 4.0]:
        sv = np.linalg.svd(np.sqrt(lam) * S + Z, compute_uv=False)
        half = estimate_density(SingularSpectrum(values=sv, n=n, m=n)).positive_half()
        vals.append(mmse_gaussian(half, lam, 1.0).theory_mmse)
    assert np.all(np.diff(vals) < 0)


def test_hilbert_identities_first_two_on_semicircle():
    r1, r2, _ = hilbert_identity_suite(semicircle_estimate(1024))
    assert abs(r1) < 1e-3
    assert abs(r2) < 1e-3


def test_hilbert_identity_rhs_terms():
    est = semicircle_estimate(1024)
    # (int f)^2 / 2pi = 1/2pi for a probability density
    assert (np.trapezoid(est.mu, est.grid)) ** 2 / (2 * np.pi) == pytest.approx(
        1 / (2 * np.pi), abs=1e-4
    )
    # (int f/x)^2 = 0 for even f on a symmetric grid
    with np.errstate(divide="ignore", invalid="ignore"):
        fx = np.where(est.grid != 0, est.mu / est.grid, 0.0)
    assert abs(np.trapezoid(fx, est.grid)) < 1e-12


def test_hilbert_identity_third_limit_on_semicircle():
    # for even f with f(0) > 0 the third identity picks up (pi/2) f(0)^2;
    # the semicircle has f(0) = 1/pi, so r3 -> 1/(2 pi), not 0
    _, _, r3 = hilbert_identity_suite(semicircle_estimate(1024))
    assert abs(r3 - 1.0 / (2 * np.pi)) < 1e-3


def test_hilbert_identity_third_vanishes_with_spectral_gap():
    # density vanishing at the origin: the identity holds as stated
    rng = np.random.default_rng(11)
    a = rng.standard_normal((500, 2000)) / np.sqrt(500)
    est = estimate_density(svd_spectrum(a, keep_vectors=False), npoints=1024)
    _, _, r3 = hilbert_identity_suite(est)
    assert abs(r3) < 2e-3


def test_hilbert_identities_refine_with_grid():
    c1 = hilbert_identity_suite(semicircle_estimate(512))
    c2 = hilbert_identity_suite(semicircle_estimate(2048))
    assert abs(c2[0]) < abs(c1[0])
    assert abs(c2[1]) < abs(c1[1])
    limit = 1.0 / (2 * np.pi)
    assert abs(c2[2] - limit) < abs(c1[2] - limit)


def test_mutual_information_zero_at_origin():
    curve = mutual_information_curve([(0.0, 1.0), (1.0, 0.5)], alpha=1.0)
    assert curve[0, 1] == 0.0


def test_mutual_information_closed_form():
    lam = np.linspace(0.0, 3.0, 200)
    curve = mutual_information_curve(np.column_stack([lam, 1.0 / (1.0 + lam)]), alpha=1.0)
    assert np.max(np.abs(curve[:, 1] - 0.5 * np.log1p(lam))) < 1e-3


def test_mutual_information_shape_properties():
    lam = np.linspace(0.0, 3.0, 100)
    curve = mutual_information_curve(np.column_stack([lam, 1.0 / (1.0 + lam)]), alpha=0.5)
    mi = curve[:, 1]
    assert np.all(np.diff(mi) >= 0)           # nondecreasing
    assert np.all(np.diff(mi, 2) <= 1e-12)    # concave


def test_mutual_information_grid_validation():
    with pytest.raises(ValueError):
        mutual_information_curve([(0.5, 1.0), (1.0, 0.5)], alpha=1.0)
    with pytest.raises(ValueError):
        mutual_information_curve([(0.0, 1.0), (0.0, 0.5)], alpha=1.0)


def test_mmse_report_csv(tmp_path, gauss2000):
    from rrie.spectral import SingularSpectrum

    n = gauss2000["n"]
    half = estimate_density(SingularSpectrum(values=gauss2000["gy"], n=n, m=n)).positive_half()
    rep = mmse_gaussian(half, 1.0, 1.0)
    rep.empirical_mse = 0.5
    rep.stderr = 0.01
    path = tmp_path / "m.csv"
    reports_to_csv([rep], path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == MMSE_CSV_HEADER
    assert len(lines[1].split(",")) == 7

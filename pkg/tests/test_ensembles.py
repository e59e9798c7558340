import numpy as np
import pytest

from rrie import (
    ChannelParams,
    NoiseModel,
    SignalPrior,
    haar_orthogonal,
    observe,
    sample_gaussian_matrix,
    sample_haar_rotated,
    sample_noise,
    sample_signal,
)
from rrie.ensembles import trial_seed


def test_channel_params_validation():
    p = ChannelParams(n=100, m=400, snr=2.0)
    assert p.alpha == 0.25
    with pytest.raises(ValueError):
        ChannelParams(n=10, m=5, snr=1.0)
    with pytest.raises(ValueError):
        ChannelParams(n=10, m=20, snr=-1.0)
    with pytest.raises(ValueError):
        ChannelParams(n=10, m=20, snr=1.0, alpha=0.3)
    # explicit alpha accepted when consistent
    assert ChannelParams(n=10, m=20, snr=1.0, alpha=0.5).alpha == 0.5


def test_signal_prior_validation():
    with pytest.raises(ValueError):
        SignalPrior(kind="sparse-diag", sparsity=1.5)
    with pytest.raises(ValueError):
        SignalPrior(kind="haar-spectrum")
    with pytest.raises(ValueError):
        SignalPrior(kind="bogus")


def test_gaussian_zero_variance_is_zero_matrix():
    assert np.all(sample_gaussian_matrix(3, 3, 0.0, 123) == 0.0)


def test_gaussian_seed_determinism():
    a = sample_gaussian_matrix(2, 2, 0.5, 42)
    b = sample_gaussian_matrix(2, 2, 0.5, 42)
    assert np.array_equal(a, b)


def test_gaussian_frobenius_moment():
    # E ||Z||_F^2 = n * m * var = 800; Monte-Carlo mean over 100 draws
    rng = np.random.default_rng(1)
    total = np.mean(
        [np.sum(sample_gaussian_matrix(200, 800, 1.0 / 200, rng) ** 2) for _ in range(100)]
    )
    assert abs(total - 800.0) / 800.0 < 0.05


def test_haar_rotated_zero_spectrum():
    assert np.all(sample_haar_rotated(np.zeros(4), 4, 6, 3) == 0.0)


def test_haar_rotated_preserves_spectrum():
    rng = np.random.default_rng(2)
    sigma = rng.uniform(0.0, 3.0, 40)
    a = sample_haar_rotated(sigma, 40, 55, rng)
    vals = np.linalg.svd(a, compute_uv=False)
    assert np.allclose(vals, np.sort(sigma)[::-1], atol=1e-10)


def test_haar_factors_orthogonal():
    q = haar_orthogonal(64, 11)
    assert np.max(np.abs(q.T @ q - np.eye(64))) < 1e-12


def test_haar_first_column_sphere_moment():
    # first column is uniform on the sphere: E[q_00^2] = 1/50
    rng = np.random.default_rng(7)
    acc = np.mean([haar_orthogonal(50, rng)[0, 0] ** 2 for _ in range(1000)])
    assert abs(acc - 0.02) / 0.02 < 0.10


def test_haar_rotated_rejects_bad_sigma():
    with pytest.raises(ValueError):
        sample_haar_rotated(np.array([1.0, -0.5]), 2, 4, 0)
    with pytest.raises(ValueError):
        sample_haar_rotated(np.array([1.0, np.inf]), 2, 4, 0)
    with pytest.raises(ValueError):
        sample_haar_rotated(np.ones(3), 3, 2, 0)


def test_sparse_prior_extremes():
    params = ChannelParams(n=30, m=40, snr=1.0)
    all_zero = sample_signal(SignalPrior(kind="sparse-diag", sparsity=1.0), params, 5)
    assert np.all(all_zero == 0.0)
    dense = sample_signal(SignalPrior(kind="sparse-diag", sparsity=0.0), params, 5)
    vals = np.linalg.svd(dense, compute_uv=False)
    assert np.allclose(vals, 1.0, atol=1e-10)


def test_gaussian_prior_esd_second_moment():
    # empirical second moment of the singular value distribution ~ 1/alpha
    params = ChannelParams(n=500, m=500, snr=1.0)
    s = sample_signal(SignalPrior(kind="gaussian-iid"), params, 9)
    second = np.sum(np.linalg.svd(s, compute_uv=False) ** 2) / 500
    assert abs(second - 1.0) < 0.05


def test_observe_snr_zero_returns_noise_exactly():
    params = ChannelParams(n=20, m=30, snr=0.0)
    noise = NoiseModel(kind="gaussian-iid")
    S = np.ones((20, 30))
    obs = observe(S, noise, params, 123)
    z = sample_noise(noise, params, obs.seed)
    assert np.array_equal(obs.y, z)


def test_observe_zero_noise_returns_scaled_signal():
    params = ChannelParams(n=10, m=12, snr=4.0)
    silent = NoiseModel(kind="haar-spectrum", sampler=lambda n, rng: np.zeros(n))
    S = np.arange(120, dtype=float).reshape(10, 12) / 120
    obs = observe(S, silent, params, 0)
    assert np.allclose(obs.y, 2.0 * S, atol=0, rtol=0)


def test_observe_noise_regenerable_from_seed():
    params = ChannelParams(n=15, m=25, snr=3.0)
    noise = NoiseModel(kind="haar-uniform")
    S = np.random.default_rng(8).standard_normal((15, 25))
    obs = observe(S, noise, params, 2024)
    z = sample_noise(noise, params, obs.seed)
    # re-applying the channel reproduces y bit-exactly
    assert np.array_equal(np.sqrt(params.snr) * obs.truth + z, obs.y)
    # and the residual recovers the draw to rounding
    assert np.allclose(obs.y - np.sqrt(params.snr) * obs.truth, z, atol=1e-14)


def test_observe_frobenius_moment():
    # independence: E||Y||_F^2 = snr ||S||_F^2 + M at entry variance 1/N
    params = ChannelParams(n=300, m=300, snr=1.0)
    noise = NoiseModel(kind="gaussian-iid")
    S = sample_signal(SignalPrior(kind="gaussian-iid"), params, 4)
    target = np.sum(S**2) + 300
    rng = np.random.default_rng(10)
    vals = [np.sum(observe(S, noise, params, rng).y ** 2) for _ in range(50)]
    assert abs(np.mean(vals) - target) / target < 0.05


def test_channel_linearity_shared_draw():
    params = ChannelParams(n=25, m=40, snr=2.5)
    noise = NoiseModel(kind="gaussian-iid")
    S = np.random.default_rng(3).standard_normal((25, 40))
    y1 = observe(S, noise, params, 77).y
    y0 = observe(np.zeros((25, 40)), noise, params, 77).y
    assert np.allclose(y1 - y0, np.sqrt(2.5) * S, atol=1e-13)


def test_observe_shape_mismatch():
    params = ChannelParams(n=5, m=6, snr=1.0)
    with pytest.raises(ValueError):
        observe(np.zeros((6, 5)), NoiseModel(kind="gaussian-iid"), params, 0)


def test_trial_streams_are_independent_and_stable():
    a = np.random.default_rng(trial_seed(99, 1, 0)).standard_normal(4)
    b = np.random.default_rng(trial_seed(99, 1, 1)).standard_normal(4)
    a2 = np.random.default_rng(trial_seed(99, 1, 0)).standard_normal(4)
    assert np.array_equal(a, a2)
    assert not np.array_equal(a, b)


def test_noise_rtransform_binding():
    gaussian = NoiseModel(kind="gaussian-iid")
    assert gaussian.rtransform_for(0.5)(np.array([0.3]))[0] == pytest.approx(0.6)
    uniform = NoiseModel(kind="haar-uniform")
    assert abs(uniform.rtransform_for(1.0)(np.array([0.0 + 0j]))[0]) == 0.0
    with pytest.raises(ValueError):
        uniform.rtransform_for(0.5)
    custom = NoiseModel(kind="haar-spectrum", sampler=lambda n, rng: np.ones(n))
    with pytest.raises(ValueError):
        custom.rtransform_for(1.0)

"""scikit-learn style wrapper around the shrinkage pipeline."""

from __future__ import annotations

from typing import Callable, Optional, Union

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .rie import gaussian_rie_shrink, general_rie_shrink, reconstruct
from .spectral import eval_at_singular_values, svd_spectrum


class RectangularRIE(BaseEstimator, TransformerMixin):
    """Matrix denoiser by rotation-invariant singular-value shrinkage.

    Treats the input X as one observation Y = sqrt(snr) * S + Z of a signal
    S under additive rotationally invariant noise and returns the estimate
    of S sharing Y's singular vectors with optimally shrunk singular values.

    Parameters
    ----------
    snr : float
        Signal-to-noise ratio of the observation channel (> 0).
    noise : {"gaussian", "uniform02"} or callable
        Noise spectrum model.  "gaussian" selects the closed-form shrinker
        for i.i.d. Gaussian noise of entry variance 1/n; "uniform02" the
        uniform-[0, 2] singular value noise (square matrices only); a
        callable is used as the noise's rectangular R-transform and must
        accept complex numpy arrays.
    eta : float, optional
        Imaginary offset of the spectral estimates.  Default: the
        max(gamma_max/4, 1e-3)/sqrt(n) policy.
    clamp : bool
        Clamp shrunk singular values at zero.  Off by default: the
        unconstrained values are the error minimizers.

    Attributes
    ----------
    spectrum_ : SingularSpectrum
        SVD of the fitted matrix.
    shrinkage_ : ShrinkageResult
        Shrunk singular values with edge flags.
    estimate_ : ndarray
        Denoised matrix for the fitted input.
    """

    def __init__(
        self,
        snr: float = 1.0,
        noise: Union[str, Callable] = "gaussian",
        eta: Optional[float] = None,
        clamp: bool = False,
    ):
        self.snr = snr
        self.noise = noise
        self.eta = eta
        self.clamp = clamp

    def _shrink(self, X: np.ndarray):
        if not self.snr > 0:
            raise ValueError("snr must be positive")
        n, m = X.shape
        if n > m:
            raise ValueError(
                f"n={n} > m={m}: transpose the input so that rows <= columns"
            )
        spectrum = svd_spectrum(X, keep_vectors=True)
        per_gamma = eval_at_singular_values(spectrum, eta=self.eta)
        if self.noise == "gaussian":
            shrinkage = gaussian_rie_shrink(spectrum, self.snr, per_gamma=per_gamma)
        else:
            if callable(self.noise):
                rtransform = self.noise
            elif self.noise == "uniform02":
                if n != m:
                    raise ValueError("uniform02 noise is only defined at alpha = 1")
                from .freeprob import uniform02_rtransform

                rtransform = uniform02_rtransform()
            else:
                raise ValueError(f"unknown noise model {self.noise!r}")
            shrinkage = general_rie_shrink(
                spectrum, self.snr, rtransform, per_gamma=per_gamma
            )
        xi = shrinkage.clamped() if self.clamp else shrinkage.xi
        return spectrum, shrinkage, reconstruct(spectrum, xi)

    def fit(self, X, y=None):
        """Decompose X and compute its shrunk spectrum."""
        X = check_array(X, dtype=np.float64, ensure_min_samples=1, ensure_min_features=1)
        self.spectrum_, self.shrinkage_, self.estimate_ = self._shrink(X)
        self._fitted_X = X
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Denoise X.  Reuses the fit when X is the fitted matrix."""
        check_is_fitted(self, "estimate_")
        X = check_array(X, dtype=np.float64)
        if X.shape == self._fitted_X.shape and np.array_equal(X, self._fitted_X):
            return self.estimate_
        return self._shrink(X)[2]

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)

    def denoise(self, X) -> np.ndarray:
        """One-shot convenience: fit on X and return the estimate."""
        return self.fit(X).estimate_

"""rrie: matrix denoising under additive rotationally invariant noise.

Recovers a signal matrix S from one observation Y = sqrt(snr) * S + Z by
shrinking Y's singular values, where the shrinkage is driven by the
spectral density of Y and the rectangular free-probability transform of
the noise.  Includes the transform machinery, oracle and overlap
diagnostics, asymptotic MMSE formulas, and a simulation harness.
"""

from .ensembles import (
    ChannelParams,
    NoiseModel,
    Observation,
    SignalPrior,
    haar_orthogonal,
    observe,
    sample_gaussian_matrix,
    sample_haar_rotated,
    sample_noise,
    sample_signal,
)
from .estimator import RectangularRIE
from .freeprob import (
    AnalyticMeasure,
    AtomMeasure,
    GridMeasure,
    TransformContext,
    TransformDomainError,
    atoms_context,
    check_free_convolution,
    closed_form_rtransforms,
    h_transform,
    invert_h,
    m_transform,
    marchenko_pastur_rtransform,
    rect_r_transform,
    t_alpha,
    t_alpha_inverse,
    uniform02_rtransform,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    emit_plot_data,
    run_experiment,
    run_overlap_experiment,
)
from .mmse import (
    MmseReport,
    empirical_mse,
    hilbert_identity_suite,
    mmse_gaussian,
    mmse_general,
    mutual_information_curve,
)
from .rie import (
    OverlapCurve,
    ShrinkageResult,
    ZetaPair,
    gaussian_rie_shrink,
    general_rie_shrink,
    identity_shrink,
    oracle_singular_values,
    overlap_empirical,
    overlap_theory,
    reconstruct,
    zeta_star,
)
from .spectral import (
    DensityEstimate,
    SingularSpectrum,
    StieltjesEval,
    density_and_hilbert,
    estimate_density,
    eta_policy,
    eval_at_singular_values,
    stieltjes_cauchy,
    svd_spectrum,
    symmetrize,
)

__version__ = "0.1.0"

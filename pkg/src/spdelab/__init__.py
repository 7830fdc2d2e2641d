"""Spectral-Galerkin laboratory for semilinear stochastic heat equations.

Simulates the mild solution of dX + [AX + F(X)]dt = G(X)dW on the truncated
eigenbasis of A and probes the smoothness predictions that come with it:
fractional-norm finiteness, temporal Hölder exponents, and the borderline
covariance example whose higher norms blow up.
"""

from .models import (
    AdditiveDiagonalDiffusion,
    AssumptionReport,
    DiagonalLinearDrift,
    ModelSpec,
    NemytskiiDiffusion,
    NemytskiiDrift,
    ScalarFunction,
    ZeroDrift,
    apply_diffusion_increment,
    apply_drift,
    get_scalar_function,
    register_scalar_function,
    registered_functions,
    validate_assumptions,
)
from .noise import (
    CovarianceSpectrum,
    DiagonalHSOperator,
    NoiseIncrement,
    NoiseStream,
    burkholder_constant,
    example_covariance,
    hs_norm_L20,
    hs_norm_L2r,
    sample_increment,
)
from .probes import (
    HolderEstimate,
    NormSpec,
    SeriesReport,
    continuity_modulus,
    convolution_increment_scaling,
    estimate_lp_norm,
    example_series_partial_sum,
    example_series_report,
    fit_holder_exponent,
    increment_samples,
    predicted_temporal_exponent,
    spatial_sweep,
    temporal_probe,
    truncate_model,
)
from .solver import (
    EXACT_GAUSSIAN,
    EXPONENTIAL_EULER,
    SolverConfig,
    Trajectory,
    ensemble_snapshots,
    exact_ou_path,
    exponential_euler_step,
    map_paths,
    simulate_path,
)
from .spectrum import (
    SpectralCoeffs,
    SpectralOperator,
    apply_fractional_power,
    apply_semigroup,
    deterministic_convolution_norm,
    dirichlet_laplacian_1d,
    hdot_norm,
    smoothing_constant,
    stochastic_convolution_energy,
)
from .transforms import sine_transform_forward, sine_transform_inverse

__version__ = "0.1.0"

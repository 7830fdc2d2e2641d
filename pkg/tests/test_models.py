"""Model specification tests: registry, drift/diffusion evaluation, assumptions."""

import numpy as np
import pytest

from spdelab.models import (
    AdditiveDiagonalDiffusion,
    DiagonalLinearDrift,
    ModelSpec,
    NemytskiiDiffusion,
    NemytskiiDrift,
    ZeroDrift,
    apply_diffusion_increment,
    apply_drift,
    get_scalar_function,
    register_scalar_function,
    registered_functions,
    validate_assumptions,
)
from spdelab.noise import CovarianceSpectrum, NoiseIncrement, example_covariance
from spdelab.spectrum import SpectralCoeffs, dirichlet_laplacian_1d


def make_model(n=8, drift=None, diffusion=None, r=0.0, initial=None, covariance=None):
    return ModelSpec(
        operator=dirichlet_laplacian_1d(n),
        covariance=covariance if covariance is not None else example_covariance(n),
        drift=drift if drift is not None else ZeroDrift(),
        diffusion=diffusion if diffusion is not None else AdditiveDiagonalDiffusion(np.ones(n)),
        initial=SpectralCoeffs(initial if initial is not None else np.zeros(n)),
        r=r,
    )


class TestRegistry:
    def test_known_functions_present(self):
        names = [entry.name for entry in registered_functions()]
        for required in ("identity", "sin", "tanh"):
            assert required in names

    def test_unknown_function_rejected(self):
        with pytest.raises(KeyError):
            get_scalar_function("not-a-function")

    def test_registration_verifies_lipschitz_constant(self):
        with pytest.raises(ValueError):
            register_scalar_function("too-steep", lambda u: 3.0 * u, 1.0)

    def test_declared_constants_hold_on_dense_grid(self):
        grid = np.linspace(-10.0, 10.0, 4001)
        for entry in registered_functions():
            slopes = np.abs(np.diff(entry.fn(grid)) / np.diff(grid))
            assert slopes.max() <= entry.lipschitz * (1.0 + 1e-6)


class TestModelValidation:
    def test_additive_allows_unit_regularity(self):
        n = 4
        make_model(
            n,
            covariance=CovarianceSpectrum(np.zeros(n)),
            r=1.0,
        )

    def test_multiplicative_rejects_unit_regularity(self):
        n = 4
        with pytest.raises(ValueError):
            make_model(n, diffusion=NemytskiiDiffusion("tanh", 4 * n), r=1.0)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ModelSpec(
                operator=dirichlet_laplacian_1d(4),
                covariance=example_covariance(5),
                drift=ZeroDrift(),
                diffusion=AdditiveDiagonalDiffusion(np.ones(4)),
                initial=SpectralCoeffs(np.zeros(4)),
            )

    def test_small_nemytskii_grid_rejected(self):
        with pytest.raises(ValueError):
            make_model(8, drift=NemytskiiDrift("sin", 10))

    def test_moment_order_must_be_at_least_two(self):
        n = 4
        with pytest.raises(ValueError):
            ModelSpec(
                operator=dirichlet_laplacian_1d(n),
                covariance=example_covariance(n),
                drift=ZeroDrift(),
                diffusion=AdditiveDiagonalDiffusion(np.ones(n)),
                initial=SpectralCoeffs(np.zeros(n)),
                p=1.0,
            )


class TestApplyDrift:
    def test_zero_drift(self):
        model = make_model()
        x = SpectralCoeffs(np.arange(1.0, 9.0))
        np.testing.assert_array_equal(apply_drift(model, x).values, np.zeros(8))

    def test_constant_diagonal_multiplier(self):
        n = 8
        model = make_model(n, drift=DiagonalLinearDrift(np.full(n, 2.5)))
        x = SpectralCoeffs(np.arange(1.0, 9.0))
        np.testing.assert_allclose(apply_drift(model, x).values, 2.5 * x.values, rtol=1e-15)

    def test_odd_pointwise_function_fixes_zero(self):
        model = make_model(8, drift=NemytskiiDrift("sin", 32))
        out = apply_drift(model, SpectralCoeffs(np.zeros(8)))
        np.testing.assert_allclose(out.values, np.zeros(8), atol=1e-14)

    def test_identity_pointwise_function_is_modewise_identity(self):
        n = 8
        model = make_model(n, drift=NemytskiiDrift("identity", 4 * n))
        x = SpectralCoeffs(np.random.default_rng(0).standard_normal(n))
        np.testing.assert_allclose(apply_drift(model, x).values, x.values, atol=1e-10)


class TestApplyDiffusion:
    def test_unit_additive_passes_increment_through(self):
        model = make_model()
        dW = NoiseIncrement(np.random.default_rng(1).standard_normal(8), 0.1)
        out = apply_diffusion_increment(model, SpectralCoeffs(np.ones(8)), dW)
        np.testing.assert_array_equal(out.values, dW.values)

    def test_zero_increment_maps_to_zero(self):
        model = make_model(8, diffusion=NemytskiiDiffusion("tanh", 32))
        dW = NoiseIncrement(np.zeros(8), 0.1)
        out = apply_diffusion_increment(model, SpectralCoeffs(np.ones(8)), dW)
        np.testing.assert_allclose(out.values, np.zeros(8), atol=1e-14)

    def test_constant_one_multiplier_matches_additive_identity(self):
        n = 8
        model = make_model(n, diffusion=NemytskiiDiffusion("one", 4 * n))
        x = SpectralCoeffs(np.random.default_rng(2).standard_normal(n))
        dW = NoiseIncrement(np.random.default_rng(3).standard_normal(n), 0.1)
        out = apply_diffusion_increment(model, x, dW)
        np.testing.assert_allclose(out.values, dW.values, atol=1e-10)


class TestValidateAssumptions:
    def test_borderline_model_passes_at_zero_regularity(self):
        report = validate_assumptions(make_model(256, r=0.0))
        assert report.passed

    def test_borderline_model_fails_at_positive_regularity(self):
        report = validate_assumptions(make_model(256, r=0.5))
        assert not report.check("diffusion_growth").passed
        sums = report.check("diffusion_growth").measured["partial_sums"]
        assert sums[2] - sums[1] > sums[1] - sums[0]

    def test_trivial_model_passes(self):
        n = 8
        report = validate_assumptions(
            make_model(n, covariance=CovarianceSpectrum(np.zeros(n)))
        )
        assert report.check("drift_lipschitz").passed
        assert report.check("initial_regularity").passed
        assert report.check("initial_regularity").measured["norm"] == 0.0

    def test_multiplicative_model_reports_measured_constants(self):
        n = 8
        report = validate_assumptions(
            make_model(n, diffusion=NemytskiiDiffusion("tanh", 4 * n))
        )
        assert report.check("diffusion_lipschitz").measured["measured"] > 0.0
        assert report.check("diffusion_growth").measured["measured"] > 0.0

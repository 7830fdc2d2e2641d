"""Problem description: drift and diffusion specifications, and assumption checks.

A model couples the operator spectrum, the noise covariance, a drift F, a
diffusion G, a deterministic initial state, and the regularity parameters
(r, p) the user claims for it.  Nonlinearities are pointwise (Nemytskii)
compositions with scalar functions from a registry of verified Lipschitz maps,
evaluated through the sine transforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import transforms
from .noise import CovarianceSpectrum, DiagonalHSOperator, NoiseIncrement, hs_norm_L2r
from .spectrum import SpectralCoeffs, SpectralOperator, _frozen_array, hdot_norm


@dataclass(frozen=True)
class ScalarFunction:
    """Scalar Lipschitz function usable as a pointwise nonlinearity."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    lipschitz: float


_REGISTRY: dict[str, ScalarFunction] = {}


def register_scalar_function(
    name: str, fn: Callable[[np.ndarray], np.ndarray], lipschitz: float
) -> ScalarFunction:
    """Register a scalar function after checking its Lipschitz constant on a dense grid."""
    if lipschitz < 0.0 or not math.isfinite(lipschitz):
        raise ValueError(f"Lipschitz constant must be nonnegative and finite, got {lipschitz}")
    grid = np.linspace(-20.0, 20.0, 8001)
    vals = np.asarray(fn(grid), dtype=float)
    if vals.shape != grid.shape or not np.all(np.isfinite(vals)):
        raise ValueError(f"function {name!r} must map finite reals to finite reals")
    slopes = np.abs(np.diff(vals) / np.diff(grid))
    measured = float(np.max(slopes))
    if measured > lipschitz * (1.0 + 1e-6):
        raise ValueError(
            f"function {name!r}: measured slope {measured:.6g} exceeds "
            f"declared Lipschitz constant {lipschitz:.6g}"
        )
    entry = ScalarFunction(name, fn, float(lipschitz))
    _REGISTRY[name] = entry
    return entry


def get_scalar_function(name: str) -> ScalarFunction:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown scalar function {name!r}; registered: {sorted(_REGISTRY)}"
        ) from None


def registered_functions() -> list[ScalarFunction]:
    return [_REGISTRY[name] for name in sorted(_REGISTRY)]


register_scalar_function("identity", lambda u: u, 1.0)
register_scalar_function("one", lambda u: np.ones_like(u), 0.0)
register_scalar_function("sin", np.sin, 1.0)
register_scalar_function("cos", np.cos, 1.0)
register_scalar_function("tanh", np.tanh, 1.0)
register_scalar_function("sigmoid", lambda u: 1.0 / (1.0 + np.exp(-u)), 0.25)


@dataclass(frozen=True)
class ZeroDrift:
    lipschitz: float = 0.0


@dataclass(frozen=True)
class DiagonalLinearDrift:
    """Drift acting as multiplication by f_k on mode k; Lipschitz constant sup|f_k|."""

    multipliers: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "multipliers", _frozen_array(self.multipliers))
        if not np.all(np.isfinite(self.multipliers)):
            raise ValueError("drift multipliers must be finite")

    @property
    def lipschitz(self) -> float:
        return float(np.max(np.abs(self.multipliers)))


@dataclass(frozen=True)
class NemytskiiDrift:
    """Pointwise drift u(y) -> f(u(y)) through the sine transforms on an M-point grid."""

    function: str
    grid_size: int

    @property
    def lipschitz(self) -> float:
        return get_scalar_function(self.function).lipschitz


DriftSpec = Union[ZeroDrift, DiagonalLinearDrift, NemytskiiDrift]


@dataclass(frozen=True)
class AdditiveDiagonalDiffusion:
    """State-independent diffusion acting as multiplication by g_k on mode k."""

    multipliers: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "multipliers", _frozen_array(self.multipliers))
        if not np.all(np.isfinite(self.multipliers)):
            raise ValueError("diffusion multipliers must be finite")

    @property
    def lipschitz(self) -> float:
        return 0.0


@dataclass(frozen=True)
class NemytskiiDiffusion:
    """Multiplicative diffusion (G(x) w)(y) = g(x(y)) w(y) on an M-point grid."""

    function: str
    grid_size: int

    @property
    def lipschitz(self) -> float:
        return get_scalar_function(self.function).lipschitz


DiffusionSpec = Union[AdditiveDiagonalDiffusion, NemytskiiDiffusion]


@dataclass(frozen=True)
class ModelSpec:
    """Full problem description with its declared regularity parameters."""

    operator: SpectralOperator
    covariance: CovarianceSpectrum
    drift: DriftSpec
    diffusion: DiffusionSpec
    initial: SpectralCoeffs
    r: float = 0.0
    p: float = 2.0

    def __post_init__(self):
        n = self.operator.dimension
        if self.covariance.dimension != n:
            raise ValueError(
                f"covariance dimension {self.covariance.dimension} != operator dimension {n}"
            )
        if self.initial.dimension != n:
            raise ValueError(
                f"initial-state dimension {self.initial.dimension} != operator dimension {n}"
            )
        if isinstance(self.drift, DiagonalLinearDrift) and self.drift.multipliers.size != n:
            raise ValueError("diagonal drift multiplier count must match the operator")
        if isinstance(self.diffusion, AdditiveDiagonalDiffusion):
            if self.diffusion.multipliers.size != n:
                raise ValueError("diagonal diffusion multiplier count must match the operator")
            if not 0.0 <= self.r <= 1.0:
                raise ValueError(f"additive models allow r in [0, 1], got {self.r}")
            norm = hs_norm_L2r(
                self.operator,
                self.covariance,
                DiagonalHSOperator(self.diffusion.multipliers),
                self.r,
            )
            if not math.isfinite(norm):
                raise ValueError("weighted Hilbert-Schmidt norm of the diffusion is not finite")
        else:
            if not 0.0 <= self.r < 1.0:
                raise ValueError(f"multiplicative models require r in [0, 1), got {self.r}")
        if self.p < 2.0:
            raise ValueError(f"moment order must be >= 2, got {self.p}")
        for spec in (self.drift, self.diffusion):
            if isinstance(spec, (NemytskiiDrift, NemytskiiDiffusion)):
                get_scalar_function(spec.function)  # must exist
                if spec.grid_size < 2 * n:
                    raise ValueError(
                        f"Nemytskii grid size {spec.grid_size} must be >= 2 * {n}"
                    )
        if not math.isfinite(hdot_norm(self.operator, self.r + 1.0, self.initial)):
            raise ValueError("initial state must have a finite smoothness norm at r + 1")

    @property
    def dimension(self) -> int:
        return self.operator.dimension


def _drift_rows(model: ModelSpec, states: np.ndarray) -> np.ndarray:
    """Drift evaluated row-wise on a (paths, modes) state array."""
    drift = model.drift
    if isinstance(drift, ZeroDrift):
        return np.zeros_like(states)
    if isinstance(drift, DiagonalLinearDrift):
        return states * drift.multipliers
    fn = get_scalar_function(drift.function).fn
    grid_values = transforms.synthesize(states, drift.grid_size)
    return transforms.analyze(fn(grid_values), model.dimension)


def _diffusion_rows(model: ModelSpec, states: np.ndarray, increments: np.ndarray) -> np.ndarray:
    """G(state) dW evaluated row-wise on matching (paths, modes) arrays."""
    diffusion = model.diffusion
    if isinstance(diffusion, AdditiveDiagonalDiffusion):
        return increments * diffusion.multipliers
    fn = get_scalar_function(diffusion.function).fn
    state_values = transforms.synthesize(states, diffusion.grid_size)
    noise_values = transforms.synthesize(increments, diffusion.grid_size)
    return transforms.analyze(fn(state_values) * noise_values, model.dimension)


def apply_drift(model: ModelSpec, x: SpectralCoeffs) -> SpectralCoeffs:
    """Evaluate the drift F(x) in eigenmode coefficients."""
    if x.dimension != model.dimension:
        raise ValueError(f"dimension mismatch: {x.dimension} != {model.dimension}")
    return SpectralCoeffs(_drift_rows(model, x.values[None, :])[0])


def apply_diffusion_increment(
    model: ModelSpec, x: SpectralCoeffs, dW: NoiseIncrement
) -> SpectralCoeffs:
    """Evaluate G(x) applied to a noise increment, in eigenmode coefficients."""
    if x.dimension != model.dimension or dW.dimension != model.dimension:
        raise ValueError(
            f"dimension mismatch: state {x.dimension}, increment {dW.dimension}, "
            f"model {model.dimension}"
        )
    return SpectralCoeffs(_diffusion_rows(model, x.values[None, :], dW.values[None, :])[0])


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple[AssumptionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _dyadic_partial_sums(weights: np.ndarray) -> list[float]:
    """Partial sums of `weights` at dimensions N/4, N/2, N (rounded down)."""
    n = weights.size
    cuts = sorted({max(n // 4, 1), max(n // 2, 1), n})
    return [float(np.sum(weights[:c])) for c in cuts]


def validate_assumptions(model: ModelSpec, probe_seed: int = 0) -> AssumptionReport:
    """Check the standing assumptions at the truncated level and record constants.

    The growth/finiteness check for the diffusion inspects partial sums of the
    weighted Hilbert-Schmidt series across dimension doublings: increments that
    fail to shrink flag a divergent series (the declared r is too large).
    Nemytskii nonlinearities are probed at random states; measured ratios are
    reported, not proven.
    """
    checks: list[AssumptionCheck] = []
    op, cov = model.operator, model.covariance
    n = model.dimension

    lip_f = model.drift.lipschitz
    checks.append(
        AssumptionCheck("drift_lipschitz", math.isfinite(lip_f), {"constant": lip_f})
    )

    lip_g = model.diffusion.lipschitz
    if isinstance(model.diffusion, NemytskiiDiffusion):
        rng = np.random.default_rng(probe_seed)
        fn = get_scalar_function(model.diffusion.function).fn
        m = model.diffusion.grid_size
        basis = transforms.sine_basis_matrix(n, m)
        ratios = []
        for _ in range(8):
            x = rng.standard_normal(n) / np.arange(1, n + 1)
            y = x + 0.1 * rng.standard_normal(n) / np.arange(1, n + 1)
            ua, ub = transforms.synthesize(x, m)[0], transforms.synthesize(y, m)[0]
            # rows of `images`: coefficients of (g(u_x) - g(u_y)) e_m, one per basis mode
            images = transforms.analyze((fn(ua) - fn(ub)) * basis, n)
            gap = float(np.sqrt(np.sum(cov.variances[:, None] * images**2)))
            ratios.append(gap / float(np.linalg.norm(x - y)))
        measured_lip = max(ratios)
        checks.append(
            AssumptionCheck(
                "diffusion_lipschitz",
                math.isfinite(measured_lip),
                {"constant": lip_g, "measured": measured_lip},
            )
        )
    else:
        checks.append(
            AssumptionCheck("diffusion_lipschitz", True, {"constant": lip_g})
        )

    if isinstance(model.diffusion, AdditiveDiagonalDiffusion):
        weights = op.eigenvalues**model.r * cov.variances * model.diffusion.multipliers**2
        sums = _dyadic_partial_sums(weights)
        norm = math.sqrt(sums[-1])
        if len(sums) == 3 and n >= 16:
            inc1, inc2 = sums[1] - sums[0], sums[2] - sums[1]
            converging = inc2 < inc1 or inc2 == 0.0
        else:
            converging = True
        checks.append(
            AssumptionCheck(
                "diffusion_growth",
                math.isfinite(norm) and converging,
                {"hs_norm": norm, "partial_sums": tuple(sums)},
            )
        )
    else:
        rng = np.random.default_rng(probe_seed + 1)
        fn = get_scalar_function(model.diffusion.function).fn
        m = model.diffusion.grid_size
        basis = transforms.sine_basis_matrix(n, m)
        ratios = []
        for _ in range(8):
            x = rng.standard_normal(n) / np.arange(1, n + 1)
            u = transforms.synthesize(x, m)[0]
            images = transforms.analyze(fn(u) * basis, n)
            weighted = op.eigenvalues[None, :] ** model.r * images**2
            norm = float(np.sqrt(np.sum(cov.variances[:, None] * weighted)))
            ratios.append(norm / (1.0 + hdot_norm(op, model.r, SpectralCoeffs(x))))
        measured = max(ratios)
        checks.append(
            AssumptionCheck(
                "diffusion_growth", math.isfinite(measured), {"measured": measured}
            )
        )

    initial_norm = hdot_norm(op, model.r + 1.0, model.initial)
    checks.append(
        AssumptionCheck(
            "initial_regularity", math.isfinite(initial_norm), {"norm": initial_norm}
        )
    )
    return AssumptionReport(tuple(checks))

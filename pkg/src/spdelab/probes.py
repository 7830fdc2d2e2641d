"""Monte-Carlo regularity probes: moment norms, Hölder-exponent fits, sweeps.

All estimators consume per-path statistics produced by the solver in path
order, so aggregation is independent of execution order.  The temporal probes
use common-path coupling: both times of every increment are read from the same
trajectory.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .models import (
    AdditiveDiagonalDiffusion,
    DiagonalLinearDrift,
    ModelSpec,
    NemytskiiDiffusion,
    NemytskiiDrift,
)
from .noise import CovarianceSpectrum
from .solver import EXPONENTIAL_EULER, SolverConfig, map_paths
from .spectrum import SpectralCoeffs, SpectralOperator


@dataclass(frozen=True)
class NormSpec:
    """Which moment norm to estimate: smoothness weight s, moment order p."""

    s: float
    p: float

    def __post_init__(self):
        if self.p < 2.0:
            raise ValueError(f"moment order must be >= 2, got {self.p}")


@dataclass(frozen=True)
class HolderEstimate:
    """Fitted log-log slope of a modulus against the predicted Hölder exponent."""

    slope: float
    intercept: float
    slope_stderr: float
    lags: tuple[float, ...]
    predicted: float


@dataclass(frozen=True)
class SeriesReport:
    """Partial sums of the explicit second-moment series at growing truncations."""

    r: float
    t: float
    partial_sums: tuple[tuple[int, float], ...]


def predicted_temporal_exponent(r: float, s: float) -> float:
    """Theoretical Hölder exponent min(1/2, (1 + r - s)/2) of t -> X(t) in the s-norm."""
    return min(0.5, 0.5 * (1.0 + r - s))


def estimate_lp_norm(samples: Sequence[float], p: float) -> tuple[float, float]:
    """Estimate (E[|samples|^p])^{1/p} with a delta-method standard error."""
    arr = np.asarray(samples, dtype=float)
    if arr.size < 2:
        raise ValueError(f"need at least two samples, got {arr.size}")
    if p < 2.0:
        raise ValueError(f"moment order must be >= 2, got {p}")
    powered = np.abs(arr) ** p
    moment = float(np.mean(powered))
    if moment == 0.0:
        return 0.0, 0.0
    moment_se = float(np.std(powered, ddof=1) / math.sqrt(arr.size))
    estimate = moment ** (1.0 / p)
    return estimate, moment_se * estimate / (p * moment)


def _norm_rows(eigenvalues: np.ndarray, s: float, rows: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(eigenvalues**s * rows**2, axis=-1))


def increment_samples(
    model: ModelSpec,
    config: SolverConfig,
    s: float,
    lag_pairs: Sequence[tuple[float, float]],
    method: str = EXPONENTIAL_EULER,
    workers: int = 1,
) -> list[np.ndarray]:
    """Per-lag arrays of ||X(t2) - X(t1)||_s, both times read from the same path."""
    times = sorted({float(t) for pair in lag_pairs for t in pair})
    run_config = dataclasses.replace(config, snapshot_times=tuple(times))
    run_config.snapshot_steps()  # validates grid alignment
    index = {t: i for i, t in enumerate(times)}
    lam = model.operator.eigenvalues

    def reduce_block(rows: np.ndarray) -> np.ndarray:
        cols = [
            _norm_rows(lam, s, rows[:, index[t2], :] - rows[:, index[t1], :])
            for t1, t2 in lag_pairs
        ]
        return np.stack(cols, axis=1)

    table = map_paths(model, run_config, reduce_block, method=method, workers=workers)
    return [table[:, i] for i in range(len(lag_pairs))]


def fit_holder_exponent(
    per_lag_estimates: Sequence[tuple[float, float]], predicted: float
) -> HolderEstimate:
    """Ordinary least squares of log(estimate) on log(lag).

    Requires at least 8 strictly increasing lags spanning two decades and
    positive estimates.
    """
    lags = np.array([lag for lag, _ in per_lag_estimates], dtype=float)
    estimates = np.array([est for _, est in per_lag_estimates], dtype=float)
    if lags.size < 8:
        raise ValueError(f"need at least 8 lags, got {lags.size}")
    if np.any(np.diff(lags) <= 0.0):
        raise ValueError("lags must be strictly increasing")
    if lags[-1] / lags[0] < 100.0 * (1.0 - 1e-12):
        raise ValueError("lags must span at least a factor of 100")
    if np.any(estimates <= 0.0):
        raise ValueError("estimates must be positive for a log-log fit")
    x, y = np.log(lags), np.log(estimates)
    n = x.size
    x_centered = x - x.mean()
    sxx = float(np.sum(x_centered**2))
    slope = float(np.sum(x_centered * y) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (intercept + slope * x)
    stderr = float(np.sqrt(np.sum(residuals**2) / (n - 2) / sxx))
    return HolderEstimate(slope, intercept, stderr, tuple(lags), float(predicted))


def geometric_lag_multiples(count: int, max_multiple: int) -> list[int]:
    """Distinct integer step multiples, approximately geometric from 1 to max_multiple."""
    if count < 2 or max_multiple < count:
        raise ValueError("need count >= 2 and max_multiple >= count")
    raw = np.unique(
        np.round(max_multiple ** (np.arange(count) / (count - 1))).astype(int)
    )
    mults = list(raw)
    k = 0
    while len(mults) < count:  # fill collisions with the smallest free integers
        k += 1
        if k not in mults:
            mults.append(k)
    return sorted(mults)[:count]


def temporal_probe(
    model: ModelSpec,
    config: SolverConfig,
    s: float,
    anchor: float,
    lags: Sequence[float],
    p: float | None = None,
    method: str = EXPONENTIAL_EULER,
    workers: int = 1,
) -> tuple[HolderEstimate, list[tuple[float, float, float]]]:
    """Fit the temporal Hölder exponent at smoothness s from increments off an anchor.

    Returns the fit and the per-lag table (lag, estimate, stderr).
    """
    p = model.p if p is None else p
    pairs = [(anchor, anchor + lag) for lag in lags]
    samples = increment_samples(model, config, s, pairs, method=method, workers=workers)
    table = []
    for lag, arr in zip(lags, samples):
        est, se = estimate_lp_norm(arr, p)
        table.append((float(lag), est, se))
    fit = fit_holder_exponent(
        [(lag, est) for lag, est, _ in table], predicted_temporal_exponent(model.r, s)
    )
    return fit, table


def truncate_model(model: ModelSpec, n_modes: int) -> ModelSpec:
    """Restrict a model to its first n_modes eigenmodes (consistent sub-spectrum)."""
    n = model.dimension
    if not 1 <= n_modes <= n:
        raise ValueError(f"cannot truncate a {n}-mode model to {n_modes} modes")
    if n_modes == n:
        return model
    drift = model.drift
    if isinstance(drift, DiagonalLinearDrift):
        drift = DiagonalLinearDrift(drift.multipliers[:n_modes])
    elif isinstance(drift, NemytskiiDrift):
        drift = NemytskiiDrift(drift.function, drift.grid_size)
    diffusion = model.diffusion
    if isinstance(diffusion, AdditiveDiagonalDiffusion):
        diffusion = AdditiveDiagonalDiffusion(diffusion.multipliers[:n_modes])
    elif isinstance(diffusion, NemytskiiDiffusion):
        diffusion = NemytskiiDiffusion(diffusion.function, diffusion.grid_size)
    return ModelSpec(
        operator=SpectralOperator(model.operator.eigenvalues[:n_modes]),
        covariance=CovarianceSpectrum(model.covariance.variances[:n_modes]),
        drift=drift,
        diffusion=diffusion,
        initial=SpectralCoeffs(model.initial.values[:n_modes]),
        r=model.r,
        p=model.p,
    )


def spatial_sweep(
    model: ModelSpec,
    config: SolverConfig,
    s: float,
    n_values: Sequence[int],
    method: str = EXPONENTIAL_EULER,
    workers: int = 1,
) -> list[tuple[int, float]]:
    """Estimated sup over snapshots of the (s, p) moment norm at growing truncations.

    Every truncation re-instantiates the model on the leading sub-spectrum; the
    per-(path, step, mode) noise addressing makes the runs share their draws,
    so successive sweep values differ exactly by the added modes' contribution.
    """
    n_values = list(n_values)
    if any(n2 <= n1 for n1, n2 in zip(n_values, n_values[1:])):
        raise ValueError("truncation dimensions must be strictly increasing")
    results = []
    for n in n_values:
        sub = truncate_model(model, n)
        lam = sub.operator.eigenvalues

        def reduce_block(rows: np.ndarray) -> np.ndarray:
            return _norm_rows(lam, s, rows)

        norms = map_paths(model=sub, config=config, reduce_block=reduce_block,
                          method=method, workers=workers)
        value = max(
            estimate_lp_norm(norms[:, i], model.p)[0] for i in range(norms.shape[1])
        )
        results.append((n, value))
    return results


def example_series_partial_sum(r: float, t: float, n_modes: int) -> float:
    """Partial sum (1/2) sum_{k=2}^{N} (k^2 pi^2)^r (1 - e^{-2 k^2 pi^2 t}) / (k ln(k)^2).

    This is the exact second moment E||X(t)||_{1+r}^2 of the borderline example
    (identity diffusion, log-weighted covariance, zero initial state) at
    truncation N: the It/o isometry turns the stochastic integral into this
    deterministic series, which converges iff r = 0.
    """
    if t <= 0.0:
        raise ValueError(f"time must be positive, got {t}")
    if n_modes < 2:
        raise ValueError(f"need at least two modes, got {n_modes}")
    k = np.arange(2, n_modes + 1, dtype=float)
    lam = (k * np.pi) ** 2
    terms = lam**r * (-np.expm1(-2.0 * lam * t)) / (k * np.log(k) ** 2)
    return 0.5 * float(np.sum(terms))


def example_series_report(r: float, t: float, n_values: Sequence[int]) -> SeriesReport:
    n_values = list(n_values)
    if any(n2 <= n1 for n1, n2 in zip(n_values, n_values[1:])):
        raise ValueError("truncation dimensions must be strictly increasing")
    sums = tuple((int(n), example_series_partial_sum(r, t, n)) for n in n_values)
    return SeriesReport(float(r), float(t), sums)


def convolution_increment_scaling(
    op: SpectralOperator,
    cov: CovarianceSpectrum,
    g_multipliers: np.ndarray,
    s: float,
    r: float,
    deltas: Sequence[float],
) -> HolderEstimate:
    """Fit the lag scaling of the exact noise-response energy at smoothness s.

    For a state-independent diagonal diffusion the energy over a window of
    width delta is (1/2) sum_k g_k^2 q_k lam_k^{s-1} (1 - e^{-2 lam_k delta});
    the fitted log-log slope of its square root is compared against
    min(1/2, (1 + r - s)/2).
    """
    g = np.asarray(g_multipliers, dtype=float)
    if not (op.dimension == cov.dimension == g.size):
        raise ValueError("dimension mismatch between operator, covariance, and multipliers")
    deltas = np.asarray(sorted(float(d) for d in deltas))
    if deltas[0] <= 0.0:
        raise ValueError("lags must be positive")
    lam = op.eigenvalues
    values = []
    for delta in deltas:
        energy = 0.5 * float(
            np.sum(g**2 * cov.variances * lam ** (s - 1.0) * (-np.expm1(-2.0 * lam * delta)))
        )
        values.append(math.sqrt(energy))
    return fit_holder_exponent(
        list(zip(deltas.tolist(), values)), predicted_temporal_exponent(r, s)
    )


def continuity_modulus(
    model: ModelSpec,
    config: SolverConfig,
    anchor: float,
    lags: Sequence[float],
    method: str = EXPONENTIAL_EULER,
    workers: int = 1,
) -> list[tuple[float, float]]:
    """Modulus (lag, estimated ||X(anchor + lag) - X(anchor)|| in the (1, p) norm).

    Only meaningful for models declared with r = 0: the prediction is plain
    continuity in the top norm s = 1, monotone decrease without any rate.
    """
    if model.r != 0.0:
        raise ValueError(f"the top-norm modulus probe requires r = 0, got r = {model.r}")
    lags = sorted(float(lag) for lag in lags)
    pairs = [(anchor, anchor + lag) for lag in lags]
    samples = increment_samples(model, config, 1.0, pairs, method=method, workers=workers)
    return [
        (lag, estimate_lp_norm(arr, model.p)[0]) for lag, arr in zip(lags, samples)
    ]

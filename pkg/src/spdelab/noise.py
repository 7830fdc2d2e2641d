"""Q-Wiener increments from a diagonal covariance spectrum, and Hilbert-Schmidt norms.

The driving noise is expanded in the operator eigenbasis: mode k carries an
independent scalar Brownian motion with variance rate q_k.  Sampling is
counter-addressed: the draw block for (master seed, path, step) is a pure
function of those three indices, so results never depend on scheduling order
and coincide across truncation dimensions (a run with more modes reads more of
the same per-step block).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .spectrum import SpectralOperator, _frozen_array


@dataclass(frozen=True)
class CovarianceSpectrum:
    """Diagonal spectrum q_k >= 0 of the noise covariance operator."""

    variances: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.variances)
        if arr.size == 0:
            raise ValueError("covariance spectrum needs at least one mode")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
            raise ValueError("variances must be finite and nonnegative")
        object.__setattr__(self, "variances", arr)

    @property
    def dimension(self) -> int:
        return int(self.variances.size)


@dataclass(frozen=True)
class DiagonalHSOperator:
    """Operator acting as multiplication by phi_k on eigenmode k."""

    multipliers: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.multipliers)
        if not np.all(np.isfinite(arr)):
            raise ValueError("multipliers must be finite")
        object.__setattr__(self, "multipliers", arr)

    @property
    def dimension(self) -> int:
        return int(self.multipliers.size)


@dataclass(frozen=True)
class NoiseIncrement:
    """Eigenmode increments of the Wiener process over one step of length h."""

    values: np.ndarray
    step: float

    def __post_init__(self):
        arr = _frozen_array(self.values)
        if self.step <= 0.0:
            raise ValueError(f"step must be positive, got {self.step}")
        object.__setattr__(self, "values", arr)

    @property
    def dimension(self) -> int:
        return int(self.values.size)


class NoiseStream:
    """Per-path Gaussian stream addressed by (master seed, path index, step index).

    Each step owns a disjoint counter segment of a Philox generator keyed by
    (master seed, path index); ``step_normals(j, n)`` returns the first n
    standard normals of segment j.  Two streams built from the same indices
    produce bitwise-identical output.
    """

    def __init__(self, master_seed: int, path_index: int = 0):
        self.master_seed = int(master_seed)
        self.path_index = int(path_index)
        if self.path_index < 0:
            raise ValueError(f"path index must be >= 0, got {path_index}")
        key = SeedSequence(self.master_seed, spawn_key=(self.path_index,)).generate_state(
            2, dtype=np.uint64
        )
        self._bitgen = Philox(key=key)
        self._gen = Generator(self._bitgen)
        self._state = self._bitgen.state
        self._counter = self._state["state"]["counter"]

    def step_normals(self, step_index: int, count: int) -> np.ndarray:
        """First `count` standard normal draws of the segment for `step_index`."""
        if step_index < 0:
            raise ValueError(f"step index must be >= 0, got {step_index}")
        self._counter[:] = 0
        self._counter[2] = step_index
        self._state["buffer_pos"] = 4
        self._state["has_uint32"] = 0
        self._state["uinteger"] = 0
        self._bitgen.state = self._state
        return self._gen.standard_normal(count)


def example_covariance(n_modes: int) -> CovarianceSpectrum:
    """Borderline trace-class spectrum q_1 = 0, q_k = 1/(k ln(k)^2) for k >= 2.

    The trace converges, but weighting by lam_k^r = (k pi)^{2r} diverges for
    every r > 0, which makes this the standard sharpness example.
    """
    if n_modes < 1:
        raise ValueError(f"truncation dimension must be >= 1, got {n_modes}")
    q = np.zeros(n_modes)
    if n_modes >= 2:
        k = np.arange(2, n_modes + 1, dtype=float)
        q[1:] = 1.0 / (k * np.log(k) ** 2)
    return CovarianceSpectrum(q)


def sample_increment(
    cov: CovarianceSpectrum, h: float, stream: NoiseStream, step_index: int = 0
) -> NoiseIncrement:
    """Draw the step increment: mode k is N(0, q_k h), independent across modes."""
    if h <= 0.0:
        raise ValueError(f"step must be positive, got {h}")
    z = stream.step_normals(step_index, cov.dimension)
    return NoiseIncrement(np.sqrt(cov.variances * h) * z, h)


def hs_norm_L20(cov: CovarianceSpectrum, phi: DiagonalHSOperator) -> float:
    """Hilbert-Schmidt norm of a diagonal operator against the noise space basis.

    With psi_k = sqrt(q_k) e_k orthonormal in the Cameron-Martin space, the
    squared norm is sum_k q_k phi_k^2; modes with q_k = 0 contribute nothing.
    """
    if cov.dimension != phi.dimension:
        raise ValueError(
            f"dimension mismatch: covariance has {cov.dimension} modes, "
            f"operator has {phi.dimension}"
        )
    return float(np.sqrt(np.sum(cov.variances * phi.multipliers**2)))


def hs_norm_L2r(
    op: SpectralOperator, cov: CovarianceSpectrum, phi: DiagonalHSOperator, r: float
) -> float:
    """Smoothness-weighted Hilbert-Schmidt norm sqrt(sum_k lam_k^r q_k phi_k^2)."""
    if not (op.dimension == cov.dimension == phi.dimension):
        raise ValueError(
            f"dimension mismatch: operator {op.dimension}, covariance "
            f"{cov.dimension}, multiplier {phi.dimension}"
        )
    return float(np.sqrt(np.sum(op.eigenvalues**r * cov.variances * phi.multipliers**2)))


def burkholder_constant(p: float) -> float:
    """Moment-inequality constant C(p) = (p(p-1)/2)^{p/2} (p/(p-1))^{p(p/2-1)} for p >= 2."""
    p = float(p)
    if p < 2.0:
        raise ValueError(f"moment order must be >= 2, got {p}")
    return (0.5 * p * (p - 1.0)) ** (0.5 * p) * (p / (p - 1.0)) ** (p * (0.5 * p - 1.0))

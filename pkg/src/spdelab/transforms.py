"""Dense sine-basis transforms between eigenmode coefficients and grid values.

Synthesis evaluates u(y_j) = sum_k x_k sqrt(2) sin(k pi y_j) on the interior
grid y_j = j/M, j = 1..M-1; analysis applies the matching trapezoid quadrature
of the basis inner products.  With grid size M >= 2N the discrete orthogonality
is exact, so analysis inverts synthesis on band-limited data.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .spectrum import SpectralCoeffs


@lru_cache(maxsize=16)
def sine_basis_matrix(n_modes: int, grid_size: int) -> np.ndarray:
    """Matrix S[k-1, j-1] = sqrt(2) sin(k pi j / M), shape (n_modes, M-1)."""
    if n_modes < 1:
        raise ValueError(f"need at least one mode, got {n_modes}")
    if grid_size < 2 * n_modes:
        raise ValueError(
            f"grid size must be >= 2 * n_modes to avoid aliasing, "
            f"got M={grid_size} for N={n_modes}"
        )
    k = np.arange(1, n_modes + 1)[:, None]
    j = np.arange(1, grid_size)[None, :]
    mat = np.sqrt(2.0) * np.sin(k * np.pi * j / grid_size)
    mat.setflags(write=False)
    return mat


def synthesize(coeff_rows: np.ndarray, grid_size: int) -> np.ndarray:
    """Grid values of the functions whose coefficient rows are given."""
    coeff_rows = np.atleast_2d(coeff_rows)
    basis = sine_basis_matrix(coeff_rows.shape[1], grid_size)
    return coeff_rows @ basis


def analyze(value_rows: np.ndarray, n_modes: int) -> np.ndarray:
    """Coefficient rows recovered by trapezoid quadrature against the basis."""
    value_rows = np.atleast_2d(value_rows)
    grid_size = value_rows.shape[1] + 1
    basis = sine_basis_matrix(n_modes, grid_size)
    return value_rows @ basis.T / grid_size


def sine_transform_forward(x: SpectralCoeffs, grid_size: int) -> np.ndarray:
    """Values of the expansion of x on the interior grid j/M, j = 1..M-1."""
    return synthesize(x.values, grid_size)[0]


def sine_transform_inverse(values: np.ndarray, n_modes: int) -> SpectralCoeffs:
    """Coefficients of the grid function; inverts the forward transform for M >= 2N."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValueError(f"expected a one-dimensional grid, got shape {values.shape}")
    return SpectralCoeffs(analyze(values, n_modes)[0])

"""Gaussian kernel density estimation for Monte Carlo estimate distributions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KDE_GRID_SIZE = 512
_EVAL_CHUNK = 256  # grid points per vectorized block; caps the n x grid buffer


class DegenerateSampleError(ValueError):
    """All sample values identical; no bandwidth exists."""


@dataclass(frozen=True)
class KdeEstimate:
    """Density evaluated on a fixed grid; integrates to 1 by trapezoid rule."""

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def __post_init__(self):
        if self.grid.shape != self.density.shape:
            raise ValueError("grid and density shapes differ")
        if not self.bandwidth > 0.0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if (self.density < 0.0).any():
            raise ValueError("density must be nonnegative")

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))

    def at(self, x: float) -> float:
        """Linear interpolation on the grid (0 outside it)."""
        return float(np.interp(x, self.grid, self.density, left=0.0, right=0.0))


def silverman_bandwidth(values: np.ndarray) -> float:
    """0.9 * min(sd, IQR/1.34) * n^(-1/5), with sd alone when the IQR is zero.

    The IQR fallback keeps the bandwidth positive for small or tie-heavy
    samples that still have spread; fully degenerate samples are an error.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.min() == values.max():
        # sd can come out ~1e-16 instead of 0 for constant samples (the mean
        # rounds off by an ulp), so test degeneracy on the range, not the sd
        raise DegenerateSampleError("all values identical")
    sd = float(np.std(values, ddof=1))
    q75, q25 = np.percentile(values, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = sd if iqr == 0.0 else min(sd, iqr / 1.34)
    return 0.9 * spread * len(values) ** (-0.2)


def kde(values, bandwidth: float | None = None) -> KdeEstimate:
    """Gaussian-kernel density on 512 equally spaced points spanning the
    data range plus 3 bandwidths each side.

    The grid truncates a small amount of kernel mass for tiny samples, so
    the evaluated density is renormalized to integrate to exactly 1 over
    the grid (trapezoid rule).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise ValueError(f"need >= 2 values, got {values.size}")
    if not np.isfinite(values).all():
        raise ValueError("values must be finite")
    if bandwidth is None:
        bandwidth = silverman_bandwidth(values)
    elif not bandwidth > 0.0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")
    if values.min() == values.max():
        raise DegenerateSampleError("all values identical")

    grid = np.linspace(values.min() - 3.0 * bandwidth, values.max() + 3.0 * bandwidth, KDE_GRID_SIZE)
    norm = 1.0 / (values.size * bandwidth * np.sqrt(2.0 * np.pi))
    density = np.empty(KDE_GRID_SIZE)
    for start in range(0, KDE_GRID_SIZE, _EVAL_CHUNK):
        block = grid[start : start + _EVAL_CHUNK]
        z = (block[:, None] - values[None, :]) / bandwidth
        density[start : start + block.size] = norm * np.exp(-0.5 * z * z).sum(axis=1)

    density /= np.trapezoid(density, grid)
    return KdeEstimate(grid=grid, density=density, bandwidth=float(bandwidth))

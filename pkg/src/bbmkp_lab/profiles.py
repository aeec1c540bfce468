"""Initial-data building blocks: 1D limit profiles and 2D transverse perturbations.

Every localized profile accepts an optional ``period``.  Without it the
profile is centred periodically at ``x0`` on the whole box and must decay
before reaching the boundary.  With it the profile is replaced by the sum of
its translates by multiples of ``period``, so its x-spectrum only contains
multiples of ``2 pi / period``; the box length must be a multiple of it.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .bbm import periodic_offset, solitary_shape, solitary_wave
from .spectral import Field1D, Field2D, Grid1D, Grid2D

# images on each side are summed until the shape has decayed by ~e^{-40}
_DECAY_WIDTHS = 40.0


def _sech(z):
    return 1.0 / np.cosh(z)


def periodize(
    shape: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    x0: float,
    box: float,
    width: float,
    period: float | None = None,
) -> np.ndarray:
    """Evaluate ``shape(x - x0)`` either wrapped once on the box or summed over images."""
    if period is None:
        return shape(periodic_offset(x, x0, box))
    ratio = box / period
    if period <= 0 or abs(ratio - round(ratio)) > 1e-9:
        raise ValueError(f"period {period} must divide the box length {box}")
    d = periodic_offset(x, x0, period)
    m = math.ceil(_DECAY_WIDTHS * width / period) + 1
    out = np.zeros_like(d)
    for j in range(-m, m + 1):
        out += shape(d + j * period)
    return out


# ------------------------------------------------------------------ 1D


def zero_1d(grid: Grid1D) -> Field1D:
    return Field1D(grid, np.zeros(grid.n))


def sech2_1d(grid: Grid1D, A: float, x0: float, width: float, period: float | None = None) -> Field1D:
    """A sech^2((x - x0) / width)."""
    v = periodize(lambda d: A * _sech(d / width) ** 2, grid.x, x0, grid.length, width, period)
    return Field1D(grid, v)


def gaussian_1d(grid: Grid1D, A: float, x0: float, width: float, period: float | None = None) -> Field1D:
    """A exp(-((x - x0) / width)^2)."""
    v = periodize(lambda d: A * np.exp(-((d / width) ** 2)), grid.x, x0, grid.length, width, period)
    return Field1D(grid, v)


def solitary_1d(grid: Grid1D, c: float, x0: float, period: float | None = None) -> Field1D:
    if period is None:
        return solitary_wave(grid, c, x0)
    amp, kappa = solitary_shape(c)
    v = periodize(lambda d: amp * _sech(kappa * d) ** 2, grid.x, x0, grid.length, 1.0 / kappa, period)
    return Field1D(grid, v)


# ------------------------------------------------------------------ 2D


def _transverse(grid: Grid2D, sigma: float, y0: float) -> np.ndarray:
    return _sech(sigma * periodic_offset(grid.y, y0, grid.Ly))


def zero_2d(grid: Grid2D) -> Field2D:
    return Field2D(grid, np.zeros(grid.shape))


def sech_derivative_2d(
    grid: Grid2D,
    eps: float,
    sigma: float,
    x0: float,
    width: float,
    period: float | None = None,
    y0: float = 0.0,
) -> Field2D:
    """eps g(x) sech(sigma (y - y0)) with g = d/dx sech((x - x0) / width), which has zero mean."""

    def g(d):
        z = d / width
        return -_sech(z) * np.tanh(z) / width

    gx = periodize(g, grid.x, x0, grid.Lx, width, period)
    return Field2D(grid, eps * gx[:, None] * _transverse(grid, sigma, y0)[None, :])


def wave_packet_2d(
    grid: Grid2D,
    eps: float,
    sigma: float,
    x0: float,
    width: float,
    k0: float,
    y0: float = 0.0,
) -> Field2D:
    """eps sin(k0 (x - x0)) exp(-((x - x0)/width)^2) sech(sigma (y - y0)); mean only approximately zero."""
    d = periodic_offset(grid.x, x0, grid.Lx)
    gx = np.sin(k0 * d) * np.exp(-((d / width) ** 2))
    return Field2D(grid, eps * gx[:, None] * _transverse(grid, sigma, y0)[None, :])


def sech_y_2d(grid: Grid2D, eps: float, sigma: float, y0: float = 0.0) -> Field2D:
    """eps sech(sigma (y - y0)), constant in x.  Violates the zero x-mean gauge."""
    return Field2D(grid, eps * np.broadcast_to(_transverse(grid, sigma, y0)[None, :], grid.shape))


def blend(phi: Field1D, pert: Field2D) -> Field2D:
    """psi(x, y) = phi(x) + perturbation(x, y)."""
    if not pert.grid.compatible_with(phi.grid):
        from .errors import GridMismatch

        raise GridMismatch("profile and perturbation grids differ")
    return Field2D(pert.grid, phi.values[:, None] + pert.values)

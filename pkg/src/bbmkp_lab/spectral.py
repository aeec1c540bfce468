"""Periodic grids, Fourier differentiation and Sobolev-type norms.

Conventions
-----------
Samples sit at ``x_j = j * dx`` on ``[0, L)`` and, in 2D, at
``y_m = -Ly/2 + m * dy`` so that ``y = 0`` is a grid row.  Arrays of 2D
fields have shape ``(nx, ny)`` with x on axis 0.

Spectral coefficients are normalised so that ``f(x_j) = sum_k c_k exp(i xi_k x_j)``,
i.e. ``c = fft(f) / n``.  With that choice the quadrature L2 norm
``sqrt(dx * sum f_j^2)`` equals ``sqrt(L * sum |c_k|^2)`` (discrete Parseval),
and every weighted norm below is the corresponding weighted sum times the box
size.  Norms therefore read directly as approximations of the integrals over
the line or the plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

from .errors import IndexOutOfRange, InvalidGrid, NonFiniteField, NonZeroXMean

MEAN_TOL_FACTOR = 1e-10


def _check_axis(n, length, what: str) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidGrid(f"{what}: sample count must be an integer, got {n!r}")
    if n < 8 or n % 2:
        raise InvalidGrid(f"{what}: sample count must be even and >= 8, got {n}")
    if not np.isfinite(length) or length <= 0:
        raise InvalidGrid(f"{what}: length must be positive and finite, got {length!r}")


def _wavenumbers(n: int, length: float) -> np.ndarray:
    # order 0, 1, ..., n/2 - 1, -n/2, ..., -1
    return 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)


def _rwavenumbers(n: int, length: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[0, length)``."""

    n: int
    length: float

    def __post_init__(self):
        _check_axis(self.n, self.length, "Grid1D")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return self.spacing * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return _wavenumbers(self.n, self.length)

    @cached_property
    def rwavenumbers(self) -> np.ndarray:
        """Non-negative wavenumbers of the real-FFT layout (Nyquist last)."""
        return _rwavenumbers(self.n, self.length)


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid, x on ``[0, Lx)`` and y on ``[-Ly/2, Ly/2)``."""

    nx: int
    ny: int
    Lx: float
    Ly: float

    def __post_init__(self):
        _check_axis(self.nx, self.Lx, "Grid2D x")
        _check_axis(self.ny, self.Ly, "Grid2D y")
        for name in ("nx", "ny"):
            object.__setattr__(self, name, int(getattr(self, name)))
        for name in ("Lx", "Ly"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def dx(self) -> float:
        return self.Lx / self.nx

    @property
    def dy(self) -> float:
        return self.Ly / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @cached_property
    def x_grid(self) -> Grid1D:
        """The 1D grid of a single y-slice."""
        return Grid1D(self.nx, self.Lx)

    @cached_property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(self.nx)

    @cached_property
    def y(self) -> np.ndarray:
        return -0.5 * self.Ly + self.dy * np.arange(self.ny)

    @cached_property
    def xi(self) -> np.ndarray:
        return _wavenumbers(self.nx, self.Lx)

    @cached_property
    def mu(self) -> np.ndarray:
        return _wavenumbers(self.ny, self.Ly)

    @cached_property
    def rxi(self) -> np.ndarray:
        return _rwavenumbers(self.nx, self.Lx)

    # The xi = 0 column is always index 0 along axis 0 of any spectral array.
    zero_xi_index = 0

    def compatible_with(self, grid1d: Grid1D) -> bool:
        return grid1d.n == self.nx and grid1d.length == self.Lx


@dataclass(frozen=True, eq=False)
class Field1D:
    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"values shape {v.shape} does not match grid ({self.grid.n},)")
        if not np.all(np.isfinite(v)):
            raise NonFiniteField("Field1D contains NaN or Inf")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def spectrum(self) -> np.ndarray:
        """Fourier coefficients ``c_k`` in standard FFT order."""
        return np.fft.fft(self.values) / self.grid.n


@dataclass(frozen=True, eq=False)
class Field2D:
    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteField("Field2D contains NaN or Inf")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def spectrum(self) -> np.ndarray:
        """Fourier coefficients ``c[j, m]`` over (xi_j, mu_m); conjugate symmetric."""
        return np.fft.fft2(self.values) / (self.grid.nx * self.grid.ny)

    def slice(self, y_index: int) -> Field1D:
        _check_row(self.grid, y_index)
        return Field1D(self.grid.x_grid, self.values[:, y_index])


Field = Union[Field1D, Field2D]


def make_grid_1d(n: int, L: float) -> Grid1D:
    return Grid1D(n, L)


def make_grid_2d(nx: int, ny: int, Lx: float, Ly: float) -> Grid2D:
    return Grid2D(nx, ny, Lx, Ly)


def _check_row(grid: Grid2D, y_index) -> int:
    if isinstance(y_index, bool) or not isinstance(y_index, (int, np.integer)):
        raise IndexOutOfRange(f"y-index must be an integer, got {y_index!r}")
    if not 0 <= y_index < grid.ny:
        raise IndexOutOfRange(f"y-index {y_index} outside [0, {grid.ny})")
    return int(y_index)


def _x_len(f: Field) -> tuple[int, float]:
    if isinstance(f, Field1D):
        return f.grid.n, f.grid.length
    return f.grid.nx, f.grid.Lx


def _rebuild(f: Field, values: np.ndarray) -> Field:
    return type(f)(f.grid, values)


def _x_multiplier(n: int, length: float, order: int) -> np.ndarray:
    xi = _rwavenumbers(n, length)
    mult = (1j * xi) ** order
    if order % 2:
        mult[-1] = 0.0  # Nyquist has no sign for odd symbols
    return mult


def _apply_x_symbol(values: np.ndarray, n: int, symbol: np.ndarray) -> np.ndarray:
    coeffs = np.fft.rfft(values, axis=0)
    if values.ndim == 2:
        symbol = symbol[:, None]
    return np.fft.irfft(symbol * coeffs, n=n, axis=0)


def deriv_x(f: Field, order: int = 1) -> Field:
    """Spectral x-derivative of the given order (multiplication by (i xi)^order)."""
    if order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    n, length = _x_len(f)
    return _rebuild(f, _apply_x_symbol(f.values, n, _x_multiplier(n, length, order)))


def deriv_y(f: Field2D, order: int = 1) -> Field2D:
    """Spectral y-derivative of a 2D field."""
    if order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    g = f.grid
    mu = _rwavenumbers(g.ny, g.Ly)
    mult = (1j * mu) ** order
    if order % 2:
        mult[-1] = 0.0
    coeffs = np.fft.rfft(f.values, axis=1)
    return Field2D(g, np.fft.irfft(mult[None, :] * coeffs, n=g.ny, axis=1))


def default_mean_tol(values: np.ndarray) -> float:
    return MEAN_TOL_FACTOR * max(1.0, float(np.max(np.abs(values), initial=0.0)))


def x_means(f: Field) -> np.ndarray:
    """x-mean of the field (scalar array in 1D, one entry per y-row in 2D)."""
    return np.asarray(f.values.mean(axis=0))


def check_zero_x_mean(f: Field, mean_tol: float | None = None) -> None:
    """Raise NonZeroXMean unless every slice has x-mean within tolerance."""
    tol = default_mean_tol(f.values) if mean_tol is None else mean_tol
    means = x_means(f)
    if means.ndim == 0:
        if abs(means) > tol:
            raise NonZeroXMean(None, float(means), tol)
        return
    worst = int(np.argmax(np.abs(means)))
    if abs(means[worst]) > tol:
        raise NonZeroXMean(worst, float(means[worst]), tol)


def antideriv_x(f: Field, mean_tol: float | None = None) -> Field:
    """Zero-mean antiderivative in x, i.e. division by ``i xi`` for ``xi != 0``.

    Only defined when each slice integrates to zero in x; otherwise
    :class:`NonZeroXMean` is raised.  The result has zero x-mean and a zeroed
    Nyquist coefficient.
    """
    check_zero_x_mean(f, mean_tol)
    n, length = _x_len(f)
    xi = _rwavenumbers(n, length)
    inv = np.zeros(xi.shape, dtype=complex)
    inv[1:-1] = 1.0 / (1j * xi[1:-1])
    return _rebuild(f, _apply_x_symbol(f.values, n, inv))


def dealias_mask(n: int, size: int | None = None) -> np.ndarray:
    """Boolean keep-mask of the two-thirds rule along one axis.

    ``size`` is the number of stored coefficients: ``n`` for the full FFT
    layout, ``n // 2 + 1`` for the real-FFT layout.
    """
    if size is None:
        size = n
    if size == n:
        j = np.abs(np.fft.fftfreq(n) * n)
    elif size == n // 2 + 1:
        j = np.arange(size, dtype=float)
    else:
        raise ValueError(f"{size} coefficients do not fit a grid of {n} points")
    return j <= n / 3.0


def dealias(coeffs: np.ndarray, grid: Grid1D | Grid2D) -> np.ndarray:
    """Zero the coefficients with |j| > n/3 on every axis (two-thirds rule).

    Accepts full-FFT arrays or real-FFT-in-x arrays; returns a new array.
    """
    c = np.asarray(coeffs)
    if isinstance(grid, Grid1D):
        if c.ndim != 1:
            raise ValueError("1D grid needs a 1D coefficient array")
        return np.where(dealias_mask(grid.n, c.shape[0]), c, 0)
    if c.ndim != 2 or c.shape[1] != grid.ny:
        raise ValueError(f"coefficient shape {c.shape} does not fit grid {grid.shape}")
    keep = dealias_mask(grid.nx, c.shape[0])[:, None] & dealias_mask(grid.ny)[None, :]
    return np.where(keep, c, 0)


# ---------------------------------------------------------------- norms


def _x_power(values: np.ndarray, n: int) -> np.ndarray:
    """|c_k|^2 along x for every slice, full FFT order."""
    c = np.fft.fft(values, axis=0) / n
    return np.abs(c) ** 2


def hk_x_norms(f: Field2D, k: float) -> np.ndarray:
    """H^k_x norm of every y-slice, as an array over the rows."""
    g = f.grid
    weight = (1.0 + g.xi**2) ** k
    return np.sqrt(g.Lx * (weight[:, None] * _x_power(f.values, g.nx)).sum(axis=0))


def hk_x_slice_norm(f: Field2D, y_index: int, k: float) -> float:
    """Discrete H^k_x norm of the slice ``f(., y_index)``."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    j = _check_row(f.grid, y_index)
    return hk_norm_1d(f.slice(j), k)


def hk_norm_1d(f: Field1D, k: float) -> float:
    g = f.grid
    weight = (1.0 + g.wavenumbers**2) ** k
    return float(np.sqrt(g.length * np.sum(weight * _x_power(f.values, g.n))))


def l2_norm(f: Field) -> float:
    """Quadrature L2 norm (dx or dx*dy Riemann weights)."""
    if isinstance(f, Field1D):
        cell = f.grid.spacing
    else:
        cell = f.grid.dx * f.grid.dy
    return float(np.sqrt(cell * np.sum(f.values**2)))


def _power_2d(f: Field2D) -> np.ndarray:
    return np.abs(f.spectrum()) ** 2


def hs_norm_2d(f: Field2D, s: float) -> float:
    """Discrete H^s(R^2) norm with weight (1 + xi^2 + mu^2)^s."""
    if s < 0:
        raise ValueError(f"s must be non-negative, got {s}")
    g = f.grid
    weight = (1.0 + g.xi[:, None] ** 2 + g.mu[None, :] ** 2) ** s
    return float(np.sqrt(g.Lx * g.Ly * np.sum(weight * _power_2d(f))))


def hs_minus1_norm(f: Field2D, s: float, mean_tol: float | None = None) -> float:
    """Discrete H^s_{-1} norm, extra weight (1 + 1/|xi|)^2 on the xi != 0 modes.

    Raises NonZeroXMean when the xi = 0 column carries mass, since the weight
    is infinite there.
    """
    if s < 0:
        raise ValueError(f"s must be non-negative, got {s}")
    check_zero_x_mean(f, mean_tol)
    g = f.grid
    xi = g.xi[1:, None]
    weight = (1.0 + 1.0 / np.abs(xi)) ** 2 * (1.0 + xi**2 + g.mu[None, :] ** 2) ** s
    return float(np.sqrt(g.Lx * g.Ly * np.sum(weight * _power_2d(f)[1:, :])))


def w1_norm(f: Field2D, mean_tol: float | None = None) -> float:
    """||f|| + ||f_x|| + ||f_xx|| + ||d_x^{-1} f_y|| + ||f_y|| in L2 of the box."""
    fy = deriv_y(f, 1)
    tol = default_mean_tol(f.values) if mean_tol is None else mean_tol
    terms = (
        f,
        deriv_x(f, 1),
        deriv_x(f, 2),
        antideriv_x(fy, tol),
        fy,
    )
    return float(sum(l2_norm(t) for t in terms))

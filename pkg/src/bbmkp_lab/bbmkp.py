"""Two-dimensional BBM-KP equation

    (eta_t + eta_x + eta eta_x - eta_xxt)_x + gamma eta_yy = 0,   gamma = +-1.

Removing the outer x-derivative turns the transverse term into the nonlocal
``gamma d_x^{-1} eta_yy``; in Fourier space, for xi != 0,

    (1 + xi^2) d/dt eta_hat = -i xi (eta_hat + (eta^2)_hat / 2) - i gamma (mu^2 / xi) eta_hat.

The xi = 0 column of the right-hand side is set to exactly zero: the x-mean
of every slice is frozen (it must be independent of y for d_x^{-1} eta_yy to
exist at all).  The linear symbol is unbounded as xi -> 0 with large mu, so
time steps are checked against the RK4 stability interval on the imaginary
axis before integrating.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._fft import RealPlan
from .errors import GridMismatch, NonZeroXMean, StepTooLarge
from .spectral import Field2D, Grid2D, dealias_mask, default_mean_tol, deriv_x
from .timestep import run_rk4, step_count

# RK4 is stable on the imaginary axis up to 2*sqrt(2) ~ 2.83
STABILITY_LIMIT = 2.5
GAUGE_TOL = 1e-9


@dataclass(frozen=True)
class BBMKPConfig:
    gamma: int
    dt: float
    t_end: float
    snapshot_stride: int = 1
    dealias: bool = True

    def __post_init__(self):
        if self.gamma not in (1, -1):
            raise ValueError(f"gamma must be +1 or -1, got {self.gamma}")
        object.__setattr__(self, "gamma", int(self.gamma))
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (np.isfinite(self.t_end) and self.t_end >= self.dt):
            raise ValueError(f"t_end must be >= dt, got t_end={self.t_end}, dt={self.dt}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ValueError(f"snapshot_stride must be a positive integer, got {self.snapshot_stride}")

    @property
    def n_steps(self) -> int:
        return step_count(self.dt, self.t_end)


@dataclass(frozen=True, eq=False)
class Trajectory2D:
    times: np.ndarray
    states: tuple[Field2D, ...]
    config: BBMKPConfig | None = field(default=None, repr=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = tuple(self.states)
        if len(times) != len(states) or len(times) == 0:
            raise ValueError("times and states must be non-empty and of equal length")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise ValueError("times must start at 0 and increase strictly")
        grid = states[0].grid
        if any(s.grid != grid for s in states):
            raise GridMismatch("all states of a trajectory must share one grid")
        means0 = states[0].values.mean(axis=0)
        for i, s in enumerate(states[1:], start=1):
            drift = np.abs(s.values.mean(axis=0) - means0)
            if drift.max() > GAUGE_TOL:
                j = int(np.argmax(drift))
                raise NonZeroXMean(j, float(drift[j]), GAUGE_TOL)
        times.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def grid(self) -> Grid2D:
        return self.states[0].grid

    @property
    def gamma(self) -> int | None:
        return None if self.config is None else self.config.gamma

    @property
    def final(self) -> Field2D:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.states)


def linear_symbol(grid: Grid2D, gamma: int) -> np.ndarray:
    """Linear multiplier on the real-FFT-in-x layout, shape (nx//2+1, ny).

    Zero on the xi = 0 column (gauge) and on the x-Nyquist column (odd symbol).
    """
    xi = grid.rxi[:, None]
    mu = grid.mu[None, :]
    sym = np.zeros((xi.shape[0], grid.ny), dtype=complex)
    inner = slice(1, -1)
    xin = xi[inner]
    sym[inner] = -1j * (xin + gamma * mu**2 / xin) / (1.0 + xin**2)
    return sym


def max_linear_symbol(grid: Grid2D, gamma: int) -> float:
    """Largest |symbol| over all evolving modes; bounds the RK4 step."""
    return float(np.max(np.abs(linear_symbol(grid, gamma))))


def check_time_step(grid: Grid2D, gamma: int, dt: float, limit: float = STABILITY_LIMIT) -> None:
    m = max_linear_symbol(grid, gamma)
    if dt * m > limit:
        raise StepTooLarge(dt, m, limit)


def check_gauge(eta: Field2D, mean_tol: float | None = None) -> None:
    """Per-slice x-means must agree across y (else d_x^{-1} eta_yy is undefined)."""
    tol = default_mean_tol(eta.values) if mean_tol is None else mean_tol
    means = eta.values.mean(axis=0)
    dev = np.abs(means - means.mean())
    j = int(np.argmax(dev))
    if dev[j] > tol:
        raise NonZeroXMean(j, float(means[j] - means.mean()), tol)


class BBMKPOperator:
    """Precomputed multipliers of the spectral BBM-KP right-hand side."""

    def __init__(self, grid: Grid2D, gamma: int, dealias: bool = True):
        self.grid = grid
        self.gamma = gamma
        self.linear = linear_symbol(grid, gamma)
        xi = grid.rxi[:, None]
        nl = np.zeros_like(self.linear)
        nl[1:-1] = np.broadcast_to(-0.5j * xi[1:-1] / (1.0 + xi[1:-1] ** 2), nl[1:-1].shape)
        if dealias:
            keep = dealias_mask(grid.nx, xi.shape[0])[:, None] & dealias_mask(grid.ny)[None, :]
            nl = nl * keep
        self.nonlinear = nl
        self.plan = RealPlan(grid.shape)

    def stage(self, eh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        eta = self.plan.inverse(eh)
        q = self.plan.forward(eta * eta)
        return self.linear * eh + self.nonlinear * q, eta

    def rhs_hat(self, eh: np.ndarray) -> np.ndarray:
        return self.stage(eh)[0]

    def to_spectral(self, values: np.ndarray) -> np.ndarray:
        return np.fft.rfftn(values, axes=(1, 0))

    def to_physical(self, eh: np.ndarray) -> np.ndarray:
        return np.fft.irfftn(eh, s=(self.grid.ny, self.grid.nx), axes=(1, 0))


def bbmkp_rhs(
    eta: Field2D, gamma: int, dealias: bool = True, mean_tol: float | None = None
) -> Field2D:
    """Time derivative eta_t of the BBM-KP equation (x-mean gauge frozen)."""
    if gamma not in (1, -1):
        raise ValueError(f"gamma must be +1 or -1, got {gamma}")
    check_gauge(eta, mean_tol)
    op = BBMKPOperator(eta.grid, gamma, dealias)
    rhs = op.rhs_hat(op.to_spectral(eta.values))
    return Field2D(eta.grid, op.to_physical(rhs))


def integrate_bbmkp(psi: Field2D, cfg: BBMKPConfig, mean_tol: float | None = None) -> Trajectory2D:
    """RK4 integration of the BBM-KP initial-value problem from ``psi``."""
    check_gauge(psi, mean_tol)
    check_time_step(psi.grid, cfg.gamma, cfg.dt)
    op = BBMKPOperator(psi.grid, cfg.gamma, cfg.dealias)
    times, snaps = run_rk4(
        op.to_spectral(psi.values),
        op.stage,
        op.to_physical,
        cfg.dt,
        cfg.n_steps,
        cfg.snapshot_stride,
    )
    snaps[0] = psi.values
    states = tuple(Field2D(psi.grid, v) for v in snaps)
    return Trajectory2D(times, states, cfg)


def energy_2d(eta: Field2D) -> float:
    """int int eta^2 + eta_x^2 dx dy in quadrature form."""
    g = eta.grid
    ex = deriv_x(eta, 1).values
    return float(g.dx * g.dy * np.sum(eta.values**2 + ex**2))


def mass_2d(eta: Field2D) -> float:
    g = eta.grid
    return float(g.dx * g.dy * np.sum(eta.values))

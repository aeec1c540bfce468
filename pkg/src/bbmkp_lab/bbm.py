"""One-dimensional BBM equation  u_t + u_x + u u_x - u_xxt = 0.

Inverting ``1 - d_xx`` gives the semilinear spectral form

    d/dt u_hat = -(i xi / (1 + xi^2)) * (u_hat + (u^2)_hat / 2),

whose multiplier is bounded by 1/2, so explicit RK4 is stable for any O(1)
step.  The xi = 0 entry of the multiplier is zero, hence the mass is
conserved exactly by the discrete flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._fft import RealPlan
from .errors import GridMismatch, UnresolvedProfile
from .spectral import Field1D, Grid1D, dealias_mask, deriv_x
from .timestep import run_rk4, step_count


@dataclass(frozen=True)
class BBMConfig:
    dt: float
    t_end: float
    snapshot_stride: int = 1
    dealias: bool = True

    def __post_init__(self):
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
class Trajectory1D:
    times: np.ndarray
    states: tuple[Field1D, ...]
    config: BBMConfig | None = field(default=None, repr=False)

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
        times.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def grid(self) -> Grid1D:
        return self.states[0].grid

    @property
    def final(self) -> Field1D:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.states)

    def as_array(self) -> np.ndarray:
        return np.stack([s.values for s in self.states])


class BBMOperator:
    """Precomputed multipliers of the spectral right-hand side on one grid."""

    def __init__(self, grid: Grid1D, dealias: bool = True):
        self.grid = grid
        xi = grid.rwavenumbers
        lin = -1j * xi / (1.0 + xi**2)
        lin[-1] = 0.0  # odd symbol at Nyquist
        self.linear = lin
        keep = dealias_mask(grid.n, xi.size) if dealias else np.ones(xi.size, bool)
        self.nonlinear = 0.5 * lin * keep
        self.plan = RealPlan((grid.n,))

    def stage(self, uh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u = self.plan.inverse(uh)
        q = self.plan.forward(u * u)
        return self.linear * uh + self.nonlinear * q, u

    def rhs_hat(self, uh: np.ndarray) -> np.ndarray:
        return self.stage(uh)[0]


def bbm_rhs(u: Field1D, dealias: bool = True) -> Field1D:
    """Time derivative u_t of the BBM equation evaluated at ``u``."""
    op = BBMOperator(u.grid, dealias)
    uh = np.fft.rfft(u.values)
    return Field1D(u.grid, np.fft.irfft(op.rhs_hat(uh), n=u.grid.n))


def integrate_bbm(phi: Field1D, cfg: BBMConfig) -> Trajectory1D:
    """RK4 integration of the BBM initial-value problem from ``phi``."""
    op = BBMOperator(phi.grid, cfg.dealias)
    n = phi.grid.n
    state = np.fft.rfft(phi.values)
    times, snaps = run_rk4(
        state,
        op.stage,
        lambda uh: np.fft.irfft(uh, n=n),
        cfg.dt,
        cfg.n_steps,
        cfg.snapshot_stride,
    )
    snaps[0] = phi.values  # the t = 0 state is the initial data itself, not its FFT round trip
    states = tuple(Field1D(phi.grid, v) for v in snaps)
    return Trajectory1D(times, states, cfg)


def bbm_invariants(u: Field1D) -> tuple[float, float]:
    """(mass, energy) = (int u dx, int u^2 + u_x^2 dx) in quadrature form."""
    dx = u.grid.spacing
    ux = deriv_x(u, 1).values
    mass = float(dx * np.sum(u.values))
    energy = float(dx * np.sum(u.values**2 + ux**2))
    return mass, energy


# --------------------------------------------------------- solitary waves


def solitary_shape(c: float) -> tuple[float, float]:
    """(amplitude, inverse width) of the BBM solitary wave of speed c."""
    if not c > 1:
        raise ValueError(f"solitary waves need speed c > 1, got {c}")
    return 3.0 * (c - 1.0), 0.5 * np.sqrt((c - 1.0) / c)


def periodic_offset(x: np.ndarray, x0: float, length: float) -> np.ndarray:
    """Signed periodic distance x - x0 wrapped into [-L/2, L/2)."""
    return (x - x0 + 0.5 * length) % length - 0.5 * length


def solitary_wave(grid: Grid1D, c: float, x0: float) -> Field1D:
    """u(x) = 3(c-1) sech^2( sqrt((c-1)/c) (x - x0) / 2 ), centred periodically at x0.

    Raises UnresolvedProfile when fewer than 8 samples cover one half-width
    ``1 / kappa``.
    """
    amp, kappa = solitary_shape(c)
    points = (1.0 / kappa) / grid.spacing
    if points < 8:
        raise UnresolvedProfile(
            f"solitary wave c={c} has {points:.2f} points per half-width, need >= 8"
        )
    d = periodic_offset(grid.x, x0, grid.length)
    return Field1D(grid, amp / np.cosh(kappa * d) ** 2)


def solitary_residual(u: Field1D, c: float) -> float:
    """Max residual of the travelling-wave ODE (1 - c) u' + u u' + c u''' = 0.

    Substituting u(x - ct) into the BBM equation gives exactly this ODE, so a
    correct profile drives it to round-off.
    """
    u1 = deriv_x(u, 1).values
    u3 = deriv_x(u, 3).values
    res = (1.0 - c) * u1 + u.values * u1 + c * u3
    return float(np.max(np.abs(res)))

"""Classical fourth-order Runge-Kutta driver for spectral states."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import BlowUp

BLOWUP_THRESHOLD = 1e12

# stage(state) -> (d state / dt, physical values of ``state``)
Stage = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def step_count(dt: float, t_end: float) -> int:
    """Number of steps so that the final time n*dt lies within dt/2 of t_end."""
    return max(1, int(round(t_end / dt)))


def _guard(phys: np.ndarray, step: int, dt: float) -> None:
    m = float(np.max(np.abs(phys)))
    if not np.isfinite(m) or m > BLOWUP_THRESHOLD:
        raise BlowUp(step, step * dt, m)


def run_rk4(
    state: np.ndarray,
    stage: Stage,
    to_physical: Callable[[np.ndarray], np.ndarray],
    dt: float,
    n_steps: int,
    stride: int,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Advance ``state`` by ``n_steps`` RK4 steps of size ``dt``.

    Snapshots (physical values) are taken every ``stride`` steps, starting
    with the initial state, and the final state is always recorded.  The
    physical field returned by the first stage of each step doubles as the
    snapshot and the blow-up probe, so snapshots cost no extra transform.
    """
    y = np.array(state, copy=True)
    times: list[float] = []
    snaps: list[np.ndarray] = []
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(n_steps):
        k1, phys = stage(y)
        _guard(phys, step, dt)
        if step % stride == 0:
            times.append(step * dt)
            snaps.append(np.array(phys, copy=True))
        k2, _ = stage(y + half * k1)
        acc = k1 + 2.0 * k2
        k3, _ = stage(y + half * k2)
        acc += 2.0 * k3
        k4, _ = stage(y + dt * k3)
        acc += k4
        acc *= sixth
        y += acc
    final = np.array(to_physical(y), copy=True)
    _guard(final, n_steps, dt)
    times.append(n_steps * dt)
    snaps.append(final)
    return np.asarray(times), snaps

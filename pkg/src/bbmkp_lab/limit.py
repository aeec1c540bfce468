"""Transverse-limit analysis: BBM-KP slices against the two limiting BBM flows.

With ``P = (1 + T(y)) / 2`` and ``M = (1 - T(y)) / 2`` the comparison function is

    w = eta - (u+ + u-) / 2 - (u+ - u-) T(y) / 2 = eta - P u+ - M u-,

and when eta solves BBM-KP and u+- solve BBM it satisfies

    w_t + w_x - w_xxt + gamma d_x^{-1} eta_yy + w w_x + P (u+ w)_x + M (u- w)_x
        - P M (u+ u+_x + u- u-_x - u+ u-_x - u- u+_x) = 0.

Multiplying by w and integrating in x gives, for each fixed y,

    d/dt ||w||_{H^1_x} <= (C_eta + C_1) + (C_+ + C_-) ||w||_{H^1_x},

with C_eta = ||d_x^{-1} eta_yy||_{L^2_x}, C_+ = P ||u+||_{H^1},
C_- = M ||u-||_{H^1} and C_1 = (1 - T^2) a(||u+||, ||u-||).  The
Gronwall bound of that inequality is what :func:`gronwall_bound` evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bbm import Trajectory1D, bbm_rhs
from .bbmkp import Trajectory2D, bbmkp_rhs
from .errors import EmptyInput, GridMismatch, NegativeInput, TimeMisalignment
from .spectral import (
    Field1D,
    Field2D,
    Grid2D,
    antideriv_x,
    deriv_x,
    deriv_y,
    hk_norm_1d,
    hk_x_norms,
)

BOUND_SLACK = 0.05
TAIL_RATIO = 0.1
DEGENERATE_RATE = 1e-12
CONSTANTS_READING = "sup-in-time"


# ------------------------------------------------------ transverse profile


def _logistic_pair(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(1/(1+e^{-z}), 1/(1+e^{z})) without cancellation or overflow."""
    e = np.exp(-np.abs(z))
    big = 1.0 / (1.0 + e)
    small = e / (1.0 + e)
    return np.where(z >= 0, big, small), np.where(z >= 0, small, big)


@dataclass(frozen=True)
class TransverseProfile:
    """Interpolating profile T(y) between the y -> -inf and y -> +inf limits.

    ``"tanh"`` is plain tanh(y).  It is not periodic, so it is only used when
    both limits coincide and its coefficient vanishes.  ``"plateau"`` is
    ``tanh(y + Ly/4) - tanh(y - Ly/4) - 1``: close to +1 on the central half
    of the box and to -1 near the y-boundary, which stands in for -inf.
    """

    kind: str = "tanh"

    def __post_init__(self):
        if self.kind not in ("tanh", "plateau"):
            raise ValueError(f"unknown transverse profile {self.kind!r}")

    def values(self, grid: Grid2D) -> np.ndarray:
        y = grid.y
        if self.kind == "tanh":
            return np.tanh(y)
        q = 0.25 * grid.Ly
        return np.tanh(y + q) - np.tanh(y - q) - 1.0

    def weights(self, grid: Grid2D) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(P, M, P*M) = ((1+T)/2, (1-T)/2, (1-T^2)/4)."""
        if self.kind == "tanh":
            p, m = _logistic_pair(2.0 * grid.y)
        else:
            t = self.values(grid)
            p, m = 0.5 * (1.0 + t), 0.5 * (1.0 - t)
        return p, m, p * m

    def _distance(self, grid: Grid2D, side: int) -> np.ndarray:
        y, half = grid.y, 0.5 * grid.Ly
        if self.kind == "tanh":
            return half - y if side > 0 else y + half
        return np.abs(y) if side > 0 else half - np.abs(y)

    def tail_mask(self, grid: Grid2D, side: int) -> np.ndarray:
        """Rows that stand in for y -> +inf (side=+1) or y -> -inf (side=-1)."""
        y = grid.y
        if self.kind == "tanh":
            return y >= 0.25 * grid.Ly if side > 0 else y <= -0.25 * grid.Ly
        if side > 0:
            return np.abs(y) <= 0.125 * grid.Ly
        return np.abs(y) >= 0.375 * grid.Ly

    def edge_rows(self, grid: Grid2D, side: int, count: int = 2) -> np.ndarray:
        """Indices of the ``count`` rows deepest into the given tail."""
        return np.argsort(self._distance(grid, side), kind="stable")[:count]


def choose_profile(phi_plus: Field1D, phi_minus: Field1D) -> TransverseProfile:
    same = np.array_equal(phi_plus.values, phi_minus.values)
    return TransverseProfile("tanh" if same else "plateau")


# ------------------------------------------------------ comparison function


def _check_grids(eta: Field2D, u_plus: Field1D, u_minus: Field1D) -> None:
    for name, u in (("u_plus", u_plus), ("u_minus", u_minus)):
        if not eta.grid.compatible_with(u.grid):
            raise GridMismatch(f"{name} grid {u.grid} does not match the x-axis of {eta.grid}")


def build_w(
    eta: Field2D,
    u_plus: Field1D,
    u_minus: Field1D,
    profile: TransverseProfile | None = None,
) -> Field2D:
    """w = eta - (u+ + u-)/2 - (u+ - u-) T(y) / 2."""
    _check_grids(eta, u_plus, u_minus)
    if profile is None:
        profile = choose_profile(u_plus, u_minus)
    T = profile.values(eta.grid)
    mean = 0.5 * (u_plus.values + u_minus.values)
    jump = 0.5 * (u_plus.values - u_minus.values)
    return Field2D(eta.grid, eta.values - mean[:, None] - jump[:, None] * T[None, :])


def w_initial(
    psi: Field2D,
    phi_plus: Field1D,
    phi_minus: Field1D,
    profile: TransverseProfile | None = None,
) -> Field2D:
    """Initial comparison function; vanishes in the far field for valid data."""
    return build_w(psi, phi_plus, phi_minus, profile)


@dataclass(frozen=True, eq=False)
class ComparisonState:
    w: Field2D
    eta: Field2D
    u_plus: Field1D
    u_minus: Field1D
    t: float
    profile: TransverseProfile = field(default_factory=TransverseProfile)

    @classmethod
    def build(cls, eta, u_plus, u_minus, t, profile=None) -> "ComparisonState":
        if profile is None:
            profile = choose_profile(u_plus, u_minus)
        return cls(build_w(eta, u_plus, u_minus, profile), eta, u_plus, u_minus, float(t), profile)

    def reconstruct_eta(self) -> Field2D:
        T = self.profile.values(self.eta.grid)
        up, um = self.u_plus.values, self.u_minus.values
        blend = 0.5 * (up + um)[:, None] + 0.5 * (up - um)[:, None] * T[None, :]
        return Field2D(self.eta.grid, self.w.values + blend)


def check_alignment(traj2d: Trajectory2D, *trajs: Trajectory1D, atol: float = 1e-9) -> None:
    for tr in trajs:
        if len(tr.times) != len(traj2d.times) or not np.allclose(
            tr.times, traj2d.times, rtol=0.0, atol=atol
        ):
            raise TimeMisalignment(
                f"snapshot times differ: {len(tr.times)} vs {len(traj2d.times)} snapshots"
            )


def _snapshot(traj2d, traj_plus, traj_minus, t_index):
    check_alignment(traj2d, traj_plus, traj_minus)
    n = len(traj2d.times)
    if not -n <= t_index < n:
        raise IndexError(f"t_index {t_index} outside trajectory of {n} snapshots")
    return traj2d.states[t_index], traj_plus.states[t_index], traj_minus.states[t_index]


def transverse_term(eta: Field2D, mean_tol: float | None = None) -> Field2D:
    """d_x^{-1} eta_yy (requires per-slice x-means constant in y)."""
    return antideriv_x(deriv_y(eta, 2), mean_tol)


def w_residual(
    traj2d: Trajectory2D,
    traj_plus: Trajectory1D,
    traj_minus: Trajectory1D,
    t_index: int,
    gamma: int | None = None,
    dealias: bool | None = None,
    profile: TransverseProfile | None = None,
) -> Field2D:
    """Left-hand side of the w-equation evaluated on solver output.

    Time derivatives come from the BBM and BBM-KP right-hand sides at the
    snapshot, not from differences in time, so the residual measures how
    consistently the three solvers and the decomposition fit together.
    For gamma = -1 the transverse term reads ``- d_x^{-1} eta_yy``.
    """
    eta, up, um = _snapshot(traj2d, traj_plus, traj_minus, t_index)
    if gamma is None:
        gamma = traj2d.gamma
    if gamma is None:
        raise ValueError("gamma is required when the trajectory carries no config")
    if dealias is None:
        dealias = traj2d.config.dealias if traj2d.config is not None else True
    if profile is None:
        profile = choose_profile(traj_plus.states[0], traj_minus.states[0])
    P, M, PM = (a[None, :] for a in profile.weights(eta.grid))

    w = build_w(eta, up, um, profile)
    eta_t = bbmkp_rhs(eta, gamma, dealias).values
    up_t = bbm_rhs(up, dealias).values[:, None]
    um_t = bbm_rhs(um, dealias).values[:, None]
    w_t = Field2D(eta.grid, eta_t - P * up_t - M * um_t)

    u_p, u_m = up.values[:, None], um.values[:, None]
    upx, umx = deriv_x(up).values[:, None], deriv_x(um).values[:, None]
    wv = w.values
    wx = deriv_x(w).values
    res = (
        w_t.values
        + wx
        - deriv_x(w_t, 2).values
        + gamma * transverse_term(eta).values
        + wv * wx
        + P * deriv_x(Field2D(eta.grid, u_p * wv)).values
        + M * deriv_x(Field2D(eta.grid, u_m * wv)).values
        - PM * (u_p * upx + u_m * umx - u_p * umx - u_m * upx)
    )
    return Field2D(eta.grid, res)


# ------------------------------------------------------------ constants


@dataclass(frozen=True)
class GronwallConstants:
    c_eta: float
    c_1: float
    c_plus: float
    c_minus: float
    y: float
    t: float

    def __post_init__(self):
        for name in ("c_eta", "c_1", "c_plus", "c_minus"):
            if getattr(self, name) < 0:
                raise NegativeInput(f"{name} must be non-negative")

    @property
    def rate(self) -> float:
        return self.c_plus + self.c_minus

    @property
    def forcing(self) -> float:
        return self.c_eta + self.c_1


def aggregator(p: float | np.ndarray, q: float | np.ndarray):
    """a(p, q) = (p + q)^2 / 4.

    The forcing carries (1 - T^2)/4 times four cross terms |u^a|_inf ||u^b_x||,
    each at most ||u^a||_{H^1} ||u^b||_{H^1}; the four products sum to (p + q)^2.
    """
    return 0.25 * (p + q) ** 2


def constant_rows(
    eta: Field2D,
    u_plus: Field1D,
    u_minus: Field1D,
    profile: TransverseProfile | None = None,
) -> dict[str, np.ndarray]:
    """All four constants for every y-row at once."""
    _check_grids(eta, u_plus, u_minus)
    if profile is None:
        profile = choose_profile(u_plus, u_minus)
    P, M, PM = profile.weights(eta.grid)
    f = transverse_term(eta).values
    c_eta = np.sqrt(eta.grid.dx * np.sum(f**2, axis=0))
    p = hk_norm_1d(u_plus, 1)
    q = hk_norm_1d(u_minus, 1)
    return {
        "c_eta": c_eta,
        "c_1": 4.0 * PM * aggregator(p, q),
        "c_plus": P * p,
        "c_minus": M * q,
    }


def gronwall_constants(
    eta: Field2D,
    u_plus: Field1D,
    u_minus: Field1D,
    y_index: int,
    t: float,
    profile: TransverseProfile | None = None,
) -> GronwallConstants:
    """Constants of the differential inequality for the slice ``y_index``."""
    if isinstance(y_index, bool) or not 0 <= y_index < eta.grid.ny:
        from .errors import IndexOutOfRange

        raise IndexOutOfRange(f"y-index {y_index} outside [0, {eta.grid.ny})")
    rows = constant_rows(eta, u_plus, u_minus, profile)
    return GronwallConstants(
        c_eta=float(rows["c_eta"][y_index]),
        c_1=float(rows["c_1"][y_index]),
        c_plus=float(rows["c_plus"][y_index]),
        c_minus=float(rows["c_minus"][y_index]),
        y=float(eta.grid.y[y_index]),
        t=float(t),
    )


def gronwall_bound_array(w0, forcing, rate, t):
    """Vectorised Gronwall bound; switches to w0 + forcing * t for rate < 1e-12."""
    w0 = np.asarray(w0, dtype=float)
    forcing = np.asarray(forcing, dtype=float)
    rate = np.asarray(rate, dtype=float)
    if t < 0 or np.any(w0 < 0) or np.any(forcing < 0) or np.any(rate < 0):
        raise NegativeInput("Gronwall bound needs non-negative norms, constants and time")
    small = rate < DEGENERATE_RATE
    safe = np.where(small, 1.0, rate)
    full = w0 * np.exp(safe * t) + forcing * np.expm1(safe * t) / safe
    return np.where(small, w0 + forcing * t, full)


def gronwall_bound(w0_norm: float, consts: GronwallConstants, t: float) -> float:
    """w0 e^{(C+ + C-) t} + (C_eta + C_1)/(C+ + C-) (e^{(C+ + C-) t} - 1)."""
    return float(gronwall_bound_array(w0_norm, consts.forcing, consts.rate, t))


# ------------------------------------------------------ profiles & report


def decay_profile(
    traj2d: Trajectory2D,
    traj_plus: Trajectory1D,
    traj_minus: Trajectory1D,
    k: int,
    t_index: int,
    profile: TransverseProfile | None = None,
) -> np.ndarray:
    """||w(., y, t)||_{H^k_x} for every grid row y."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    eta, up, um = _snapshot(traj2d, traj_plus, traj_minus, t_index)
    if profile is None:
        profile = choose_profile(traj_plus.states[0], traj_minus.states[0])
    return hk_x_norms(build_w(eta, up, um, profile), k)


def tail_ratio(values: np.ndarray, mask: np.ndarray) -> float:
    top = float(np.max(values))
    if top == 0.0:
        return 0.0
    return float(np.max(values[mask])) / top


@dataclass(frozen=True, eq=False)
class LimitReport:
    """Per-(t, y) table for one Sobolev index plus the verdict."""

    k: int
    times: np.ndarray
    y: np.ndarray
    w_norm: np.ndarray
    bound: np.ndarray
    satisfied: np.ndarray
    row_ratio: np.ndarray
    constants: dict[str, np.ndarray]
    slack: float
    tail_threshold: float
    tail_ratio_plus: float
    tail_ratio_minus: float
    passed: bool
    reasons: tuple[str, ...]
    constants_reading: str = CONSTANTS_READING

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(~self.satisfied))


def verify_theorem(
    profiles: np.ndarray,
    bounds: np.ndarray,
    *,
    k: int,
    times: np.ndarray,
    grid: Grid2D,
    transverse: TransverseProfile,
    constants: dict[str, np.ndarray] | None = None,
    slack: float = BOUND_SLACK,
    tail_threshold: float = TAIL_RATIO,
) -> LimitReport:
    """Verdict: every row within the bound and both final tails below threshold.

    ``profiles`` and ``bounds`` have shape (n_times, ny).
    """
    profiles = np.asarray(profiles, dtype=float)
    bounds = np.asarray(bounds, dtype=float)
    times = np.asarray(times, dtype=float)
    if profiles.size == 0 or times.size == 0:
        raise EmptyInput("no profiles to verify")
    if profiles.shape != bounds.shape or profiles.shape != (times.size, grid.ny):
        raise ValueError(
            f"profiles {profiles.shape}, bounds {bounds.shape} and times {times.shape} disagree"
        )
    satisfied = profiles <= bounds * (1.0 + slack)
    top = profiles.max(axis=1, keepdims=True)
    row_ratio = np.divide(profiles, top, out=np.zeros_like(profiles), where=top > 0)
    final = profiles[-1]
    plus = tail_ratio(final, transverse.tail_mask(grid, +1))
    minus = tail_ratio(final, transverse.tail_mask(grid, -1))
    reasons = []
    n_bad = int(np.count_nonzero(~satisfied))
    if n_bad:
        reasons.append(f"{n_bad} (t, y) rows exceed the Gronwall bound (k={k})")
    if plus > tail_threshold:
        reasons.append(f"+y tail ratio {plus:.3g} > {tail_threshold} (k={k})")
    if minus > tail_threshold:
        reasons.append(f"-y tail ratio {minus:.3g} > {tail_threshold} (k={k})")
    return LimitReport(
        k=k,
        times=times,
        y=grid.y.copy(),
        w_norm=profiles,
        bound=bounds,
        satisfied=satisfied,
        row_ratio=row_ratio,
        constants=constants or {},
        slack=slack,
        tail_threshold=tail_threshold,
        tail_ratio_plus=plus,
        tail_ratio_minus=minus,
        passed=not reasons,
        reasons=tuple(reasons),
    )


@dataclass(frozen=True, eq=False)
class LimitAnalysis:
    reports: tuple[LimitReport, ...]
    raw_constants: dict[str, np.ndarray]
    sup_constants: dict[str, np.ndarray]
    edge_constants: dict[str, dict[str, float]]
    transverse: TransverseProfile

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


def analyze_limit(
    traj2d: Trajectory2D,
    traj_plus: Trajectory1D,
    traj_minus: Trajectory1D,
    w0: Field2D | None = None,
    ks=(1, 2),
    slack: float = BOUND_SLACK,
    tail_threshold: float = TAIL_RATIO,
    profile: TransverseProfile | None = None,
    edge_count: int = 2,
) -> LimitAnalysis:
    """Profiles, sup-in-time constants, bounds and verdicts for every k in ``ks``.

    ``w0`` is the initial comparison function built from the initial data; by
    default it is rebuilt from the first snapshots.
    """
    check_alignment(traj2d, traj_plus, traj_minus)
    if not ks:
        raise EmptyInput("no Sobolev indices requested")
    if profile is None:
        profile = choose_profile(traj_plus.states[0], traj_minus.states[0])
    grid = traj2d.grid
    times = traj2d.times
    names = ("c_eta", "c_1", "c_plus", "c_minus")
    raw = {n: np.empty((times.size, grid.ny)) for n in names}
    norms = {k: np.empty((times.size, grid.ny)) for k in ks}
    for i in range(times.size):
        eta, up, um = traj2d.states[i], traj_plus.states[i], traj_minus.states[i]
        rows = constant_rows(eta, up, um, profile)
        for n in names:
            raw[n][i] = rows[n]
        w = build_w(eta, up, um, profile)
        for k in ks:
            norms[k][i] = hk_x_norms(w, k)
    sup = {n: np.maximum.accumulate(raw[n], axis=0) for n in names}
    if w0 is None:
        w0 = build_w(traj2d.states[0], traj_plus.states[0], traj_minus.states[0], profile)

    reports = []
    forcing = sup["c_eta"] + sup["c_1"]
    rate = sup["c_plus"] + sup["c_minus"]
    for k in ks:
        w0_norm = hk_x_norms(w0, k)
        bounds = np.stack(
            [gronwall_bound_array(w0_norm, forcing[i], rate[i], t) for i, t in enumerate(times)]
        )
        reports.append(
            verify_theorem(
                norms[k],
                bounds,
                k=k,
                times=times,
                grid=grid,
                transverse=profile,
                constants=sup,
                slack=slack,
                tail_threshold=tail_threshold,
            )
        )

    edge = {}
    for side, label, own in ((+1, "plus", "c_minus"), (-1, "minus", "c_plus")):
        rows = profile.edge_rows(grid, side, edge_count)
        edge[label] = {n: float(raw[n][:, rows].max()) for n in ("c_eta", "c_1", own)}
    return LimitAnalysis(tuple(reports), raw, sup, edge, profile)

"""JSON scenario files: schema, eager validation and construction of initial data."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict, Field

from . import profiles
from .bbm import BBMConfig, solitary_shape
from .bbmkp import BBMKPConfig, check_gauge, check_time_step
from .errors import BBMKPError, NonZeroXMean, ParseError, StepTooLarge, ValidationError
from .limit import TransverseProfile, choose_profile, w_initial
from .spectral import Field1D, Field2D, Grid2D, default_mean_tol, make_grid_2d

SCHEMA = "bbmkp-lab/scenario-v1"
BOUNDARY_TOL = 1e-12
FAR_FIELD_TOL = 1e-10


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridSpec(_Strict):
    nx: int = 256
    ny: int = 128
    Lx: float = 64.0
    Ly: float = 64.0


class ZeroProfile(_Strict):
    kind: Literal["zero"]


class SolitaryProfile(_Strict):
    kind: Literal["solitary_wave"]
    c: float
    x0: float = 0.0
    period: float | None = None


class Sech2Profile(_Strict):
    kind: Literal["sech2"]
    A: float
    x0: float = 0.0
    width: float = Field(gt=0)
    period: float | None = None


class GaussianProfile(_Strict):
    kind: Literal["gaussian"]
    A: float
    x0: float = 0.0
    width: float = Field(gt=0)
    period: float | None = None


Profile1D = Annotated[
    Union[ZeroProfile, SolitaryProfile, Sech2Profile, GaussianProfile],
    Field(discriminator="kind"),
]


class ZeroPerturbation(_Strict):
    kind: Literal["zero"]


class SechDerivative(_Strict):
    kind: Literal["sech_derivative"]
    eps: float = 0.2
    sigma: float = Field(1.0, gt=0)
    x0: float = 0.0
    width: float = Field(1.0, gt=0)
    period: float | None = None
    y0: float = 0.0


class WavePacket(_Strict):
    kind: Literal["wave_packet"]
    eps: float = 0.2
    sigma: float = Field(1.0, gt=0)
    x0: float = 0.0
    width: float = Field(2.0, gt=0)
    k0: float = 2.0
    y0: float = 0.0


class SechY(_Strict):
    kind: Literal["sech_y"]
    eps: float = 1.0
    sigma: float = Field(1.0, gt=0)
    y0: float = 0.0


Perturbation = Annotated[
    Union[ZeroPerturbation, SechDerivative, WavePacket, SechY],
    Field(discriminator="kind"),
]


class StepSpec(_Strict):
    dt: float = Field(5e-4, gt=0)
    t_end: float = Field(1.0, gt=0)
    snapshot_stride: int = Field(100, ge=1)
    dealias: bool = True


class AnalysisSpec(_Strict):
    k: list[int] = [1, 2]
    slack: float = Field(0.05, ge=0)
    tail_ratio: float = Field(0.1, gt=0)
    tail_rows: int = Field(2, ge=1)
    mean_tol: float | None = None


class ScenarioModel(_Strict):
    schema_: Literal["bbmkp-lab/scenario-v1"] = Field(alias="schema")
    name: str
    grid: GridSpec = GridSpec()
    gamma: Literal[-1, 1]
    phi_plus: Profile1D
    phi_minus: Profile1D
    perturbation: Perturbation
    bbmkp: StepSpec = StepSpec()
    bbm: StepSpec | None = None
    analysis: AnalysisSpec = AnalysisSpec()


# ------------------------------------------------------------------ build


def _profile_1d(spec, grid) -> Field1D:
    g = grid.x_grid
    if spec.kind == "zero":
        return profiles.zero_1d(g)
    if spec.kind == "solitary_wave":
        return profiles.solitary_1d(g, spec.c, spec.x0, spec.period)
    if spec.kind == "sech2":
        return profiles.sech2_1d(g, spec.A, spec.x0, spec.width, spec.period)
    return profiles.gaussian_1d(g, spec.A, spec.x0, spec.width, spec.period)


def _perturbation(spec, grid) -> Field2D:
    if spec.kind == "zero":
        return profiles.zero_2d(grid)
    if spec.kind == "sech_derivative":
        return profiles.sech_derivative_2d(
            grid, spec.eps, spec.sigma, spec.x0, spec.width, spec.period, spec.y0
        )
    if spec.kind == "wave_packet":
        return profiles.wave_packet_2d(grid, spec.eps, spec.sigma, spec.x0, spec.width, spec.k0, spec.y0)
    return profiles.sech_y_2d(grid, spec.eps, spec.sigma, spec.y0)


@dataclass(frozen=True, eq=False)
class Scenario:
    """A validated scenario with its initial data already built."""

    model: ScenarioModel
    grid: Grid2D
    phi_plus: Field1D
    phi_minus: Field1D
    perturbation: Field2D
    psi: Field2D
    transverse: TransverseProfile
    bbmkp_cfg: BBMKPConfig
    bbm_cfg: BBMConfig

    @property
    def name(self) -> str:
        return self.model.name

    @property
    def gamma(self) -> int:
        return self.model.gamma

    @property
    def analysis(self) -> AnalysisSpec:
        return self.model.analysis

    def w0(self) -> Field2D:
        return w_initial(self.psi, self.phi_plus, self.phi_minus, self.transverse)

    def with_grid(self, **changes) -> "Scenario":
        data = self.model.model_dump(by_alias=True)
        data["grid"].update(changes)
        return build_scenario(ScenarioModel.model_validate(data))

    def with_steps(self, **changes) -> "Scenario":
        data = self.model.model_dump(by_alias=True)
        data["bbmkp"].update(changes)
        if data.get("bbm") is not None:
            data["bbm"].update(changes)
        return build_scenario(ScenarioModel.model_validate(data))


def _wrap(path: str, fn, *args):
    try:
        return fn(*args)
    except (ValueError, BBMKPError) as exc:
        raise ValidationError(path, str(exc)) from exc


def _check_boundary_decay(field: Field1D, spec, path: str) -> None:
    period = getattr(spec, "period", None)
    if spec.kind == "zero" or period is not None:
        return
    g = field.grid
    far = int(np.argmin(np.abs(((g.x - spec.x0) % g.length) - 0.5 * g.length)))
    if abs(field.values[far]) > BOUNDARY_TOL:
        raise ValidationError(
            path, f"profile is {abs(field.values[far]):.3g} at the x-boundary, need <= {BOUNDARY_TOL}"
        )


def _snapshot_times(dt: float, t_end: float, stride: int) -> np.ndarray:
    n = max(1, int(round(t_end / dt)))
    return np.append(np.arange(0, n, stride) * dt, n * dt)


def build_scenario(model: ScenarioModel) -> Scenario:
    gs = model.grid
    grid = _wrap("grid", make_grid_2d, gs.nx, gs.ny, gs.Lx, gs.Ly)

    for name in ("phi_plus", "phi_minus"):
        spec = getattr(model, name)
        if spec.kind == "solitary_wave":
            _wrap(f"{name}.c", solitary_shape, spec.c)
    phi_plus = _wrap("phi_plus", _profile_1d, model.phi_plus, grid)
    phi_minus = _wrap("phi_minus", _profile_1d, model.phi_minus, grid)
    _check_boundary_decay(phi_plus, model.phi_plus, "phi_plus")
    _check_boundary_decay(phi_minus, model.phi_minus, "phi_minus")

    pert = _wrap("perturbation", _perturbation, model.perturbation, grid)
    tol = model.analysis.mean_tol
    if tol is None:
        tol = default_mean_tol(pert.values)
    means = np.abs(pert.values.mean(axis=0))
    if means.max() > tol:
        j = int(np.argmax(means))
        raise ValidationError(
            "perturbation",
            f"zero-x-mean violated: slice y={grid.y[j]:.4g} has mean {means[j]:.3g} > {tol:.3g}",
        )
    edge = np.abs(pert.values[:, [0, -1]]).max()
    if edge > BOUNDARY_TOL:
        raise ValidationError(
            "perturbation", f"perturbation is {edge:.3g} at the y-boundary, need <= {BOUNDARY_TOL}"
        )

    transverse = choose_profile(phi_plus, phi_minus)
    T = transverse.values(grid)
    base = 0.5 * (phi_plus.values + phi_minus.values)[:, None] + 0.5 * (
        phi_plus.values - phi_minus.values
    )[:, None] * T[None, :]
    psi = Field2D(grid, base + pert.values)
    try:
        check_gauge(psi, tol)
    except NonZeroXMean as exc:
        raise ValidationError("phi_minus", f"phi_plus and phi_minus need equal x-means: {exc}") from exc

    w0 = w_initial(psi, phi_plus, phi_minus, transverse).values
    for side, label in ((+1, "+y"), (-1, "-y")):
        rows = transverse.edge_rows(grid, side, model.analysis.tail_rows)
        far = float(np.abs(w0[:, rows]).max())
        if far > FAR_FIELD_TOL:
            raise ValidationError(
                "perturbation", f"initial comparison function is {far:.3g} at the {label} edge"
            )

    st = model.bbmkp
    kp_cfg = _wrap("bbmkp", BBMKPConfig, model.gamma, st.dt, st.t_end, st.snapshot_stride, st.dealias)
    try:
        check_time_step(grid, model.gamma, st.dt)
    except StepTooLarge as exc:
        raise ValidationError("bbmkp.dt", str(exc)) from exc
    bt = model.bbm or st
    bbm_cfg = _wrap("bbm", BBMConfig, bt.dt, bt.t_end, bt.snapshot_stride, bt.dealias)
    t_kp = _snapshot_times(st.dt, st.t_end, st.snapshot_stride)
    t_bbm = _snapshot_times(bt.dt, bt.t_end, bt.snapshot_stride)
    if t_kp.shape != t_bbm.shape or not np.allclose(t_kp, t_bbm, rtol=0, atol=1e-9):
        raise ValidationError("bbm", "BBM and BBM-KP snapshot times are not aligned")

    return Scenario(model, grid, phi_plus, phi_minus, pert, psi, transverse, kp_cfg, bbm_cfg)


def _format_pydantic(exc: pydantic.ValidationError) -> ValidationError:
    err = exc.errors()[0]
    path = ".".join(str(p) for p in err["loc"]) or "<root>"
    return ValidationError(path, err["msg"])


def parse_scenario(data: dict) -> Scenario:
    try:
        model = ScenarioModel.model_validate(data)
    except pydantic.ValidationError as exc:
        raise _format_pydantic(exc) from exc
    return build_scenario(model)


def load_scenario(path: str | Path) -> Scenario:
    """Read, validate and build a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read scenario {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return parse_scenario(data)


def bundled(name: str) -> Path:
    """Path of a scenario shipped with the package, e.g. ``bundled("s1")``."""
    ref = resources.files("bbmkp_lab") / "scenarios" / f"{name}.json"
    return Path(str(ref))

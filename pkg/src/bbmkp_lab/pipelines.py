"""End-to-end pipelines behind the CLI: simulate, analyse, write CSV/JSON.

All writers format floats with ``repr``-exact precision and never embed
timestamps or timings, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bbm import BBMConfig, Trajectory1D, bbm_invariants, integrate_bbm
from .bbmkp import BBMKPConfig, Trajectory2D, energy_2d, integrate_bbmkp, mass_2d
from .limit import LimitAnalysis, analyze_limit
from .scenario import Scenario
from .spectral import Field1D, Field2D

MASS_TOL = 1e-10
ENERGY_TOL = 1e-6
DEGENERATE_ERROR = 1e-14


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else repr(float(v))
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _out(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --------------------------------------------------------------- simulate


@dataclass(frozen=True, eq=False)
class Simulation:
    traj_plus: Trajectory1D
    traj_minus: Trajectory1D
    traj2d: Trajectory2D


def simulate(scn: Scenario) -> Simulation:
    """Run the two limiting BBM flows and the BBM-KP flow of a scenario."""
    traj_plus = integrate_bbm(scn.phi_plus, scn.bbm_cfg)
    if scn.model.phi_minus == scn.model.phi_plus:
        traj_minus = traj_plus
    else:
        traj_minus = integrate_bbm(scn.phi_minus, scn.bbm_cfg)
    traj2d = integrate_bbmkp(scn.psi, scn.bbmkp_cfg, scn.analysis.mean_tol)
    return Simulation(traj_plus, traj_minus, traj2d)


def corrupt(traj: Trajectory1D, factor: float = 2.0) -> Trajectory1D:
    """Negative control: scale every snapshot, so it no longer solves BBM."""
    states = tuple(Field1D(s.grid, factor * s.values) for s in traj.states)
    return Trajectory1D(traj.times, states, traj.config)


def run_simulate_bbm(scn: Scenario, out_dir) -> dict:
    out = _out(out_dir)
    summary = {"scenario": scn.name, "solver": "bbm"}
    for label, phi in (("plus", scn.phi_plus), ("minus", scn.phi_minus)):
        traj = integrate_bbm(phi, scn.bbm_cfg)
        np.save(out / f"bbm_{label}_times.npy", traj.times)
        np.save(out / f"bbm_{label}_states.npy", traj.as_array())
        m0, e0 = bbm_invariants(traj.states[0])
        m1, e1 = bbm_invariants(traj.final)
        summary[label] = {
            "snapshots": len(traj),
            "t_final": float(traj.times[-1]),
            "mass_drift": abs(m1 - m0),
            "energy_rel_drift": abs(e1 - e0) / e0 if e0 > 0 else abs(e1 - e0),
            "max_abs_final": float(np.abs(traj.final.values).max()),
        }
    write_json(out / "summary.json", summary)
    return summary


def run_simulate_bbmkp(scn: Scenario, out_dir) -> dict:
    out = _out(out_dir)
    traj = integrate_bbmkp(scn.psi, scn.bbmkp_cfg, scn.analysis.mean_tol)
    np.save(out / "bbmkp_times.npy", traj.times)
    np.save(out / "bbmkp_states.npy", np.stack([s.values for s in traj.states]))
    e0, e1 = energy_2d(traj.states[0]), energy_2d(traj.final)
    summary = {
        "scenario": scn.name,
        "solver": "bbmkp",
        "gamma": scn.gamma,
        "snapshots": len(traj),
        "t_final": float(traj.times[-1]),
        "mass_drift": abs(mass_2d(traj.final) - mass_2d(traj.states[0])),
        "energy_rel_drift": abs(e1 - e0) / e0 if e0 > 0 else abs(e1 - e0),
        "max_abs_final": float(np.abs(traj.final.values).max()),
    }
    write_json(out / "summary.json", summary)
    return summary


# ----------------------------------------------------------- verify-limit


@dataclass(frozen=True, eq=False)
class VerifyResult:
    analysis: LimitAnalysis
    report: dict

    @property
    def passed(self) -> bool:
        return self.analysis.passed


def verify_limit(
    scn: Scenario,
    ks: Sequence[int] | None = None,
    slack: float | None = None,
    tail_ratio: float | None = None,
    corrupt_uplus: bool = False,
    sim: Simulation | None = None,
) -> VerifyResult:
    """Simulate (unless ``sim`` is given), analyse and assemble the JSON report."""
    an = scn.analysis
    ks = list(an.k if ks is None else ks)
    slack = an.slack if slack is None else slack
    tail_ratio = an.tail_ratio if tail_ratio is None else tail_ratio
    if sim is None:
        sim = simulate(scn)
    traj_plus = corrupt(sim.traj_plus) if corrupt_uplus else sim.traj_plus
    analysis = analyze_limit(
        sim.traj2d,
        traj_plus,
        sim.traj_minus,
        scn.w0(),
        ks=ks,
        slack=slack,
        tail_threshold=tail_ratio,
        profile=scn.transverse,
        edge_count=an.tail_rows,
    )
    report = {
        "scenario": scn.name,
        "verdict": "pass" if analysis.passed else "fail",
        "corrupt_uplus": corrupt_uplus,
        "gamma": scn.gamma,
        "grid": scn.model.grid.model_dump(),
        "transverse_profile": scn.transverse.kind,
        "constants_reading": "sup-in-time",
        "thresholds": {"slack": slack, "tail_ratio": tail_ratio},
        "edge_constants": analysis.edge_constants,
        "t_final": float(sim.traj2d.times[-1]),
        "snapshots": len(sim.traj2d),
        "k": {
            str(r.k): {
                "passed": r.passed,
                "violations": r.violations,
                "rows": int(r.satisfied.size),
                "tail_ratio_plus": r.tail_ratio_plus,
                "tail_ratio_minus": r.tail_ratio_minus,
                "max_w_norm": float(r.w_norm.max()),
                "reasons": list(r.reasons),
            }
            for r in analysis.reports
        },
    }
    return VerifyResult(analysis, report)


def write_verify_outputs(result: VerifyResult, out_dir) -> None:
    out = _out(out_dir)
    reports = result.analysis.reports
    c = result.analysis.sup_constants

    def profile_rows():
        for r in reports:
            for i, t in enumerate(r.times):
                for j, y in enumerate(r.y):
                    yield (float(t), float(y), r.k, float(r.w_norm[i, j]))

    def bound_rows():
        for r in reports:
            for i, t in enumerate(r.times):
                for j, y in enumerate(r.y):
                    yield (
                        float(t),
                        float(y),
                        r.k,
                        float(r.w_norm[i, j]),
                        float(c["c_eta"][i, j]),
                        float(c["c_1"][i, j]),
                        float(c["c_plus"][i, j]),
                        float(c["c_minus"][i, j]),
                        float(r.bound[i, j]),
                        bool(r.satisfied[i, j]),
                    )

    write_csv(out / "profile.csv", ("t", "y", "k", "w_norm"), profile_rows())
    write_csv(
        out / "bounds.csv",
        ("t", "y", "k", "w_norm", "c_eta", "c_1", "c_plus", "c_minus", "bound", "satisfied"),
        bound_rows(),
    )
    write_json(out / "report.json", result.report)


def run_verify_limit(scn: Scenario, out_dir, **kwargs) -> VerifyResult:
    result = verify_limit(scn, **kwargs)
    write_verify_outputs(result, out_dir)
    return result


# ------------------------------------------------------------ convergence


ORDER_HEADER = ("study", "solver", "param", "value", "error", "order", "status")


def _orders(values: Sequence[float], finals: Sequence[np.ndarray], study: str, solver: str, param: str):
    """Self-convergence rows: error_i = |u_i - u_{i+1}|_inf, order from consecutive errors."""
    scale = max(1.0, max(float(np.abs(f).max()) for f in finals))
    errors = [float(np.abs(a - b).max()) for a, b in zip(finals[:-1], finals[1:])]
    rows = []
    for i, err in enumerate(errors):
        order = float("nan")
        status = "ok"
        if err <= DEGENERATE_ERROR * scale:
            status = "degenerate"
        elif i > 0 and errors[i - 1] > DEGENERATE_ERROR * scale:
            ratio = values[i - 1] / values[i]
            if study == "resolution":
                ratio = values[i] / values[i - 1]
            order = math.log(errors[i - 1] / err) / math.log(ratio)
        rows.append((study, solver, param, values[i], err, order, status))
    return rows


def dt_study_bbm(phi: Field1D, dts: Sequence[float], t_end: float, dealias: bool = True):
    finals = [integrate_bbm(phi, BBMConfig(dt, t_end, 10**9, dealias)).final.values for dt in dts]
    return _orders(list(dts), finals, "dt", "bbm", "dt")


def dt_study_bbmkp(psi: Field2D, gamma: int, dts: Sequence[float], t_end: float, dealias: bool = True):
    finals = [
        integrate_bbmkp(psi, BBMKPConfig(gamma, dt, t_end, 10**9, dealias)).final.values for dt in dts
    ]
    return _orders(list(dts), finals, "dt", "bbmkp", "dt")


def _restrict(values: np.ndarray, nx_fine: int, nx: int) -> np.ndarray:
    step = nx_fine // nx
    return values[::step]


def resolution_study(scn: Scenario, ns: Sequence[int], t_end: float | None = None):
    """x-resolution self-convergence; every n must divide the largest one."""
    ns = sorted(ns)
    top = ns[-1]
    if any(top % n for n in ns):
        raise ValueError(f"every resolution must divide the finest one, got {ns}")
    bbm_f, kp_f = [], []
    for n in ns:
        s = scn.with_grid(nx=n)
        bcfg = BBMConfig(s.bbm_cfg.dt, t_end or s.bbm_cfg.t_end, 10**9, s.bbm_cfg.dealias)
        kcfg = BBMKPConfig(s.gamma, s.bbmkp_cfg.dt, t_end or s.bbmkp_cfg.t_end, 10**9, s.bbmkp_cfg.dealias)
        bbm_f.append(integrate_bbm(s.phi_plus, bcfg).final.values)
        kp_f.append(integrate_bbmkp(s.psi, kcfg).final.values)
    # compare every run on the coarsest grid points
    n0 = ns[0]
    bbm_f = [_restrict(v, n, n0) for v, n in zip(bbm_f, ns)]
    kp_f = [_restrict(v, n, n0) for v, n in zip(kp_f, ns)]
    rows = _orders(ns, bbm_f, "resolution", "bbm", "nx") + _orders(ns, kp_f, "resolution", "bbmkp", "nx")
    return rows


def run_convergence_study(
    scn: Scenario,
    out_dir,
    dts: Sequence[float] | None = None,
    ns: Sequence[int] | None = None,
    t_end: float | None = None,
) -> list[tuple]:
    """Write orders.csv for a dt-halving study and, if ``ns`` is given, an nx study."""
    dt = scn.bbmkp_cfg.dt
    dts = list(dts) if dts else [dt, dt / 2, dt / 4]
    horizon = t_end or scn.bbmkp_cfg.t_end
    rows = dt_study_bbm(scn.phi_plus, dts, horizon, scn.bbm_cfg.dealias)
    rows += dt_study_bbmkp(scn.psi, scn.gamma, dts, horizon, scn.bbmkp_cfg.dealias)
    if ns:
        rows += resolution_study(scn, ns, t_end)
    write_csv(_out(out_dir) / "orders.csv", ORDER_HEADER, rows)
    return rows


# ----------------------------------------------------------- energy audit


INVARIANT_HEADER = ("t", "solver", "mass", "energy", "mass_drift", "energy_rel_drift")


def invariant_rows(sim: Simulation) -> list[tuple]:
    rows = []
    series = [("bbm_plus", sim.traj_plus, bbm_invariants)]
    if sim.traj_minus is not sim.traj_plus:
        series.append(("bbm_minus", sim.traj_minus, bbm_invariants))
    series.append(("bbmkp", sim.traj2d, lambda f: (mass_2d(f), energy_2d(f))))
    for label, traj, fn in series:
        m0, e0 = fn(traj.states[0])
        for t, s in zip(traj.times, traj.states):
            m, e = fn(s)
            rel = abs(e - e0) / e0 if e0 > 0 else abs(e - e0)
            rows.append((float(t), label, m, e, abs(m - m0), rel))
    return rows


def run_energy_audit(scn: Scenario, out_dir, dealias: bool | None = None) -> dict:
    """Write invariants.csv; return the worst drifts per solver."""
    if dealias is not None:
        scn = scn.with_steps(dealias=dealias)
    rows = invariant_rows(simulate(scn))
    write_csv(_out(out_dir) / "invariants.csv", INVARIANT_HEADER, rows)
    summary: dict[str, dict[str, float]] = {}
    for _, label, _, _, dm, de in rows:
        s = summary.setdefault(label, {"mass_drift": 0.0, "energy_rel_drift": 0.0})
        s["mass_drift"] = max(s["mass_drift"], dm)
        s["energy_rel_drift"] = max(s["energy_rel_drift"], de)
    return summary


def audit_passed(summary: dict) -> bool:
    ok = all(s["energy_rel_drift"] <= ENERGY_TOL for s in summary.values())
    bbm = [s for k, s in summary.items() if k.startswith("bbm_")]
    return ok and all(s["mass_drift"] <= MASS_TOL for s in bbm)

import copy
import json

import numpy as np
import pytest

from bbmkp_lab import pipelines
from bbmkp_lab.cli import main
from bbmkp_lab.errors import ParseError, ValidationError
from bbmkp_lab.scenario import bundled, load_scenario, parse_scenario

SMALL = {
    "schema": "bbmkp-lab/scenario-v1",
    "name": "small",
    "grid": {"nx": 128, "ny": 384, "Lx": 32.0, "Ly": 56.0},
    "gamma": -1,
    "phi_plus": {"kind": "sech2", "A": 1.0, "x0": 16.0, "width": 1.5, "period": 8.0},
    "phi_minus": {"kind": "sech2", "A": 1.0, "x0": 16.0, "width": 1.5, "period": 8.0},
    "perturbation": {"kind": "sech_derivative", "eps": 0.2, "sigma": 1.0, "x0": 16.0, "width": 1.5, "period": 8.0},
    "bbmkp": {"dt": 1e-3, "t_end": 0.2, "snapshot_stride": 20},
}


def variant(**changes):
    d = copy.deepcopy(SMALL)
    for key, value in changes.items():
        d[key] = value
    return d


def write(tmp_path, data, name="scn.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


class TestLoad:
    def test_bundled_s1(self):
        s = load_scenario(bundled("s1"))
        assert s.name == "s1" and s.gamma == -1
        assert s.transverse.kind == "tanh"
        np.testing.assert_allclose(s.w0().values, s.perturbation.values, atol=1e-15)

    @pytest.mark.parametrize("name", ["zero", "s1_decaying"])
    def test_other_bundled(self, name):
        assert load_scenario(bundled(name)).name == name

    def test_defaults(self):
        d = variant()
        del d["grid"]
        d["phi_plus"] = d["phi_minus"] = {"kind": "sech2", "A": 1.0, "x0": 32.0, "width": 1.5}
        d["perturbation"] = {"kind": "sech_derivative", "x0": 32.0, "width": 1.5}
        d["bbmkp"] = {"dt": 5e-4}
        s = parse_scenario(d)
        assert (s.grid.nx, s.grid.ny, s.grid.Lx, s.grid.Ly) == (256, 128, 64.0, 64.0)
        assert s.bbmkp_cfg.t_end == 1.0
        assert s.analysis.k == [1, 2] and s.analysis.slack == 0.05

    def test_malformed(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ParseError):
            load_scenario(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_scenario(tmp_path / "none.json")

    def test_unknown_key(self):
        d = variant(extra_threshold=1.0)
        with pytest.raises(ValidationError) as info:
            parse_scenario(d)
        assert info.value.path == "extra_threshold"

    def test_schema_version(self):
        d = variant(schema="bbmkp-lab/scenario-v0")
        with pytest.raises(ValidationError):
            parse_scenario(d)

    def test_constant_in_x_perturbation(self):
        d = variant(perturbation={"kind": "sech_y", "eps": 1.0, "sigma": 1.0})
        with pytest.raises(ValidationError) as info:
            parse_scenario(d)
        assert info.value.path == "perturbation" and "zero-x-mean" in str(info.value)

    def test_step_too_large(self):
        d = variant(bbmkp={"dt": 0.01, "t_end": 0.2, "snapshot_stride": 1})
        with pytest.raises(ValidationError) as info:
            parse_scenario(d)
        assert info.value.path == "bbmkp.dt"

    def test_unequal_means(self):
        d = variant(phi_minus={"kind": "sech2", "A": 0.5, "x0": 16.0, "width": 1.5, "period": 8.0})
        with pytest.raises(ValidationError) as info:
            parse_scenario(d)
        assert info.value.path == "phi_minus"

    def test_plateau_selected(self):
        d = variant(phi_minus={"kind": "sech2", "A": 1.0, "x0": 14.0, "width": 1.5, "period": 8.0})
        d["grid"] = {"nx": 128, "ny": 128, "Lx": 32.0, "Ly": 128.0}
        d["perturbation"] = {**SMALL["perturbation"], "y0": 32.0}
        s = parse_scenario(d)
        assert s.transverse.kind == "plateau"
        np.testing.assert_allclose(s.w0().values, s.perturbation.values, atol=1e-12)

    def test_plateau_needs_quiet_centre(self):
        d = variant(phi_minus={"kind": "sech2", "A": 1.0, "x0": 14.0, "width": 1.5, "period": 8.0})
        with pytest.raises(ValidationError) as info:
            parse_scenario(d)
        assert info.value.path == "perturbation"

    def test_boundary_decay(self):
        d = variant(phi_plus={"kind": "sech2", "A": 1.0, "x0": 16.0, "width": 4.0})
        with pytest.raises(ValidationError) as info:
            parse_scenario(d)
        assert info.value.path == "phi_plus"

    def test_perturbation_reaches_y_boundary(self):
        d = variant(perturbation={**SMALL["perturbation"], "sigma": 0.3})
        with pytest.raises(ValidationError):
            parse_scenario(d)

    def test_unresolved_solitary(self):
        d = variant(
            grid={"nx": 16, "ny": 128, "Lx": 200.0, "Ly": 56.0},
            phi_plus={"kind": "solitary_wave", "c": 1.5, "x0": 100.0},
        )
        with pytest.raises(ValidationError) as info:
            parse_scenario(d)
        assert info.value.path == "phi_plus"

    def test_slow_solitary(self):
        d = variant(phi_plus={"kind": "solitary_wave", "c": 0.5, "x0": 16.0})
        with pytest.raises(ValidationError) as info:
            parse_scenario(d)
        assert info.value.path == "phi_plus.c"

    def test_misaligned_times(self):
        d = variant(bbm={"dt": 1e-3, "t_end": 0.2, "snapshot_stride": 7})
        with pytest.raises(ValidationError) as info:
            parse_scenario(d)
        assert info.value.path == "bbm"

    def test_period_must_divide_box(self):
        d = variant(phi_plus={**SMALL["phi_plus"], "period": 7.0})
        with pytest.raises(ValidationError):
            parse_scenario(d)


class TestPipelines:
    def test_zero_scenario_all_zero(self, tmp_path):
        res = pipelines.run_verify_limit(load_scenario(bundled("zero")), tmp_path)
        assert res.passed
        rows = (tmp_path / "bounds.csv").read_text().splitlines()
        assert rows[0] == "t,y,k,w_norm,c_eta,c_1,c_plus,c_minus,bound,satisfied"
        assert all(r.split(",")[3] == "0.0" for r in rows[1:])

    def test_small_passes_and_corrupt_fails(self, tmp_path):
        scn = parse_scenario(SMALL)
        sim = pipelines.simulate(scn)
        assert pipelines.verify_limit(scn, sim=sim).passed
        bad = pipelines.verify_limit(scn, sim=sim, corrupt_uplus=True)
        assert not bad.passed
        assert any(r.violations > 0 for r in bad.analysis.reports)

    def test_energy_audit(self, tmp_path):
        summary = pipelines.run_energy_audit(parse_scenario(SMALL), tmp_path)
        assert pipelines.audit_passed(summary)
        header = (tmp_path / "invariants.csv").read_text().splitlines()[0]
        assert header == "t,solver,mass,energy,mass_drift,energy_rel_drift"

    def test_no_dealias_is_reported(self, tmp_path):
        scn = parse_scenario(SMALL)
        on = pipelines.run_energy_audit(scn, tmp_path / "on")
        off = pipelines.run_energy_audit(scn, tmp_path / "off", dealias=False)
        assert set(off) == set(on)
        assert all(np.isfinite(v["energy_rel_drift"]) for v in off.values())
        a = (tmp_path / "on" / "invariants.csv").read_text()
        b = (tmp_path / "off" / "invariants.csv").read_text()
        assert a != b

    def test_convergence_zero_degenerate(self, tmp_path):
        rows = pipelines.run_convergence_study(load_scenario(bundled("zero")), tmp_path)
        assert rows and all(r[-1] == "degenerate" for r in rows)

    def test_resolution_study(self, tmp_path):
        scn = parse_scenario(SMALL)
        rows = pipelines.run_convergence_study(scn, tmp_path, dts=[1e-3, 5e-4], ns=[64, 128, 256], t_end=0.02)
        res = [r for r in rows if r[0] == "resolution"]
        bbm = [r[4] for r in res if r[1] == "bbm"]
        assert bbm[0] > 1e3 * bbm[1]  # spectral: error collapses to the floor


class TestCli:
    def test_zero_verify(self, tmp_path, capsys):
        code = main(["verify-limit", "--scenario", str(bundled("zero")), "--out", str(tmp_path)])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["verdict"] == "pass"
        for name in ("profile.csv", "bounds.csv", "report.json"):
            assert (tmp_path / name).exists()

    def test_deterministic(self, tmp_path):
        p = write(tmp_path, SMALL)
        for d in ("a", "b"):
            assert main(["verify-limit", "--scenario", str(p), "--out", str(tmp_path / d)]) == 0
        for name in ("profile.csv", "bounds.csv", "report.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_corrupt_uplus_exit_1(self, tmp_path):
        p = write(tmp_path, SMALL)
        code = main(["verify-limit", "--scenario", str(p), "--out", str(tmp_path / "o"), "--corrupt-uplus"])
        assert code == 1
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert report["verdict"] == "fail" and report["corrupt_uplus"] is True

    def test_k_and_thresholds(self, tmp_path):
        p = write(tmp_path, SMALL)
        code = main(["verify-limit", "--scenario", str(p), "--out", str(tmp_path / "o"), "--k", "1", "--slack", "0.1", "--tail-ratio", "0.2"])
        assert code == 0
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert list(report["k"]) == ["1"]
        assert report["thresholds"] == {"slack": 0.1, "tail_ratio": 0.2}

    def test_config_error_exit_2(self, tmp_path, capsys):
        p = write(tmp_path, variant(perturbation={"kind": "sech_y"}))
        assert main(["verify-limit", "--scenario", str(p), "--out", str(tmp_path)]) == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ValidationError" and err["exit_code"] == 2

    def test_usage_error_exit_2(self):
        with pytest.raises(SystemExit) as info:
            main(["verify-limit"])
        assert info.value.code == 2

    def test_numerical_error_exit_3(self, tmp_path, capsys, monkeypatch):
        from bbmkp_lab import errors

        def boom(*a, **k):
            raise errors.BlowUp(5, 0.01, float("inf"))

        monkeypatch.setattr(pipelines, "run_verify_limit", boom)
        p = write(tmp_path, SMALL)
        assert main(["verify-limit", "--scenario", str(p), "--out", str(tmp_path)]) == 3
        assert json.loads(capsys.readouterr().err)["error"] == "BlowUp"

    @pytest.mark.parametrize("cmd", ["simulate-bbm", "simulate-bbmkp", "energy-audit"])
    def test_other_commands(self, tmp_path, cmd):
        p = write(tmp_path, SMALL)
        assert main([cmd, "--scenario", str(p), "--out", str(tmp_path / "o")]) == 0

    def test_energy_audit_no_dealias_is_diagnostic(self, tmp_path):
        p = write(tmp_path, SMALL)
        assert main(["energy-audit", "--scenario", str(p), "--out", str(tmp_path / "o"), "--no-dealias"]) == 0

    def test_convergence(self, tmp_path):
        p = write(tmp_path, SMALL)
        code = main(["convergence-study", "--scenario", str(p), "--out", str(tmp_path), "--dts", "1e-3,5e-4,2.5e-4", "--t-end", "0.02"])
        assert code == 0
        header = (tmp_path / "orders.csv").read_text().splitlines()[0]
        assert header == "study,solver,param,value,error,order,status"

import copy
import json
import math
import subprocess
import sys

import pytest

from conftest import PALLET_FIXTURE, SLOW_ILS_FIXTURE
from locreq.cli import main
from locreq.commands import cmd_derive, cmd_tabulate, config_digest
from locreq.config import parse_config
from locreq.report import Report, Table, fmt_float, render_report

RAW = json.loads(PALLET_FIXTURE.read_text())


def write_config(tmp_path, **function_changes):
    raw = copy.deepcopy(RAW)
    raw["function"].update(function_changes)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    return str(path), raw


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestRendering:
    @pytest.mark.parametrize("v, s", [
        (0.25, "0.25"), (0.1 + 0.2, "0.3"), (1234567.0, "1.23457e+06"), (-0.0, "0"),
        (math.inf, "inf"), (-math.inf, "-inf"), (0.000123456789, "0.000123457"),
    ])
    def test_fmt_float(self, v, s):
        assert fmt_float(v) == s

    def _report(self, warnings=()):
        return Report("demo", "sha256:0", {"a": 1}, {"v": 0.1 + 0.2, "big": math.inf},
                      (Table("t", ("k", "v"), (("a", 1.0), ("b", True))),
                       Table("u", ("x",), ((None,),))), tuple(warnings))

    def test_json_canonical(self):
        doc = json.loads(render_report(self._report()))
        assert doc["results"] == {"big": "inf", "v": 0.3}
        assert list(doc) == sorted(doc)

    def test_csv_sections(self):
        text = render_report(self._report(), "csv").decode()
        assert text == "# t\nk,v\na,1\nb,true\n\n# u\nx\n\"\"\n"

    def test_markdown_warnings_only_when_present(self):
        assert b"## Warnings" not in render_report(self._report(), "markdown")
        md = render_report(self._report(["careful"]), "markdown").decode()
        assert md.endswith("## Warnings\n\n- careful\n")

    def test_byte_stable(self):
        cfg = parse_config(PALLET_FIXTURE.read_bytes())
        for fmt in ("json", "csv", "markdown"):
            assert render_report(cmd_tabulate(cfg), fmt) == render_report(cmd_tabulate(cfg), fmt)

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render_report(self._report(), "xml")

    def test_digest_tracks_inputs(self):
        a = parse_config(PALLET_FIXTURE.read_bytes())
        raw = copy.deepcopy(RAW)
        raw["function"]["max_velocity"]["x"] = 0.11
        b = parse_config(json.dumps(raw))
        assert config_digest(a) == config_digest(parse_config(PALLET_FIXTURE.read_bytes()))
        assert config_digest(a) != config_digest(b)

    def test_unbounded_margin_renders_as_inf(self):
        raw = copy.deepcopy(RAW)
        raw["function"]["interest_space"]["z"] = [None, None]
        doc = json.loads(render_report(cmd_derive(parse_config(json.dumps(raw)))))
        assert doc["results"]["steps"]["B"]["requirement_margin"]["z"] == "inf"
        assert doc["inputs"]["function"]["interest_space"]["z"] == [None, None]


class TestCli:
    def test_derive_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "derive", "--config", str(PALLET_FIXTURE))
        assert code == 0
        budget = json.loads(out)["results"]["steps"]["D"]["accuracy_budget_interest_frame"]
        assert budget == {"x": 0.25, "y": 0.15, "z": 0.1}

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "r.csv"
        code, out, _ = run_cli(capsys, "tabulate", "--config", str(PALLET_FIXTURE),
                               "--format", "csv", "--out", str(target))
        assert code == 0 and out == ""
        assert target.read_text().splitlines()[1] == "t_g_s,Px_m,Py_m,Pz_m"

    def test_check_ok_and_unsuitable(self, capsys):
        assert run_cli(capsys, "check", "--config", str(PALLET_FIXTURE))[0] == 0
        code, out, _ = run_cli(capsys, "check", "--config", str(SLOW_ILS_FIXTURE))
        assert code == 2
        verdict = json.loads(out)["results"]["verdicts"][0]
        assert verdict["feasible"] is False and verdict["binding_axis"] == "y"

    def test_derive_infeasible_exit_2(self, capsys, tmp_path):
        raw = copy.deepcopy(RAW)
        raw["derive"]["update"]["rate_hz"] = 1.0
        path = tmp_path / "c.json"
        path.write_text(json.dumps(raw))
        code, out, err = run_cli(capsys, "derive", "--config", str(path))
        assert code == 2 and out == ""
        assert "[step D]" in err and "y:" in err

    def test_config_error_exit_1(self, capsys, tmp_path):
        path, _ = write_config(tmp_path, confidence={"sigma": 1.0})
        code, out, err = run_cli(capsys, "derive", "--config", path)
        assert code == 1 and out == "" and "function.confidence" in err

    def test_containment_error_exit_1(self, capsys, tmp_path):
        path, _ = write_config(tmp_path, motion_space={"x": [0.45, 1.45], "y": [0.55, 1.3],
                                                       "z": [0.15, 0.15]})
        code, _, err = run_cli(capsys, "check", "--config", path)
        assert code == 1
        assert "function.motion_space.y: not contained in interest_space.y" in err

    @pytest.mark.parametrize("argv", [
        ["derive"], ["frobnicate", "--config", "x"], ["simulate", "--config", "x", "--seed", "-1"],
        ["simulate", "--config", "x", "--trials", "0"], ["derive", "--config", "x", "--format", "xml"],
    ])
    def test_usage_errors(self, capsys, argv):
        with pytest.raises(SystemExit) as e:
            main(argv)
        assert e.value.code == 1

    def test_missing_config_file(self, capsys, tmp_path):
        assert run_cli(capsys, "derive", "--config", str(tmp_path / "none.json"))[0] == 1

    def test_unwritable_out(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "derive", "--config", str(PALLET_FIXTURE),
                               "--out", str(tmp_path / "missing_dir" / "r.json"))
        assert code == 1 and "cannot write" in err

    def test_simulate_overrides(self, capsys):
        _, a, _ = run_cli(capsys, "simulate", "--config", str(PALLET_FIXTURE), "--trials", "20",
                          "--seed", "1")
        _, b, _ = run_cli(capsys, "simulate", "--config", str(PALLET_FIXTURE), "--trials", "20",
                          "--seed", "1")
        assert a == b
        doc = json.loads(a)
        assert doc["results"]["trials"] == 20 and doc["results"]["seed"] == 1
        assert doc["results"]["report"]["updates_classified"] == 2000

    def test_simulate_bound_violation_exit_3(self, capsys, tmp_path):
        raw = copy.deepcopy(RAW)
        raw["simulation"]["budget_scale"] = 2.0
        path = tmp_path / "c.json"
        path.write_text(json.dumps(raw))
        code, out, _ = run_cli(capsys, "simulate", "--config", str(path))
        assert code == 3 and json.loads(out)["results"]["report"]["pass"] is False

    def test_simulate_random_mode(self, capsys, tmp_path):
        raw = copy.deepcopy(RAW)
        raw["simulation"]["trajectory"] = "random"
        raw["simulation"]["update"] = {"type": "periodic", "rate_hz": 10.0}
        path = tmp_path / "c.json"
        path.write_text(json.dumps(raw))
        code, out, _ = run_cli(capsys, "simulate", "--config", str(path))
        assert code == 0
        assert json.loads(out)["results"]["report"]["updates_classified"] > 0

    def test_relative_warning(self, capsys, tmp_path):
        path, _ = write_config(tmp_path, localization_type="relative")
        _, out, _ = run_cli(capsys, "derive", "--config", path)
        assert any(w.startswith("relative localization") for w in json.loads(out)["warnings"])

    def test_non_identity_transform_needs_yaw_percentile(self, capsys, tmp_path):
        path, raw = write_config(tmp_path, transform_L_to_I={"translation": [0.0, 0.3, 0.0],
                                                             "yaw_offset": 0.0})
        _, out, _ = run_cli(capsys, "derive", "--config", path)
        doc = json.loads(out)
        assert doc["results"]["steps"]["D"]["accuracy_budget_device_frame"] is None
        assert any("device-frame budget not computed" in w for w in doc["warnings"])
        raw["derive"]["yaw_percentile"] = 0.02
        (tmp_path / "cfg.json").write_text(json.dumps(raw))
        _, out, _ = run_cli(capsys, "derive", "--config", path)
        device = json.loads(out)["results"]["steps"]["D"]["accuracy_budget_device_frame"]
        assert device["x"] == pytest.approx(0.25 - 2 * 0.3 * math.sin(0.01), abs=1e-6)

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "locreq", "tabulate", "--config",
                               str(PALLET_FIXTURE), "--format", "csv"],
                              capture_output=True, check=False)
        assert proc.returncode == 0
        assert proc.stdout.startswith(b"# tradeoff\nt_g_s,Px_m,Py_m,Pz_m\n0.1,0.29,0.43,0.14\n")

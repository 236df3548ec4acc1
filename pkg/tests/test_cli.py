"""CLI behavior: config resolution, output documents, exit codes,
byte-for-byte reproducibility from the embedded config echo."""

import json
import subprocess
import sys

import numpy as np
import pytest

from dressedcool.cli import (
    EXIT_INVALID_INPUT,
    EXIT_OK,
    EXIT_ORACLE,
    EXIT_PHYSICS,
    main,
)
from dressedcool.config import (
    ConfigError,
    parse_config_text,
    resolve_config,
    schema_for,
)

# a cold, well-converged operating point used throughout
BASE_FLAGS = [
    "--omega", "5", "--delta", "0", "--nu", "10", "--eta", "0.02",
    "--gamma-plus", "1", "--gamma-minus", "0.2", "--gamma-zero", "0.2",
]

BASE_CFG_TEXT = """\
# base operating point
omega = 5
delta = 0
nu = 10
eta = 0.02
gamma_plus = 1
gamma_minus = 0.2   # trailing comment
gamma_zero = 0.2
"""


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def echo_to_config_lines(echo: dict) -> str:
    lines = []
    for name, value in echo.items():
        if name == "subcommand" or value is None:
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"


class TestConfigParsing:
    def test_comments_blanks_and_spacing(self):
        got = parse_config_text(BASE_CFG_TEXT)
        assert got["omega"] == "5"
        assert got["gamma_minus"] == "0.2"
        assert len(got) == 7

    def test_duplicate_key_rejected_with_line_number(self):
        with pytest.raises(ConfigError, match=r"line 3: duplicate key 'a'"):
            parse_config_text("a = 1\nb = 2\na = 3\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError, match="expected key = value"):
            parse_config_text("omega 5\n")

    def test_empty_key_rejected(self):
        with pytest.raises(ConfigError, match="empty key"):
            parse_config_text("= 5\n")

    def test_unknown_key_lists_known_ones(self):
        with pytest.raises(ConfigError, match="unknown config key.*bogus"):
            resolve_config("steady", {"bogus": "1"}, {})
        with pytest.raises(ConfigError, match="known keys: omega"):
            resolve_config("steady", {"bogus": "1"}, {})

    def test_bad_number_bool_choice(self):
        base = parse_config_text(BASE_CFG_TEXT)
        with pytest.raises(ConfigError, match="omega: not a number"):
            resolve_config("steady", {**base, "omega": "five"}, {})
        with pytest.raises(ConfigError, match="expected true or false"):
            resolve_config("trajectory", {**base, "t_end": "1", "n0": "0",
                                          "ode": "yes"}, {})
        with pytest.raises(ConfigError, match="format: expected one of"):
            resolve_config("steady", {**base, "format": "xml"}, {})

    def test_missing_required_names_key_and_flag(self):
        with pytest.raises(ConfigError, match="'eta'.*--eta"):
            resolve_config("steady", {
                "omega": "5", "delta": "0", "nu": "10", "gamma_plus": "1",
                "gamma_minus": "0.2", "gamma_zero": "0.2"}, {})

    def test_flags_override_file(self):
        cfg = resolve_config("steady", parse_config_text(BASE_CFG_TEXT),
                             {"eta": 0.05})
        assert cfg["eta"] == 0.05
        assert cfg["omega"] == 5.0
        assert "eta" in cfg.provided
        assert "margin" not in cfg.provided
        assert cfg["margin"] == 10.0

    def test_schema_for_unknown_subcommand(self):
        with pytest.raises(ConfigError, match="unknown subcommand"):
            schema_for("paint")


class TestExitCodes:
    def test_invalid_param_is_1_and_names_field(self, capsys):
        code, _, err = run_cli(
            ["steady", "--omega", "-1"] + BASE_FLAGS[2:], capsys)
        assert code == EXIT_INVALID_INPUT
        assert "omega" in err

    def test_heating_steady_is_0_with_sentinel(self, capsys):
        args = ["steady", "--omega", "5", "--delta", "0", "--nu", "10",
                "--eta", "0.1", "--gamma-plus", "1", "--gamma-minus", "1",
                "--gamma-zero", "0.2"]
        code, out, _ = run_cli(args, capsys)
        assert code == EXIT_OK
        assert json.loads(out)["result"]["n_s"] == "HEATING"

    def test_zero_coupling_validate_is_2(self, capsys):
        args = ["validate"] + BASE_FLAGS[:]
        args[args.index("--eta") + 1] = "0"
        code, _, err = run_cli(args, capsys)
        assert code == EXIT_PHYSICS
        assert "phonon decoupled" in err

    def test_heating_validate_is_2(self, capsys):
        args = ["validate", "--omega", "5", "--delta", "0", "--nu", "10",
                "--eta", "0.1", "--gamma-plus", "1", "--gamma-minus", "1",
                "--gamma-zero", "0.2"]
        code, _, err = run_cli(args, capsys)
        assert code == EXIT_PHYSICS
        assert "heating point" in err

    def test_oracle_failure_validate_is_3(self, capsys):
        code, _, err = run_cli(
            ["validate"] + BASE_FLAGS + ["--n-max", "8", "--dim-cap", "8"],
            capsys)
        assert code == EXIT_ORACLE
        assert "oracle error" in err

    def test_unknown_preset_is_1(self, capsys, tmp_path):
        code, _, err = run_cli(
            ["sweep", "--preset", "fig9", "--out-dir", str(tmp_path)],
            capsys)
        assert code == EXIT_INVALID_INPUT
        assert "fig1e" in err and "fig3" in err

    def test_unknown_flag_is_1(self, capsys):
        code, _, _ = run_cli(["steady", "--bogus", "1"], capsys)
        assert code == EXIT_INVALID_INPUT

    def test_missing_required_flag_is_1(self, capsys):
        code, _, err = run_cli(["steady", "--omega", "5"], capsys)
        assert code == EXIT_INVALID_INPUT
        assert "delta" in err

    def test_help_is_0(self, capsys):
        code, out, _ = run_cli(["steady", "--help"], capsys)
        assert code == EXIT_OK
        assert "--gamma-plus" in out

    def test_nonpositive_t_end_is_1(self, capsys):
        code, _, err = run_cli(
            ["trajectory"] + BASE_FLAGS + ["--t-end", "0", "--n0", "1"],
            capsys)
        assert code == EXIT_INVALID_INPUT
        assert "t_end" in err

    def test_too_few_samples_is_1(self, capsys):
        code, _, err = run_cli(
            ["trajectory"] + BASE_FLAGS
            + ["--t-end", "1", "--samples", "1", "--n0", "1"], capsys)
        assert code == EXIT_INVALID_INPUT
        assert "samples" in err


class TestSteadyCommand:
    def test_json_document(self, capsys):
        code, out, _ = run_cli(["steady"] + BASE_FLAGS, capsys)
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["config"]["subcommand"] == "steady"
        assert doc["config"]["eta"] == 0.02
        res = doc["result"]
        assert res["rz_s"] == -0.6666666666666667
        assert res["sz_s"] == 0.0
        assert res["n_s"] == 0.25159999999999993
        assert res["validity"]["overall"] is True
        assert res["rates"]["a_minus"] == {"im": 0.0,
                                           "re": 0.016688000000000005}

    def test_csv_format_has_config_comment_and_pairs(self, capsys):
        code, out, _ = run_cli(
            ["steady"] + BASE_FLAGS + ["--format", "csv"], capsys)
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[1].startswith("# config = {")
        assert "key,value" in lines
        assert any(line == "n_s,0.25159999999999993" for line in lines)

    def test_output_file_and_rerun_identical(self, capsys, tmp_path):
        target = tmp_path / "steady.json"
        args = ["steady"] + BASE_FLAGS + ["--output", str(target)]
        assert main(args) == EXIT_OK
        first = target.read_bytes()
        assert main(args) == EXIT_OK
        assert target.read_bytes() == first
        capsys.readouterr()

    def test_reference_rate_echoed_never_applied(self, capsys):
        _, out_a, _ = run_cli(["steady"] + BASE_FLAGS, capsys)
        _, out_b, _ = run_cli(
            ["steady"] + BASE_FLAGS + ["--reference-rate", "gamma"], capsys)
        doc_a, doc_b = json.loads(out_a), json.loads(out_b)
        assert doc_a["config"]["reference_rate"] == "gamma_plus"
        assert doc_b["config"]["reference_rate"] == "gamma"
        assert doc_a["result"] == doc_b["result"]

    def test_rerun_from_embedded_echo_is_byte_identical(self, capsys,
                                                        tmp_path):
        code, out, _ = run_cli(["steady"] + BASE_FLAGS, capsys)
        assert code == EXIT_OK
        echo = json.loads(out)["config"]
        cfg_file = tmp_path / "echo.cfg"
        cfg_file.write_text(echo_to_config_lines(echo), encoding="utf-8")
        code2, out2, _ = run_cli(["steady", "--config", str(cfg_file)],
                                 capsys)
        assert code2 == EXIT_OK
        assert out2 == out


class TestTrajectoryCommand:
    def test_csv_columns_and_initial_row(self, capsys):
        code, out, _ = run_cli(
            ["trajectory"] + BASE_FLAGS
            + ["--t-end", "2", "--samples", "5", "--n0", "3",
               "--rz0", "-0.25"], capsys)
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[0].startswith("# config = {")
        assert lines[1] == "t,rz,re_rplus,im_rplus,n"
        first = lines[2].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == -0.25
        assert float(first[4]) == 3.0

    def test_ode_column_matches_closed_form(self, capsys):
        code, out, _ = run_cli(
            ["trajectory"] + BASE_FLAGS
            + ["--t-end", "40", "--samples", "9", "--n0", "3",
               "--ode", "true"], capsys)
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[1] == "t,rz,re_rplus,im_rplus,n,n_ode"
        rows = np.array([[float(v) for v in line.split(",")]
                         for line in lines[2:]])
        n, n_ode = rows[:, 4], rows[:, 5]
        assert np.max(np.abs(n - n_ode) / np.abs(n)) < 1e-8

    def test_json_document_summary(self, capsys):
        code, out, _ = run_cli(
            ["trajectory"] + BASE_FLAGS
            + ["--t-end", "1", "--samples", "3", "--n0", "0",
               "--format", "json"], capsys)
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["columns"] == ["t", "rz", "re_rplus", "im_rplus", "n"]
        assert len(doc["rows"]) == 3
        assert doc["summary"]["n_steady"] == 0.25159999999999993
        assert doc["summary"]["phonon_growing"] is False

    def test_heating_summary_uses_sentinel(self, capsys):
        code, out, _ = run_cli(
            ["trajectory", "--omega", "5", "--delta", "0", "--nu", "10",
             "--eta", "0.1", "--gamma-plus", "1", "--gamma-minus", "1",
             "--gamma-zero", "0.2", "--t-end", "1", "--samples", "3",
             "--n0", "0", "--format", "json"], capsys)
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["summary"]["n_steady"] == "HEATING"
        assert doc["summary"]["phonon_growing"] is True

    def test_rerun_from_embedded_echo_is_byte_identical(self, capsys,
                                                        tmp_path):
        args = ["trajectory"] + BASE_FLAGS + [
            "--t-end", "2", "--samples", "5", "--n0", "3", "--ode", "true"]
        code, out, _ = run_cli(args, capsys)
        assert code == EXIT_OK
        echo = json.loads(out.splitlines()[0].removeprefix("# config = "))
        cfg_file = tmp_path / "echo.cfg"
        cfg_file.write_text(echo_to_config_lines(echo), encoding="utf-8")
        code2, out2, _ = run_cli(["trajectory", "--config", str(cfg_file)],
                                 capsys)
        assert code2 == EXIT_OK
        assert out2 == out


class TestSweepCommand:
    def test_custom_sweep_files_and_exit(self, capsys, tmp_path):
        code, out, err = run_cli(
            ["sweep"] + BASE_FLAGS
            + ["--variable", "nu", "--grid-min", "8", "--grid-max", "12",
               "--grid-count", "3", "--out-dir", str(tmp_path)], capsys)
        assert code == EXIT_OK
        assert err == ""
        path = tmp_path / "nu.csv"
        assert f"wrote {path}" in out
        text = path.read_text(encoding="utf-8")
        lines = text.splitlines()
        assert lines[0].startswith("# config = {")
        assert lines[1].startswith("# spec = {")
        assert lines[2] == ("x,n_s,rz_s,sz_s,two_sz_s,c,a_plus_rate,"
                            "valid,error")
        assert len(lines) == 6

    def test_custom_sweep_missing_pieces(self, capsys, tmp_path):
        out_dir = ["--out-dir", str(tmp_path)]
        code, _, err = run_cli(
            ["sweep"] + BASE_FLAGS + out_dir, capsys)
        assert code == EXIT_INVALID_INPUT and "variable" in err
        code, _, err = run_cli(
            ["sweep", "--variable", "nu", "--grid-min", "1",
             "--grid-max", "2", "--grid-count", "2"] + out_dir, capsys)
        assert code == EXIT_INVALID_INPUT and "omega" in err
        code, _, err = run_cli(
            ["sweep"] + BASE_FLAGS + ["--variable", "nu"] + out_dir, capsys)
        assert code == EXIT_INVALID_INPUT and "grid_min" in err

    def test_row_errors_give_exit_2_but_files_written(self, capsys,
                                                      tmp_path):
        code, _, err = run_cli(
            ["sweep"] + BASE_FLAGS
            + ["--variable", "eta", "--grid-min", "-0.1",
               "--grid-max", "0.1", "--grid-count", "3",
               "--out-dir", str(tmp_path)], capsys)
        assert code == EXIT_PHYSICS
        assert "error marker" in err
        text = (tmp_path / "eta.csv").read_text(encoding="utf-8")
        assert "InvalidParamsError: eta" in text
        assert "ZeroCouplingError" in text

    def test_oracle_failure_gives_exit_3(self, capsys, tmp_path):
        code, _, err = run_cli(
            ["sweep"] + BASE_FLAGS
            + ["--variable", "nu", "--grid-min", "10", "--grid-max", "10",
               "--grid-count", "1", "--oracle", "true",
               "--oracle-n-max", "40", "--out-dir", str(tmp_path)], capsys)
        assert code == EXIT_ORACLE
        assert "oracle" in err
        assert "oracle DimensionOverflowError" in (tmp_path / "nu.csv") \
            .read_text(encoding="utf-8")

    def test_preset_writes_one_file_per_curve(self, capsys, tmp_path):
        code, out, _ = run_cli(
            ["sweep", "--preset", "fig2", "--out-dir", str(tmp_path)],
            capsys)
        assert code == EXIT_OK
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["fig2_nu_12.csv", "fig2_nu_2.csv", "fig2_nu_6.csv"]
        assert out.count("wrote ") == 3

    def test_preset_rejects_custom_keys(self, capsys, tmp_path):
        code, _, err = run_cli(
            ["sweep", "--preset", "fig2", "--omega", "5",
             "--out-dir", str(tmp_path)], capsys)
        assert code == EXIT_INVALID_INPUT
        assert "remove: omega" in err

    def test_preset_json_rerun_from_echo_identical(self, capsys, tmp_path):
        args = ["sweep", "--preset", "fig1e", "--format", "json",
                "--out-dir", str(tmp_path)]
        code, _, _ = run_cli(args, capsys)
        assert code == EXIT_OK
        path = tmp_path / "fig1e_nu_6.json"
        first = path.read_bytes()
        echo = json.loads(first.decode("utf-8"))["config"]
        cfg_file = tmp_path / "echo.cfg"
        cfg_file.write_text(echo_to_config_lines(echo), encoding="utf-8")
        code2, _, _ = run_cli(["sweep", "--config", str(cfg_file)], capsys)
        assert code2 == EXIT_OK
        assert path.read_bytes() == first

    def test_parallel_workers_match_serial(self, capsys, tmp_path):
        serial_dir = tmp_path / "serial"
        par_dir = tmp_path / "par"
        base = ["sweep"] + BASE_FLAGS + [
            "--variable", "delta", "--grid-min", "-2", "--grid-max", "2",
            "--grid-count", "41"]
        assert main(base + ["--out-dir", str(serial_dir)]) == EXIT_OK
        assert main(base + ["--out-dir", str(par_dir),
                            "--workers", "3"]) == EXIT_OK
        capsys.readouterr()

        # the config comment legitimately differs (out_dir, workers);
        # everything from the "# spec = " line on must match byte for byte
        def table_part(path):
            text = path.read_text(encoding="utf-8")
            return text[text.index("# spec = "):]

        assert table_part(serial_dir / "delta.csv") == \
            table_part(par_dir / "delta.csv")


class TestValidateCommand:
    def test_agreement_document(self, capsys):
        code, out, err = run_cli(
            ["validate"] + BASE_FLAGS + ["--n-max", "8"], capsys)
        assert code == EXIT_OK
        assert err == ""
        doc = json.loads(out)
        assert doc["passed"] is True
        assert doc["relative_error"] < 0.01
        assert doc["analytic"]["n_s"] == 0.25159999999999993
        assert doc["oracle"]["n_max"] == 12
        assert len(doc["oracle"]["convergence_history"]) == 2
        assert doc["validity_overall"] is True
        assert doc["warnings"] == []

    def test_failed_threshold_still_exit_0(self, capsys):
        code, out, _ = run_cli(
            ["validate"] + BASE_FLAGS
            + ["--n-max", "8", "--threshold", "1e-6"], capsys)
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["passed"] is False

    def test_out_of_validity_warns_but_compares(self, capsys):
        code, out, err = run_cli(
            ["validate"] + BASE_FLAGS
            + ["--n-max", "8", "--margin", "1000"], capsys)
        assert code == EXIT_OK
        assert "warning:" in err and "outside the stated validity" in err
        doc = json.loads(out)
        assert doc["validity_overall"] is False
        assert len(doc["warnings"]) == 1
        assert doc["passed"] is True  # physics still agrees

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(
            ["validate"] + BASE_FLAGS + ["--n-max", "8", "--format", "csv"],
            capsys)
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[0] == "# validation report"
        assert any(line.startswith("passed,true") for line in lines)


class TestPresetsCommand:
    def test_json_listing(self, capsys):
        code, out, _ = run_cli(["presets"], capsys)
        assert code == EXIT_OK
        doc = json.loads(out)
        info = doc["presets"]
        assert sorted(info) == ["fig1", "fig1e", "fig2", "fig3"]
        assert info["fig1"]["reference_rate"] == "gamma"
        assert info["fig2"]["variable"] == "gamma_ratio"
        assert info["fig2"]["gamma_zero_rule"] == "track_gamma_minus"
        assert info["fig3"]["curves"][2]["base"]["nu"] == 12.0
        assert info["fig3"]["curves"][2]["base"]["delta"] == -5.0

    def test_csv_listing(self, capsys):
        code, out, _ = run_cli(["presets", "--format", "csv"], capsys)
        assert code == EXIT_OK
        assert "fig1.grid_count,300" not in out  # detuning scan is 401
        assert "fig1.grid_count,401" in out
        assert "fig2.grid_count,300" in out


class TestEntryPoint:
    def test_console_script_runs(self):
        proc = subprocess.run(
            ["dressedcool", "presets"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["config"]["subcommand"] == "presets"

    def test_module_invocation_matches(self):
        proc = subprocess.run(
            [sys.executable, "-m", "dressedcool.cli", "presets"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["config"]["subcommand"] == "presets"

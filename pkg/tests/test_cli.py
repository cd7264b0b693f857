import contextlib
import io
import json
import math
from importlib import resources

import pytest

from lunephase.cli import main, parse_angle


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def bundled_program_path():
    return resources.files("lunephase").joinpath("data", "prepare_pure.seq")


class TestAngleParsing:
    def test_symbolic_forms(self):
        assert parse_angle("pi") == math.pi
        assert parse_angle("pi/2") == math.pi / 2
        assert parse_angle("3pi/8") == 3 * math.pi / 8
        assert parse_angle("2pi") == 2 * math.pi
        assert parse_angle("-pi/4") == -math.pi / 4
        assert parse_angle("0.5pi") == 0.5 * math.pi

    def test_decimal_radians(self):
        assert parse_angle("0.75") == 0.75
        assert parse_angle("-1.5e-3") == -1.5e-3

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_angle("half a turn")
        with pytest.raises(ValueError):
            parse_angle("pi/0")


class TestTheoryCommand:
    def test_quarter_turn_table(self):
        code, out, _ = invoke(["theory", "--omega", "pi/2"])
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "n,r,gamma_rad,visibility"
        assert len(lines) == 13
        first = lines[1].split(",")
        assert first[0] == "0"
        assert abs(float(first[2])) == pytest.approx(math.pi / 4, abs=1e-15)
        assert float(first[3]) == 1.0

    def test_full_turn_all_pi(self):
        code, out, _ = invoke(["theory", "--omega", "2pi"])
        assert code == 0
        gammas = {line.split(",")[2] for line in out.strip().split("\n")[1:]}
        assert gammas == {"3.141592653589793"}

    def test_half_turn_json_marks_undefined(self):
        code, out, _ = invoke(["theory", "--omega", "pi", "--format", "json"])
        assert code == 0
        rows = json.loads(out)["rows"]
        assert len(rows) == 12
        assert rows[6]["defined"] is False
        assert rows[6]["gamma_rad"] is None
        assert rows[0]["defined"] is True
        assert rows[7]["flipped"] is True

    def test_n_max_controls_rows(self):
        code, out, _ = invoke(["theory", "--omega", "pi/2", "--n-max", "5"])
        assert code == 0
        assert len(out.strip().split("\n")) == 6

    def test_convention_flips_sign(self):
        _, default_out, _ = invoke(["theory", "--omega", "pi/2"])
        _, flipped_out, _ = invoke(
            ["theory", "--omega", "pi/2", "--convention", "active=down"]
        )
        g0 = float(default_out.strip().split("\n")[1].split(",")[2])
        g1 = float(flipped_out.strip().split("\n")[1].split(",")[2])
        assert g0 == -g1 != 0.0

    def test_bad_omega_is_usage_error(self):
        code, _, err = invoke(["theory", "--omega", "sideways"])
        assert code == 2
        assert "omega" in err

    def test_missing_omega_is_usage_error(self):
        code, _, _ = invoke(["theory"])
        assert code == 2


class TestSweepCommand:
    def test_default_grid_passes(self):
        code, out, _ = invoke(["sweep", "--theta", "pi/8,pi/4,3pi/8"])
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("omega_rad,theta_rad,n,r,")
        data_rows = [l for l in lines[1:] if not l.startswith("#")]
        assert len(data_rows) == 36

    def test_missing_theta_value_is_usage_error(self):
        code, _, _ = invoke(["sweep", "--theta"])
        assert code == 2

    def test_relaxation_needs_wider_visibility_gate(self):
        code, _, _ = invoke(["sweep", "--theta", "pi/4", "--relaxation", "0.3,0.4"])
        assert code == 1
        code, out, _ = invoke(
            [
                "sweep",
                "--theta",
                "pi/4",
                "--relaxation",
                "0.3,0.4",
                "--tolerance-visibility",
                "0.02",
            ]
        )
        assert code == 0
        # every visibility uniformly reduced by the same dephasing factor
        rows = [
            l.split(",")
            for l in out.strip().split("\n")[1:]
            if not l.startswith("#")
        ]
        ratios = {round(float(r[6]) / float(r[7]), 9) for r in rows if float(r[7]) > 1e-9}
        assert len(ratios) == 1

    def test_json_format(self):
        code, out, _ = invoke(
            ["sweep", "--theta", "pi/8", "--format", "json"]
        )
        assert code == 0
        payload = json.loads(out)
        assert len(payload["rows"]) == 12
        assert payload["summary"]["max_abs_residual_rad"] < 1e-9

    def test_impossible_tolerance_fails(self):
        code, _, _ = invoke(["sweep", "--theta", "pi/8", "--tolerance", "1e-20"])
        assert code == 1

    def test_byte_determinism(self):
        argv = ["sweep", "--theta", "pi/8,pi/4"]
        _, first, _ = invoke(argv)
        _, second, _ = invoke(argv)
        assert first == second


class TestSimulateCommand:
    def test_csv_single_row(self):
        code, out, _ = invoke(["simulate", "--theta", "pi/8", "--n", "3"])
        assert code == 0
        lines = [l for l in out.strip().split("\n") if not l.startswith("#")]
        assert len(lines) == 2
        gamma = float(lines[1].split(",")[4])
        assert gamma == pytest.approx(-math.atan(math.sqrt(2) / 2), abs=1e-12)

    def test_json_snapshot_dump(self):
        code, out, _ = invoke(
            ["simulate", "--theta", "pi/8", "--n", "0", "--format", "json"]
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["config"]["n"] == 0
        assert payload["result"]["defined"] is True
        snaps = payload["snapshots"]
        assert snaps[0]["time_s"] == 0.0
        assert snaps[-1]["time_s"] == pytest.approx(1.0 / 214.5, abs=1e-15)
        state = snaps[0]["state"]
        assert len(state["re"]) == 4 and len(state["im"]) == 4

    def test_gate_applies_to_simulate(self):
        code, _, _ = invoke(
            ["simulate", "--theta", "pi/8", "--n", "3", "--tolerance", "1e-20"]
        )
        assert code == 1

    def test_bad_purity_index_is_usage_error(self):
        code, _, err = invoke(["simulate", "--theta", "pi/8", "--n", "12"])
        assert code == 2
        assert "purity index" in err


class TestTracePathCommand:
    def test_footer_reports_loop_area(self):
        code, out, _ = invoke(
            ["trace-path", "--theta", "pi/4", "--samples", "10000"]
        )
        assert code == 0
        footer = {
            line.split(" = ")[0]: float(line.split(" = ")[1])
            for line in out.strip().split("\n")
            if line.startswith("#")
        }
        assert footer["# solid_angle_rad"] == pytest.approx(math.pi, abs=1e-5)
        assert footer["# pancharatnam_rad"] == pytest.approx(-math.pi / 2, abs=1e-5)
        assert abs(footer["# dynamical_rad"]) < 1e-9
        assert footer["# geodesic_deviation_seg1"] < 1e-6
        assert footer["# geodesic_deviation_seg2"] < 1e-6

    def test_rows_carry_branch_and_unit_points(self):
        code, out, _ = invoke(["trace-path", "--theta", "pi/8", "--samples", "64"])
        assert code == 0
        rows = [l for l in out.strip().split("\n")[1:] if not l.startswith("#")]
        assert len(rows) == 65
        t, x, y, z, branch = rows[0].split(",")
        assert branch == "plus"
        assert float(t) == 0.0
        assert float(x) == pytest.approx(1.0, abs=1e-12)
        assert abs(float(y)) < 1e-12 and abs(float(z)) < 1e-12

    def test_minus_branch_mirrors_area(self):
        _, plus_out, _ = invoke(["trace-path", "--theta", "pi/8", "--samples", "2000"])
        _, minus_out, _ = invoke(
            ["trace-path", "--theta", "pi/8", "--branch", "minus", "--samples", "2000"]
        )

        def area(text):
            for line in text.strip().split("\n"):
                if line.startswith("# solid_angle_rad"):
                    return float(line.split(" = ")[1])

        assert area(minus_out) == pytest.approx(-area(plus_out), abs=1e-12)
        assert area(plus_out) == pytest.approx(math.pi / 2, abs=1e-9)

    def test_degenerate_lune_has_zero_area(self):
        code, out, _ = invoke(["trace-path", "--theta", "0", "--samples", "512"])
        assert code == 0
        line = [l for l in out.strip().split("\n") if "solid_angle" in l][0]
        assert abs(float(line.split(" = ")[1])) < 1e-9

    def test_too_few_samples_exits_one_with_hint(self):
        code, _, err = invoke(["trace-path", "--theta", "pi/4", "--samples", "2"])
        assert code == 1
        assert "refine" in err

    def test_json_payload(self):
        code, out, _ = invoke(
            ["trace-path", "--theta", "pi/4", "--samples", "128", "--format", "json"]
        )
        assert code == 0
        payload = json.loads(out)
        assert len(payload["points"]) == 129
        assert payload["branch"] == "plus"
        assert len(payload["geodesic_deviation_rad"]) == 2

    def test_output_file(self, tmp_path):
        target = tmp_path / "path.csv"
        code, out, _ = invoke(
            ["trace-path", "--theta", "pi/4", "--samples", "64", "--output", str(target)]
        )
        assert code == 0
        assert out == ""
        assert target.read_text().startswith("time_s,x,y,z,branch")


class TestCheckTransportCommand:
    def test_clean_lunes_pass(self):
        for theta in ("pi/8", "pi/3"):
            code, out, _ = invoke(["check-transport", "--theta", theta])
            assert code == 0, theta
            assert "# transport = pass" in out

    def test_perturbed_path_fails_with_dynamical_phase(self):
        code, out, _ = invoke(
            ["check-transport", "--theta", "pi/3", "--perturb", "0.01"]
        )
        assert code == 1
        assert "# transport = fail" in out
        first = out.strip().split("\n")[1].split(",")
        assert abs(float(first[2])) > 1e-6  # dynamical phase is visibly nonzero
        assert first[3] == "false"

    def test_json_report(self):
        code, out, _ = invoke(
            ["check-transport", "--theta", "pi/8", "--format", "json"]
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["pass"] is True
        assert [seg["segment"] for seg in payload["segments"]] == [1, 2]


class TestParseCommand:
    def test_bundled_preparation_program(self):
        with resources.as_file(bundled_program_path()) as path:
            code, out, _ = invoke(["parse", str(path)])
        assert code == 0
        assert "# events = 6" in out
        assert f"# total_duration_s = {1.0 / (2 * 214.5)!r}" in out

    def test_unknown_spin_diagnostic(self, tmp_path):
        bad = tmp_path / "bad.seq"
        bad.write_text("pulse c x 90deg\n")
        code, _, err = invoke(["parse", str(bad)])
        assert code == 2
        assert "spin" in err
        assert "1:7" in err

    def test_round_trip_is_identity(self, tmp_path):
        with resources.as_file(bundled_program_path()) as path:
            _, first, _ = invoke(["parse", str(path)])
        rendered = "\n".join(
            l for l in first.strip().split("\n") if not l.startswith("#")
        )
        again = tmp_path / "again.seq"
        again.write_text(rendered + "\n")
        code, second, _ = invoke(["parse", str(again)])
        assert code == 0
        assert second == first

    def test_missing_file(self, tmp_path):
        code, _, err = invoke(["parse", str(tmp_path / "absent.seq")])
        assert code == 2
        assert "absent" in err

    def test_json_report(self):
        with resources.as_file(bundled_program_path()) as path:
            code, out, _ = invoke(["parse", str(path), "--format", "json"])
        assert code == 0
        payload = json.loads(out)
        assert payload["event_count"] == 6
        assert payload["events"][0].startswith("pulse b x")


class TestExitCodeContract:
    def test_unknown_subcommand(self):
        code, _, _ = invoke(["spectrometer"])
        assert code == 2

    def test_unknown_flag(self):
        code, _, _ = invoke(["theory", "--omega", "pi", "--plot"])
        assert code == 2

    def test_help_exits_zero(self):
        code, _, _ = invoke(["--help"])
        assert code == 0

    def test_bad_convention_string(self):
        code, _, err = invoke(
            ["theory", "--omega", "pi/2", "--convention", "sense=2"]
        )
        assert code == 2

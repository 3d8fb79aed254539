import csv
import json
import math
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from salvo_sim import cli, plotting
from salvo_sim.output import csv_header, record_rows, summary_dict
from salvo_sim.scenario import bundled_scenario_path

from conftest import scenario_run

SVG = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def sc1_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("sc1")
    code = cli.main(["run", "scenario1", "--out", str(out)])
    return code, out


def test_run_writes_every_artifact(sc1_out):
    code, out = sc1_out
    assert code == 0
    for name in ("record.csv", "summary.json", *plotting.PLOTS):
        assert (out / name).stat().st_size > 0


def test_summary_reports_simultaneous_interception(sc1_out):
    summary = json.loads((sc1_out[1] / "summary.json").read_text())
    assert summary["status"] == "intercepted"
    assert all(42.8 <= t <= 43.8 for t in summary["interception_times"])
    assert summary["spread"] < 0.1


def test_summary_times_equal_intercept_events(sc1_out):
    summary = json.loads((sc1_out[1] / "summary.json").read_text())
    events = {e["payload"]["pursuer"]: e["time"] for e in summary["events"] if e["kind"] == "intercept"}
    assert [events[i] for i in range(4)] == summary["interception_times"]


def test_csv_layout(sc1_out):
    with open(sc1_out[1] / "record.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == csv_header(4)
    assert rows[0][:8] == ["time", "x_1", "y_1", "V_1", "gamma_1", "tgo_1", "acmd_1", "afilt_1"]
    assert rows[0][-4:] == ["x_T", "y_T", "V_T", "gamma_T"]
    first = [float(v) for v in rows[1]]
    assert first[0] == 0.0 and first[3] == 73.0 and first[4] == pytest.approx(10.0)
    assert first[5] == pytest.approx(40.463, abs=0.005)
    assert rows[-1][5] == ""  # the closing row has no time-to-go


def test_record_rows_round_trip(sc1_run):
    table = record_rows(sc1_run)
    np.testing.assert_array_equal(table[:, 0], sc1_run.times)
    np.testing.assert_allclose(table[:, 4 + 7], np.degrees(sc1_run.pursuer_states[:, 1, 3]))


def test_summary_is_strict_json(sc1_run):
    text = json.dumps(summary_dict(sc1_run), allow_nan=False)
    assert "NaN" not in text


def test_missing_scenario_exits_one(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1
    assert "scenario file not found" in capsys.readouterr().err


def test_timeout_exit_code(tmp_path):
    data = json.loads(bundled_scenario_path("scenario2").read_text())
    data["sim"]["t_max"] = 3.0
    data["output"]["plots"] = False
    path = tmp_path / "short.json"
    path.write_text(json.dumps(data))
    assert cli.main(["run", str(path), "--out", str(tmp_path / "o")]) == 2
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["status"] == "timeout"


def test_validate_prints_spectrum_and_tgo(capsys):
    assert cli.main(["validate", "scenario2"]) == 0
    out = capsys.readouterr().out
    assert "lambda2: 1" in out
    assert "[14.330, 14.012, 13.342, 14.639]" in out


def test_validate_rejects_bad_gains(tmp_path, capsys):
    data = json.loads(bundled_scenario_path("scenario1").read_text())
    data["gains"]["beta"] = 0.5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert cli.main(["validate", str(path)]) == 1
    assert "beta >= 1/lambda2" in capsys.readouterr().err


def test_plugin_scenario_without_plugin(capsys):
    assert cli.main(["validate", "scenario4"]) == 1
    assert "--plugin" in capsys.readouterr().err


def test_plugin_module_flag(tmp_path, monkeypatch, capsys):
    (tmp_path / "pip_plugin.py").write_text(
        "from salvo_sim.engagement import ChannelMode\n"
        "from salvo_sim.guidance import affine_dpg, register_plugin, unregister_plugin\n"
        "class Pursuit:\n"
        "    channel = ChannelMode.LATERAL_ONLY\n"
        "    def affine(self, view, v_p, v_t):\n"
        "        return affine_dpg(view, v_p, v_t)\n"
        "    def base_command(self, view, v_p, v_t):\n"
        "        return v_p * view.theta_dot\n"
        "unregister_plugin('pip')\n"
        "register_plugin('pip', Pursuit())\n"
    )
    monkeypatch.syspath_prepend(str(tmp_path))
    try:
        assert cli.main(["--plugin", "pip_plugin", "validate", "scenario4"]) == 0
    finally:
        from salvo_sim.guidance import unregister_plugin

        unregister_plugin("pip")
        sys.modules.pop("pip_plugin", None)
    assert "admissible" in capsys.readouterr().out


def test_plot_failure_leaves_data_intact(tmp_path, monkeypatch, capsys):
    def broken(record, out_dir):
        (out_dir / "trajectories.svg").write_text("<svg")
        raise RuntimeError("renderer exploded")

    monkeypatch.setattr(plotting, "write_plots", broken)
    assert cli.main(["run", "scenario2", "--out", str(tmp_path)]) == 0
    assert "plot rendering failed" in capsys.readouterr().err
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["status"] == "intercepted"
    with open(tmp_path / "record.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == len(scenario_run("scenario2").times) + 1


def test_no_plots_flag(tmp_path):
    assert cli.main(["run", "scenario2", "--out", str(tmp_path), "--no-plots", "--decimate", "100"]) == 0
    assert not list(tmp_path.glob("*.svg"))
    with open(tmp_path / "record.csv", newline="") as fh:
        assert len(list(csv.reader(fh))) < 200


def test_svg_files_are_well_formed(sc1_out):
    for name in plotting.PLOTS:
        root = ET.parse(sc1_out[1] / name).getroot()
        assert root.tag == SVG + "svg"
        assert len(root.findall(f".//{SVG}polyline")) >= 4


def test_trajectory_plot_has_target_and_pursuers(sc1_run):
    svg = plotting.trajectory_figure(sc1_run).to_svg()
    for label in ("P1", "P2", "P3", "P4", "Target"):
        assert f">{label}<" in svg


def test_nice_ticks():
    assert plotting.nice_ticks(0, 10) == [0, 2, 4, 6, 8, 10]
    assert plotting.nice_ticks(-0.3, 0.3, 3) == pytest.approx([-0.2, 0.0, 0.2])
    assert plotting.nice_ticks(1.0, 1.0) == [1.0]
    assert plotting.nice_ticks(math.nan, 1.0) == []


def test_report_obscurity(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = cli.main(
        ["report-obscurity", "scenario1", "scenario1", "--runs", "200", "--times", "5", "10", "--out", str(out)]
    )
    assert code == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 2 * 4 * 2
    assert all(set(r) == {"feature", "tv", "n_runs", "bins", "sigma"} for r in rows)
    assert all(0 <= r["tv"] <= 1 and r["n_runs"] == 200 and r["sigma"] == 50 for r in rows)
    assert "epsilon-hat" in capsys.readouterr().err


def test_report_obscurity_default_times_to_stdout(capsys):
    assert cli.main(["report-obscurity", "scenario2", "scenario2", "--runs", "50", "--operator", "bearings"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 8 * 4
    assert rows[0]["feature"].startswith("bearings/P1/value@")

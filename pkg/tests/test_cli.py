"""CLI subcommands: inversion round trips, figure export, sweeps, exit codes."""

import json

import numpy as np
import pytest

from nvvm.cli import main
from nvvm.config import ConfigError, RunConfig

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")

TAU = 2.0 * np.pi


class TestInvertCommand:
    def test_axial_closed_form(self, capsys):
        # omega_+- = (D +- gamma_e * 1 mT) / 2pi in MHz
        code = main(
            ["invert", "--omega-plus", "2898.0", "--omega-minus", "2842.0", "--json"]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["b_mt"] == pytest.approx(1.0, rel=1e-9)
        assert out["theta_deg"] == pytest.approx(0.0, abs=1e-2)

    def test_round_trip_through_eig(self, capsys):
        code = main(["eig", "--b", "8.0", "--theta", "40.0", "--json"])
        assert code == 0
        eig = json.loads(capsys.readouterr().out)
        code = main(
            [
                "invert",
                "--omega-plus",
                repr(eig["omega_plus_mhz"]),
                "--omega-minus",
                repr(eig["omega_minus_mhz"]),
                "--json",
            ]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["b_mt"] == pytest.approx(8.0, rel=1e-9)
        assert out["theta_deg"] == pytest.approx(40.0, rel=1e-9)

    def test_malformed_pair_exits_2(self, capsys):
        code = main(
            ["invert", "--omega-plus", "2842.0", "--omega-minus", "2898.0"]
        )
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestRabiAndEllipse:
    def test_rabi_all_methods(self, capsys):
        code = main(
            ["rabi", "--b", "8", "--theta", "10", "--phi-mw", "270", "--json"]
        )
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert set(out) == {"exact", "qubit", "perturbative"}
        assert out["exact"]["lambda_mhz"] == pytest.approx(
            out["qubit"]["lambda_mhz"], rel=2e-3
        )

    def test_rabi_axial_reports_qubit_unavailable(self, capsys):
        code = main(["rabi", "--b", "8", "--theta", "0", "--json"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert "error" in out["qubit"]
        assert "lambda_mhz" in out["exact"]

    def test_ellipse_trace_csv(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        code = main(
            [
                "ellipse", "--method", "qubit", "--b", "8", "--theta", "40",
                "--points", "37", "--out", str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "phi_deg,re_mhz,im_mhz"
        assert len(lines) == 38


class TestFigureCommand:
    def test_fig2_writes_six_csvs_and_manifest(self, tmp_path):
        code = main(["figure", "fig2", "--out-dir", str(tmp_path)])
        assert code == 0
        csvs = sorted(p.name for p in tmp_path.glob("*.csv"))
        assert len(csvs) == 6
        assert csvs[0] == "fig2_theta10.csv"
        header = (tmp_path / "fig2_theta10.csv").read_text().splitlines()[0]
        assert header == "phi_deg,lambda_exact,lambda_qubit,lambda_pert"
        manifest = json.loads((tmp_path / "fig2_manifest.json").read_text())
        assert manifest["figure"] == "fig2"
        assert len(manifest["files"]) == 6
        assert manifest["config"]["b_mw_mt"] == 1.0

    def test_override_reflected_in_manifest(self, tmp_path):
        code = main(
            ["figure", "fig2", "--out-dir", str(tmp_path), "--b-mw", "2.0"]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "fig2_manifest.json").read_text())
        assert manifest["config"]["b_mw_mt"] == 2.0

    def test_unknown_figure_rejected(self, capsys):
        code = main(["figure", "fig99", "--out-dir", "out"])
        assert code == 2

    def test_manifest_hashes_match_files(self, tmp_path):
        from nvvm.output import sha256_file

        main(["figure", "fig3", "--out-dir", str(tmp_path)])
        manifest = json.loads((tmp_path / "fig3_manifest.json").read_text())
        for entry in manifest["files"]:
            assert sha256_file(tmp_path / entry["name"]) == entry["sha256"]

    def test_manifest_replay_reproduces_csvs(self, tmp_path):
        # the manifest's embedded config fully reconstructs the run
        from nvvm.cli import _write_figure
        from nvvm.output import sha256_file

        first = tmp_path / "first"
        main(["figure", "fig2", "--out-dir", str(first), "--b-mw", "1.5"])
        manifest = json.loads((first / "fig2_manifest.json").read_text())
        replay_config = RunConfig.from_dict(manifest["config"])
        replay = tmp_path / "replay"
        _write_figure("fig2", replay_config, replay)
        for entry in manifest["files"]:
            assert sha256_file(replay / entry["name"]) == entry["sha256"]

    def test_worker_env_cap_preserves_output(self, tmp_path, monkeypatch):
        main(["figure", "fig4", "--out-dir", str(tmp_path / "par")])
        monkeypatch.setenv("NVVM_WORKERS", "1")
        main(["figure", "fig4", "--out-dir", str(tmp_path / "serial")])
        for name in sorted(p.name for p in (tmp_path / "par").glob("*.csv")):
            assert (tmp_path / "par" / name).read_bytes() == (
                tmp_path / "serial" / name
            ).read_bytes()


class TestSweepCommand:
    def test_two_axis_sweep(self, tmp_path):
        config = RunConfig(
            sweep={"theta_deg": [10.0, 40.0], "phi_deg": [45.0, 90.0, 135.0]},
            quantities=("lambda_mhz", "d_lambda_d_phi_mhz"),
            output_dir=str(tmp_path / "out"),
        )
        cfg_path = tmp_path / "sweep.json"
        cfg_path.write_text(config.to_json())
        code = main(["sweep", "--config", str(cfg_path)])
        assert code == 0
        lines = (tmp_path / "out" / "sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "phi_deg,theta_deg,lambda_mhz,d_lambda_d_phi_mhz,error"
        assert len(lines) == 7
        manifest = json.loads((tmp_path / "out" / "sweep_manifest.json").read_text())
        assert manifest["failed_cells"] == 0

    def test_empty_grid_rejected_before_compute(self, tmp_path):
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text(
            json.dumps({"sweep": {"phi_deg": []}, "output_dir": str(tmp_path)})
        )
        code = main(["sweep", "--config", str(cfg_path)])
        assert code == 2

    def test_parse_error_diagnostic(self, tmp_path, capsys):
        cfg_path = tmp_path / "broken.json"
        cfg_path.write_text('{"sweep": ')
        code = main(["sweep", "--config", str(cfg_path)])
        assert code == 2
        assert "line" in capsys.readouterr().err

    def test_partial_failure_recorded(self, tmp_path):
        # theta = 0 makes the qubit closed form singular; that cell keeps
        # an error string while the others carry values
        config = RunConfig(
            sweep={"theta_deg": [0.0, 40.0]},
            quantities=("lambda_qubit_mhz",),
            output_dir=str(tmp_path / "out"),
        )
        cfg_path = tmp_path / "sweep.json"
        cfg_path.write_text(config.to_json())
        code = main(["sweep", "--config", str(cfg_path)])
        assert code == 0
        lines = (tmp_path / "out" / "sweep.csv").read_text().strip().splitlines()
        assert "AxialFieldError" in lines[1]
        assert lines[2].endswith(",")
        manifest = json.loads((tmp_path / "out" / "sweep_manifest.json").read_text())
        assert manifest["failed_cells"] == 1

    def test_ghz_heisenberg_columns(self, tmp_path):
        # gamma = 0 entangled sweep over L: delta_phi follows 1/L at the cap
        config = RunConfig(
            scheme="ghz_rabi",
            gamma_per_us=0.0,
            n_max=4,
            phi_mw_deg=-90.0,
            sweep={"L": [1, 2, 4]},
            quantities=("delta_phi",),
            output_dir=str(tmp_path / "out"),
        )
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(config.to_json())
        code = main(["sweep", "--config", str(cfg_path)])
        assert code == 0
        lines = (tmp_path / "out" / "sweep.csv").read_text().strip().splitlines()
        deltas = {
            int(float(r.split(",")[0])): float(r.split(",")[1]) for r in lines[1:]
        }
        # tau grids scale as 1/L at the cap, so delta scales as L^(-1/2)
        assert deltas[2] == pytest.approx(deltas[1] / np.sqrt(2.0), rel=5e-2)
        assert deltas[4] == pytest.approx(deltas[1] / 2.0, rel=5e-2)


class TestConfig:
    def test_round_trip(self):
        config = RunConfig(theta_deg=55.0, sweep={"phi_deg": [1.0, 2.0]})
        assert RunConfig.from_json(config.to_json()) == config

    def test_content_hash_stable(self):
        a = RunConfig()
        b = RunConfig()
        assert a.content_hash() == b.content_hash()
        assert a.content_hash() != a.patched(b_mt=9.0).content_hash()

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"unknown_key": 1})

    def test_unknown_axis_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig(sweep={"bogus": [1]})

    def test_angles_converted_at_boundary(self):
        config = RunConfig(theta_deg=90.0, phi_s_deg=180.0)
        fld = config.static_field()
        assert fld.theta == pytest.approx(np.pi / 2)
        assert fld.phi_s == pytest.approx(np.pi)


class TestExitCodes:
    def test_version(self, capsys):
        assert main(["--version"]) == 0

    def test_usage_error(self):
        assert main(["invert"]) == 2

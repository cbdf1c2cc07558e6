import json
from pathlib import Path

import numpy as np
import pytest

from rdlab import RadarConfig, SceneSpec, read_rd_cube, synthesize_dataset
from rdlab.cli import dispatch
from rdlab.evaluation import read_metrics_csv


@pytest.fixture(scope="module")
def cli_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_ds")
    synthesize_dataset(SceneSpec(sequences=1, frames_per_sequence=6, master_seed=8), out)
    return out


class TestSimulate:
    def test_scenario_writes_complex_cube(self, tmp_path):
        out = tmp_path / "ridge.rdc"
        assert dispatch(["simulate", "--scenario", "3", "--seed", "1", "--out", str(out)]) == 0
        cube = read_rd_cube(out)
        assert np.iscomplexobj(cube)
        assert cube.shape == (1, 64, 128)

    def test_invalid_scenario_exits_2(self, tmp_path):
        code = dispatch(["simulate", "--scenario", "9", "--out", str(tmp_path / "x.rdc")])
        assert code == 2

    def test_unknown_flag_exits_2(self, tmp_path):
        assert dispatch(["simulate", "--frobnicate", "--out", str(tmp_path / "x.rdc")]) == 2

    def test_seed_reproducibility(self, tmp_path):
        a, b, c = (tmp_path / n for n in ("a.rdc", "b.rdc", "c.rdc"))
        dispatch(["simulate", "--scenario", "2", "--seed", "5", "--out", str(a)])
        dispatch(["simulate", "--scenario", "2", "--seed", "5", "--out", str(b)])
        dispatch(["simulate", "--scenario", "2", "--seed", "6", "--out", str(c)])
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes() != c.read_bytes()

    def test_custom_targets_and_config(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(RadarConfig().to_json())
        targets_path = tmp_path / "targets.json"
        targets_path.write_text(json.dumps([{"range_m": 20.0, "radial_velocity_mps": 3.0,
                                             "rcs_m2": 5.0}]))
        out = tmp_path / "frame.rdc"
        code = dispatch(["simulate", "--config", str(cfg_path), "--targets", str(targets_path),
                         "--out", str(out)])
        assert code == 0 and out.exists()


class TestMitigate:
    def test_round_trip(self, tmp_path):
        frame_path = tmp_path / "in.rdc"
        out_path = tmp_path / "out.rdc"
        dispatch(["simulate", "--scenario", "2", "--seed", "3", "--out", str(frame_path)])
        code = dispatch(["mitigate", "--in", str(frame_path), "--method", "imat",
                         "--out", str(out_path)])
        assert code == 0
        assert read_rd_cube(out_path).shape == read_rd_cube(frame_path).shape

    def test_magnitude_cube_rejected(self, tmp_path, cli_dataset):
        _, samples = __import__("rdlab").load_manifest(cli_dataset)
        mag_cube = Path(cli_dataset) / samples[0].files["t"]["path"]
        code = dispatch(["mitigate", "--in", str(mag_cube), "--method", "zeroing",
                         "--out", str(tmp_path / "o.rdc")])
        assert code == 1


class TestSynthesizeDatasetCommand:
    def test_writes_manifest(self, tmp_path):
        scene_path = tmp_path / "scene.json"
        scene_path.write_text(json.dumps({"sequences": 1, "frames_per_sequence": 3,
                                          "master_seed": 4}))
        out_dir = tmp_path / "ds"
        code = dispatch(["synthesize-dataset", "--scene", str(scene_path),
                         "--out-dir", str(out_dir), "--jobs", "1"])
        assert code == 0
        assert (out_dir / "manifest.jsonl").exists()

    def test_seed_override(self, tmp_path):
        scene_path = tmp_path / "scene.json"
        scene_path.write_text(json.dumps({"sequences": 1, "frames_per_sequence": 3}))
        a, b = tmp_path / "a", tmp_path / "b"
        dispatch(["synthesize-dataset", "--scene", str(scene_path), "--out-dir", str(a),
                  "--seed", "99"])
        dispatch(["synthesize-dataset", "--scene", str(scene_path), "--out-dir", str(b),
                  "--seed", "99"])
        for name in sorted(p.name for p in a.iterdir()):
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestEvaluate:
    def test_report_csv(self, tmp_path, cli_dataset):
        report = tmp_path / "report.csv"
        code = dispatch(["evaluate", "--dataset", str(cli_dataset), "--method", "imat",
                         "--split", "all", "--report", str(report)])
        assert code == 0
        rows = read_metrics_csv(report)
        assert rows and all(r.method == "imat" for r in rows)
        header = report.read_text().splitlines()[0]
        assert header == "sample_id,method,sinr_db,evm,ap_percent"

    def test_jsonl_log(self, tmp_path, cli_dataset):
        report = tmp_path / "report.csv"
        log = tmp_path / "report.jsonl"
        code = dispatch(["evaluate", "--dataset", str(cli_dataset), "--method", "corrupted",
                         "--split", "all", "--report", str(report),
                         "--report-jsonl", str(log)])
        assert code == 0
        lines = log.read_text().splitlines()
        assert lines and json.loads(lines[0])["method"] == "corrupted"

    def test_missing_dataset_exits_1(self, tmp_path):
        code = dispatch(["evaluate", "--dataset", str(tmp_path / "nope"), "--method",
                         "imat", "--report", str(tmp_path / "r.csv")])
        assert code == 1

    def test_bad_method_exits_2(self, tmp_path, cli_dataset):
        code = dispatch(["evaluate", "--dataset", str(cli_dataset), "--method", "magic",
                         "--report", str(tmp_path / "r.csv")])
        assert code == 2


class TestExportMap:
    def test_pgm_and_axes(self, tmp_path):
        frame_path = tmp_path / "in.rdc"
        dispatch(["simulate", "--scenario", "1", "--seed", "2", "--out", str(frame_path)])
        pgm = tmp_path / "map.pgm"
        axes = tmp_path / "axes.csv"
        code = dispatch(["export-map", "--in", str(frame_path), "--frame", "0",
                         "--out-pgm", str(pgm), "--out-axes", str(axes)])
        assert code == 0
        raw = pgm.read_bytes()
        assert raw.startswith(b"P5\n128 64\n65535\n")
        assert len(raw) == len(b"P5\n128 64\n65535\n") + 64 * 128 * 2
        lines = axes.read_text().splitlines()
        assert lines[0] == "axis,bin,value"
        assert sum(1 for l in lines if l.startswith("range_m")) == 64
        assert sum(1 for l in lines if l.startswith("velocity_mps")) == 128

    def test_frame_out_of_range_exits_1(self, tmp_path):
        frame_path = tmp_path / "in.rdc"
        dispatch(["simulate", "--scenario", "1", "--out", str(frame_path)])
        code = dispatch(["export-map", "--in", str(frame_path), "--frame", "5",
                         "--out-pgm", str(tmp_path / "m.pgm"),
                         "--out-axes", str(tmp_path / "a.csv")])
        assert code == 1


class TestConsoleEntry:
    def test_installed_script(self, tmp_path):
        import subprocess

        result = subprocess.run(["rdlab", "--version"], capture_output=True, text=True)
        assert result.returncode == 0
        assert "rdlab" in result.stdout

    def test_rdlab_log_env(self, tmp_path):
        import subprocess

        out = tmp_path / "f.rdc"
        result = subprocess.run(
            ["rdlab", "simulate", "--scenario", "1", "--out", str(out)],
            capture_output=True, text=True, env={"PATH": "/usr/local/bin:/usr/bin:/bin",
                                                 "RDLAB_LOG": "info"},
        )
        assert result.returncode == 0

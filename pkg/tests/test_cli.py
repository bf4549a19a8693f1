"""
CLI Tests
=========

End-to-end runs of the fiducial-splat subcommands through main().
"""

import json
import shutil
import tempfile
from pathlib import Path

import pytest

from fiducial_splat.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main, parse_angles
from fiducial_splat.core.marker_io import read_image
from fiducial_splat.core.splat_generator import load_splats
from fiducial_splat.utils.error_handler import ConfigurationError


class TestParseAngles:
    def test_default_range(self):
        angles = parse_angles("0:85:5")
        assert len(angles) == 18
        assert (angles[0], angles[-1]) == (0.0, 85.0)

    def test_stop_off_the_step_grid(self):
        assert parse_angles("0:10:3") == [0.0, 3.0, 6.0, 9.0]

    def test_single_angle(self):
        assert parse_angles("30:30:5") == [30.0]

    @pytest.mark.parametrize("spec", ["0:10:0", "0:10:-1", "10:0:5", "0:10", "a:b:c"])
    def test_invalid(self, spec):
        with pytest.raises(ConfigurationError):
            parse_angles(spec)


@pytest.mark.integration
class TestCommands:
    """Subcommand exit codes and outputs."""

    def setup_method(self):
        self.temp_dir = Path(tempfile.mkdtemp(prefix="cli_test_"))
        self.plus = str(Path(__file__).parent / "data" / "plus.txt")
        self.solid = str(Path(__file__).parent / "data" / "solid.txt")

    def teardown_method(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def _generate(self, name="plus.ply", *extra):
        out = str(self.temp_dir / name)
        assert main(["generate", "--input", self.plus, "--out", out, *extra]) == EXIT_OK
        return out

    def test_partition(self, capsys):
        out = self.temp_dir / "part.json"
        assert main(["partition", "--input", self.plus, "--out", str(out)]) == EXIT_OK
        stdout = capsys.readouterr().out
        assert "rects: 7" in stdout
        assert json.loads(out.read_text())["rect_count"] == 7

    def test_partition_dark_only(self, capsys):
        assert main(["partition", "--input", self.plus, "--colors", "dark"]) == EXIT_OK
        assert "rects: 3" in capsys.readouterr().out

    def test_generate(self, capsys):
        out = self._generate("plus.json", "--levels", "2", "--rho", "1", "--no-timing")
        stdout = capsys.readouterr().out
        assert "splats: 63" in stdout
        assert "construction_time" not in stdout
        assert len(load_splats(out)) == 63

    def test_generate_reports_time(self, capsys):
        self._generate()
        assert "construction_time:" in capsys.readouterr().out

    def test_missing_input(self, capsys):
        code = main(["generate", "--input", str(self.temp_dir / "nope.txt"), "--out", str(self.temp_dir / "x.ply")])
        assert code == EXIT_DATA
        assert "error:" in capsys.readouterr().err

    def test_invalid_levels(self):
        out = str(self.temp_dir / "x.ply")
        assert main(["generate", "--input", self.plus, "--out", out, "--levels", "0"]) == EXIT_USAGE

    def test_unknown_output_suffix(self):
        out = str(self.temp_dir / "x.obj")
        assert main(["generate", "--input", self.plus, "--out", out]) == EXIT_USAGE

    def test_render(self):
        splats = self._generate()
        out = self.temp_dir / "frame.pgm"
        assert main(["render", "--splats", splats, "--theta", "30", "--res", "64x48", "--out", str(out)]) == EXIT_OK
        image = read_image(out)
        assert (image.width, image.height, image.channels) == (64, 48, 1)

    def test_render_unknown_splat_suffix(self, capsys):
        splats = self.temp_dir / "plus.obj"
        splats.write_text("{}", encoding="utf-8")
        out = str(self.temp_dir / "frame.pgm")
        assert main(["render", "--splats", str(splats), "--res", "32x32", "--out", out]) == EXIT_DATA
        assert "extension" in capsys.readouterr().err

    @pytest.mark.parametrize("name,content", [("bad.ply", b"garbage\n"), ("bad.json", b"\xff\x00{")])
    def test_unreadable_splats(self, name, content):
        splats = self.temp_dir / name
        splats.write_bytes(content)
        out = str(self.temp_dir / "frame.pgm")
        assert main(["render", "--splats", str(splats), "--res", "32x32", "--out", out]) == EXIT_DATA
        argv = ["sweep", "--splats", str(splats), "--truth", self.plus, "--angles", "0:0:5"]
        assert main(argv) == EXIT_DATA

    def test_render_rejects_grazing_angle(self):
        splats = self._generate()
        out = str(self.temp_dir / "frame.pgm")
        assert main(["render", "--splats", splats, "--theta", "90", "--res", "32x32", "--out", out]) == EXIT_USAGE

    def test_sweep_is_deterministic(self, capsys):
        splats = self._generate()
        capsys.readouterr()  # discard setup output from generate
        argv = ["sweep", "--splats", splats, "--truth", self.plus, "--angles", "0:40:20", "--res", "96x96", "--no-timing"]
        assert main(argv) == EXIT_OK
        first = capsys.readouterr()
        assert main(argv) == EXIT_OK
        second = capsys.readouterr()
        assert first.out == second.out
        report = json.loads(first.out)
        assert [record["theta"] for record in report["records"]] == [0.0, 20.0, 40.0]
        assert "theta_decode: " not in first.out
        assert "theta_decode: " in first.err

    def test_sweep_report_file(self, capsys):
        splats = self._generate()
        report = self.temp_dir / "sweep.json"
        argv = ["sweep", "--splats", splats, "--truth", self.plus, "--angles", "0:0:5", "--res", "96x96",
                "--report", str(report)]
        assert main(argv) == EXIT_OK
        data = json.loads(report.read_text())
        assert data["theta_decode"] == 0.0
        assert "timing" in data
        assert "theta_decode: 0" in capsys.readouterr().out

    def test_sweep_zero_step(self):
        splats = self._generate()
        argv = ["sweep", "--splats", splats, "--truth", self.plus, "--angles", "0:10:0"]
        assert main(argv) == EXIT_USAGE

    def test_metrics(self, capsys):
        splats = self._generate()
        image = str(self.temp_dir / "a.pgm")
        assert main(["render", "--splats", splats, "--res", "64x64", "--out", image]) == EXIT_OK
        capsys.readouterr()
        assert main(["metrics", "--ref", image, "--test", image, "--truth", self.plus]) == EXIT_OK
        record = json.loads(capsys.readouterr().out)
        assert record["psnr"] == "inf"
        assert record["lpips"] == "unavailable"
        assert record["bit_accuracy"] == 1.0

    def test_metrics_size_mismatch(self):
        splats = self._generate()
        a = str(self.temp_dir / "a.pgm")
        b = str(self.temp_dir / "b.pgm")
        assert main(["render", "--splats", splats, "--res", "32x32", "--out", a]) == EXIT_OK
        assert main(["render", "--splats", splats, "--res", "48x32", "--out", b]) == EXIT_OK
        assert main(["metrics", "--ref", a, "--test", b]) == EXIT_DATA

    def test_counts(self, capsys):
        argv = ["counts", "--input", self.plus, self.solid, "--levels", "1", "--rho", "1", "--no-timing"]
        assert main(argv) == EXIT_OK
        lines = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert [line.get("primitive_count") for line in lines[:2]] == [7, 1]
        assert lines[0]["category"] == "small"
        assert "construction_time" not in lines[0]
        assert lines[2]["summary"]["small"]["markers"] == 2

    def test_config_file(self, capsys):
        config = self.temp_dir / "config.yaml"
        config.write_text("approx:\n  levels: 1\n  rho: 1\n", encoding="utf-8")
        out = str(self.temp_dir / "plus.ply")
        assert main(["--config", str(config), "generate", "--input", self.plus, "--out", out]) == EXIT_OK
        assert "splats: 7" in capsys.readouterr().out

    def test_config_unknown_key(self):
        config = self.temp_dir / "config.yaml"
        config.write_text("approx:\n  level: 1\n", encoding="utf-8")
        out = str(self.temp_dir / "plus.ply")
        assert main(["--config", str(config), "generate", "--input", self.plus, "--out", out]) == EXIT_USAGE

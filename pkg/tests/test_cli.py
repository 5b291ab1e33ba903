"""Command line behaviour: outputs, exit codes, and the full pipeline."""

import math

import numpy as np
import pytest

import plenax as px
from plenax.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="session")
def f197_cfg_path():
    return str(px.fixture_path("f197_mla2_inf"))


class TestPredict:
    def test_reference_row(self, capsys, f197_cfg_path):
        code, out, _ = run(
            capsys, "predict", f197_cfg_path, "--gaps", "4", "--disparities", "2"
        )
        assert code == 0
        lines = [l for l in out.splitlines() if l and not l.startswith("#")]
        assert lines[0] == "G,dx,B_mm,Phi_deg,Z_mm"
        fields = lines[1].split(",")
        assert fields[0] == "4" and fields[1] == "2"
        assert float(fields[2]) == pytest.approx(2.5806, abs=5e-4)
        assert float(fields[3]) == pytest.approx(0.0, abs=5e-4)
        assert float(fields[4]) == pytest.approx(2034.8, abs=0.05)

    def test_zero_disparity_at_infinity_prints_inf(self, capsys, f197_cfg_path):
        code, out, _ = run(
            capsys, "predict", f197_cfg_path, "--gaps", "2", "--disparities", "0"
        )
        assert code == 0
        row = [l for l in out.splitlines() if l.startswith("2,0,")][0]
        assert row.split(",")[4] == "inf"

    def test_empty_gap_list_gives_header_only(self, capsys, f197_cfg_path):
        code, out, _ = run(capsys, "predict", f197_cfg_path, "--gaps", "")
        assert code == 0
        data = [l for l in out.splitlines() if l and not l.startswith("#")]
        assert data == ["G,dx,B_mm,Phi_deg,Z_mm"]

    def test_byte_stable(self, capsys, f197_cfg_path, tmp_path):
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["predict", f197_cfg_path, "--out", str(out_a)]) == 0
        assert main(["predict", f197_cfg_path, "--out", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        assert out_a.read_text().startswith("#")

    def test_metadata_lines_are_comments(self, capsys, f197_cfg_path):
        code, out, _ = run(capsys, "predict", f197_cfg_path, "--gaps", "1")
        header = [l for l in out.splitlines() if l.startswith("#")]
        assert any("b_u_mm" in l for l in header)
        assert any("entrance_pupil_mm" in l for l in header)

    def test_pupil_diameter_warning(self, capsys, f197_cfg_path):
        code, out, err = run(
            capsys, "predict", f197_cfg_path, "--gaps", "12", "--pupil-diameter-mm", "5.0"
        )
        assert code == 0
        assert "exceeds" in err

    def test_bad_config_reports_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[sensor]\npixel_pitch_mm = 0.009\n")
        code, out, err = run(capsys, "predict", str(bad))
        assert code == 1
        assert err.startswith("error:")


@pytest.fixture(scope="session")
def pipeline(tmp_path_factory, f197_cfg_path):
    root = tmp_path_factory.mktemp("pipeline")
    scene = root / "scene.txt"
    # Period chosen off the sampling lattice; the matched pair then sees
    # clean two-pixel structure (see conftest for the rationale).
    scene.write_text("plane 2034.788993120814 checker 8.644888669090911\n")
    raw = root / "raw.pgm"
    views = root / "views"
    assert main(["render", str(f197_cfg_path), str(scene), str(raw)]) == 0
    assert main(["extract", str(f197_cfg_path), str(raw), str(views)]) == 0
    return root


class TestRenderExtractPipeline:
    def test_views_written(self, pipeline):
        views = pipeline / "views"
        files = sorted(p.name for p in views.iterdir())
        assert len(files) == 169
        assert "view_+0_+0.pgm" in files
        assert "view_-6_-6.pgm" in files

    def test_disparity_and_depth(self, pipeline, f197_cfg_path):
        views = pipeline / "views"
        disp = pipeline / "disp.csv"
        gray = pipeline / "disp.pgm"
        code = main([
            "disparity",
            str(views / "view_-2_+0.pgm"),
            str(views / "view_+2_+0.pgm"),
            "--out", str(disp),
            "--graymap", str(gray),
        ])
        assert code == 0
        values = px.read_map_csv(disp)
        finite = values[np.isfinite(values)]
        assert finite.mean() == pytest.approx(2.0, abs=0.25)
        img, maxval = px.read_pgm(gray)
        assert maxval == 65535 and img.shape == values.shape

        depth = pipeline / "depth.csv"
        code = main([
            "depth", f197_cfg_path, str(disp), "--gap", "4", "--out", str(depth)
        ])
        assert code == 0
        z = px.read_map_csv(depth)
        zf = z[np.isfinite(z) & (z > 0)]
        # Band the disparity tolerance maps to through the triangulation.
        config = px.load_fixture("f197_mla2_inf")
        state = px.derive_focus_state(config)
        array = px.build_virtual_camera_array(state, config)
        low = px.triangulate(array, px.TriangulationQuery(4, 2.25))
        high = px.triangulate(array, px.TriangulationQuery(4, 1.75))
        assert low < zf.mean() < high

    def test_extract_rejects_non_divisible_raw(self, capsys, tmp_path, f197_cfg_path):
        odd = tmp_path / "odd.pgm"
        px.write_pgm(odd, np.zeros((10, 10), dtype=np.uint16), maxval=255)
        code, _, err = run(capsys, "extract", f197_cfg_path, str(odd), str(tmp_path / "v"))
        assert code == 1
        assert "error:" in err

    def test_render_rejects_bad_scene(self, capsys, tmp_path, f197_cfg_path):
        scene = tmp_path / "scene.txt"
        scene.write_text("plane -5 checker 1\n")
        code, _, err = run(
            capsys, "render", f197_cfg_path, str(scene), str(tmp_path / "o.pgm")
        )
        assert code == 1
        assert "error:" in err


class TestDisparityCommand:
    def test_even_block_is_usage_error(self, tmp_path):
        img = tmp_path / "x.pgm"
        px.write_pgm(img, np.zeros((40, 40), dtype=np.uint16), maxval=255)
        with pytest.raises(SystemExit) as info:
            main([
                "disparity", str(img), str(img), "--block", "28",
                "--out", str(tmp_path / "d.csv"),
            ])
        assert info.value.code == 2

    def test_no_subpixel_yields_integers(self, tmp_path):
        rng = np.random.default_rng(3)
        a = rng.integers(0, 255, size=(40, 60), dtype=np.uint16)
        left, right = tmp_path / "l.pgm", tmp_path / "r.pgm"
        px.write_pgm(left, a, maxval=255)
        px.write_pgm(right, np.roll(a, -1, axis=1), maxval=255)
        out = tmp_path / "d.csv"
        code = main([
            "disparity", str(left), str(right),
            "--block", "9", "--maxd", "3", "--no-subpixel", "--out", str(out),
        ])
        assert code == 0
        values = px.read_map_csv(out)
        finite = values[np.isfinite(values)]
        assert np.all(finite == np.round(finite))
        assert (finite == 1.0).mean() > 0.95


class TestDepthCommand:
    def test_nan_propagates_and_inf_for_zero(self, tmp_path, f197_cfg_path):
        disp = tmp_path / "d.csv"
        px.write_map_csv(disp, np.array([[0.0, np.nan], [2.0, 4.0]]))
        out = tmp_path / "z.csv"
        assert main(["depth", f197_cfg_path, str(disp), "--gap", "4", "--out", str(out)]) == 0
        z = px.read_map_csv(out)
        assert math.isinf(z[0, 0]) and z[0, 0] > 0
        assert math.isnan(z[0, 1])
        assert z[1, 0] == pytest.approx(2034.788993120814, rel=1e-9)
        assert z[1, 1] == pytest.approx(z[1, 0] / 2, rel=1e-6)

    def test_header_names_config_and_gap(self, tmp_path, f197_cfg_path):
        disp = tmp_path / "d.csv"
        px.write_map_csv(disp, np.array([[1.0]]))
        out = tmp_path / "z.csv"
        main(["depth", f197_cfg_path, str(disp), "--gap", "2", "--out", str(out)])
        text = out.read_text()
        assert "# gap: 2" in text
        assert "baseline_mm" in text


class TestVerify:
    def test_all_fixtures_pass(self, capsys):
        code, out, _ = run(capsys, "verify")
        assert code == 0
        assert "checks passed" in out
        assert "FAIL" not in out

    def test_single_fixture(self, capsys):
        code, out, _ = run(capsys, "verify", "f90_mla2_3m")
        assert code == 0
        assert "f90_mla2_3m" in out

    def test_unknown_fixture_errors(self, capsys):
        code, _, err = run(capsys, "verify", "not_a_rig")
        assert code == 1
        assert "error:" in err

    def test_perturbed_focal_length_fails(self, capsys, tmp_path):
        text = px.fixture_path("f193_mla2_inf").read_text()
        text = text.replace("r1_mm", "# r1_mm").replace("r2_mm", "# r2_mm")
        text = text.replace("t_mm", "# t_mm").replace("n =", "# n =")
        text = text.replace("f_s_mm = 2.75", "f_s_mm = 2.7775")
        bad = tmp_path / "drifted.cfg"
        bad.write_text(text if "f_s_mm" in text else text + "\nf_s_mm = 2.7775\n")
        code, out, _ = run(
            capsys, "verify", "--config", str(bad), "--reference", "f193_mla2_inf"
        )
        assert code == 1
        assert "FAIL" in out

    def test_missing_front_vertex_skips_with_notice(self, capsys, tmp_path):
        text = px.fixture_path("f193_mla2_inf").read_text()
        lines = [l for l in text.splitlines() if not l.startswith("v1h1_mm")]
        trimmed = tmp_path / "no_vertex.cfg"
        trimmed.write_text("\n".join(lines) + "\n")
        code, out, _ = run(
            capsys, "verify", "--config", str(trimmed), "--reference", "f193_mla2_inf"
        )
        assert code == 0
        assert "SKIP" in out
        assert "front vertex" in out

    def test_config_without_reference_runs_consistency(self, capsys, f197_cfg_path):
        code, out, _ = run(capsys, "verify", "--config", f197_cfg_path)
        assert code == 0
        assert "checks passed" in out

    def test_reference_without_config_errors(self, capsys):
        code, _, err = run(capsys, "verify", "--reference", "f90_mla2_3m")
        assert code == 1
        assert "--config" in err

    def test_fixture_names_conflict_with_config(self, capsys, f197_cfg_path):
        code, _, err = run(capsys, "verify", "f90_mla2_3m", "--config", f197_cfg_path)
        assert code == 1
        assert "not both" in err


class TestTopLevel:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0

    def test_no_command_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2

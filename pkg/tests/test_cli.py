"""Command-line behavior: exit codes, file outputs, reproducibility."""

import json
import math

import numpy as np
import pytest

from sigscan import pnm
from sigscan.cli import main
from sigscan.synth import draw_polyline, gen_bernoulli


def write_scene(path, seed=42):
    rng = np.random.default_rng(seed)
    image = rng.random((24, 24)) < 0.05
    image[6:14, 4:12] = True
    pnm.write_bitmap(path, image)
    return image


class TestExitCodes:
    def test_no_subcommand(self, capsys):
        assert main([]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_missing_required_flag(self, capsys):
        assert main(["detect", "--family", "tile"]) == 1

    def test_bad_family_token(self, tmp_path, capsys):
        scene = tmp_path / "s.pbm"
        write_scene(scene)
        code = main(["detect", "--family", "blob", "--in", str(scene),
                     "--out", str(tmp_path / "o.json")])
        assert code == 1

    def test_missing_input_file(self, tmp_path, capsys):
        code = main(["detect", "--family", "tile", "--in", str(tmp_path / "nope.pbm"),
                     "--out", str(tmp_path / "o.json")])
        assert code == 2
        assert "cannot read" in capsys.readouterr().err

    def test_malformed_input_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.pbm"
        bad.write_bytes(b"P4\n9 9\n\x00")  # raster too short
        code = main(["detect", "--family", "tile", "--in", str(bad),
                     "--out", str(tmp_path / "o.json")])
        assert code == 2
        assert "malformed" in capsys.readouterr().err

    def test_gray_without_threshold(self, tmp_path, capsys):
        gray = tmp_path / "g.pgm"
        gray.write_text("P2\n4 4\n9\n" + "5 " * 16)
        code = main(["detect", "--family", "tile", "--in", str(gray),
                     "--out", str(tmp_path / "o.json")])
        assert code == 1
        assert "--threshold" in capsys.readouterr().err

    def test_threshold_on_bitmap(self, tmp_path, capsys):
        scene = tmp_path / "s.pbm"
        write_scene(scene)
        code = main(["detect", "--family", "tile", "--in", str(scene),
                     "--threshold", "4", "--out", str(tmp_path / "o.json")])
        assert code == 1

    def test_flag_family_mismatch(self, tmp_path, capsys):
        scene = tmp_path / "s.pbm"
        write_scene(scene)
        code = main(["detect", "--family", "tile", "--in", str(scene),
                     "--stride", "4", "--out", str(tmp_path / "o.json")])
        assert code == 1
        assert "--stride" in capsys.readouterr().err


class TestDetectCommand:
    def test_blank_input_empty_detections(self, tmp_path):
        scene = tmp_path / "blank.pbm"
        pnm.write_bitmap(scene, np.zeros((16, 16), bool))
        out = tmp_path / "o.json"
        assert main(["detect", "--family", "tile", "--in", str(scene),
                     "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["detections"] == []
        assert payload["p"] == 0.0
        assert payload["family"] == "tile"

    def test_planted_tile_payload_schema(self, tmp_path):
        scene = tmp_path / "s.pbm"
        write_scene(scene)
        out = tmp_path / "o.json"
        curve = tmp_path / "c.csv"
        overlay = tmp_path / "v.ppm"
        code = main(["detect", "--family", "tile", "--in", str(scene),
                     "--out", str(out), "--curve", str(curve),
                     "--overlay", str(overlay), "--seed", "0"])
        assert code == 0
        payload = json.loads(out.read_text())
        assert set(payload) == {"family", "image", "p", "ln_eta2", "detections"}
        assert payload["image"] == str(scene)
        assert len(payload["detections"]) >= 1
        top = payload["detections"][0]
        assert set(top) == {"params", "kappa", "nu", "significance", "iteration"}
        assert set(top["params"]) == {"x_lo", "y_lo", "x_hi", "y_hi"}
        assert top["significance"] > 0
        assert top["iteration"] == 0

        lines = curve.read_text().splitlines()
        assert lines[0] == "iteration,nu,kappa,significance"
        assert len(lines) > 1
        first = lines[1].split(",")
        assert int(first[0]) == 0 and int(first[2]) > 0

        raw = overlay.read_bytes()
        assert raw.startswith(b"P6\n24 24\n255\n")
        pixels = np.frombuffer(raw[len(b"P6\n24 24\n255\n"):], np.uint8)
        pixels = pixels.reshape(24, 24, 3)
        is_red = (pixels == (255, 0, 0)).all(axis=2)
        assert is_red.any()  # detected boundary drawn

    def test_nine_significant_digit_numbers(self, tmp_path):
        scene = tmp_path / "s.pbm"
        write_scene(scene)
        out = tmp_path / "o.json"
        main(["detect", "--family", "tile", "--in", str(scene), "--out", str(out)])
        payload = json.loads(out.read_text())
        s = payload["detections"][0]["significance"]
        assert s == float(format(s, ".9g"))
        assert payload["p"] == float(format(payload["p"], ".9g"))

    def test_eta2_override_lands_in_payload(self, tmp_path):
        scene = tmp_path / "s.pbm"
        write_scene(scene)
        out = tmp_path / "o.json"
        main(["detect", "--family", "tile", "--in", str(scene),
              "--out", str(out), "--eta2", "1000"])
        payload = json.loads(out.read_text())
        assert payload["ln_eta2"] == pytest.approx(math.log(1000.0), rel=1e-8)

    def test_gray_input_with_threshold(self, tmp_path):
        gray = tmp_path / "g.pgm"
        image = write_scene(tmp_path / "ref.pbm")
        body = "\n".join(" ".join("9" if v else "1" for v in row) for row in image)
        gray.write_text(f"P2\n24 24\n9\n{body}\n")
        out = tmp_path / "o.json"
        code = main(["detect", "--family", "tile", "--in", str(gray),
                     "--threshold", "5", "--out", str(out)])
        assert code == 0
        assert len(json.loads(out.read_text())["detections"]) >= 1

    def test_rerun_is_byte_identical(self, tmp_path):
        scene = tmp_path / "s.pbm"
        write_scene(scene)
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{tag}.json"
            curve = tmp_path / f"{tag}.csv"
            assert main(["detect", "--family", "strip", "--in", str(scene),
                         "--out", str(out), "--curve", str(curve),
                         "--seed", "3", "--threads", "1"]) == 0
            outs.append((out.read_bytes(), curve.read_bytes()))
        assert outs[0] == outs[1]

    def test_seed_env_var_used_as_default(self, tmp_path, monkeypatch):
        scene = tmp_path / "s.pbm"
        write_scene(scene)
        out_env = tmp_path / "env.json"
        out_flag = tmp_path / "flag.json"
        monkeypatch.setenv("SIGSCAN_SEED", "17")
        assert main(["detect", "--family", "tile", "--in", str(scene),
                     "--out", str(out_env)]) == 0
        monkeypatch.delenv("SIGSCAN_SEED")
        assert main(["detect", "--family", "tile", "--in", str(scene),
                     "--out", str(out_flag), "--seed", "17"]) == 0
        assert out_env.read_bytes() == out_flag.read_bytes()

    def test_bad_seed_env_var(self, tmp_path, monkeypatch, capsys):
        scene = tmp_path / "s.pbm"
        write_scene(scene)
        monkeypatch.setenv("SIGSCAN_SEED", "banana")
        code = main(["detect", "--family", "tile", "--in", str(scene),
                     "--out", str(tmp_path / "o.json")])
        assert code == 1


class TestCrackCommand:
    def test_end_to_end(self, tmp_path):
        image = gen_bernoulli(96, 32, 0.02, seed=13)
        image |= draw_polyline((32, 96), [(4, 16), (44, 16)])
        image |= draw_polyline((32, 96), [(54, 16), (92, 16)])
        scene = tmp_path / "cracky.pbm"
        pnm.write_bitmap(scene, image)
        mask_path = tmp_path / "mask.pbm"
        out = tmp_path / "o.json"
        code = main(["crack", "--in", str(scene), "--window", "32x32",
                     "--out-mask", str(mask_path), "--out", str(out), "--seed", "0"])
        assert code == 0
        mask = pnm.read_bitmap(mask_path)
        assert mask.shape == image.shape
        payload = json.loads(out.read_text())
        assert payload["family"] == "bstrip-chain"
        assert set(payload) == {"family", "image", "p", "ln_eta2", "detections"}

    def test_window_parse_error(self, tmp_path, capsys):
        code = main(["crack", "--in", "x.pbm", "--window", "64",
                     "--out-mask", "m.pbm", "--out", "o.json"])
        assert code == 1


class TestEvalCommand:
    def test_exact_match_statistics(self, tmp_path):
        det_dir = tmp_path / "det"
        gt_dir = tmp_path / "gt"
        det_dir.mkdir()
        gt_dir.mkdir()
        mask = np.zeros((10, 10), bool)
        mask[4, 2:8] = True
        pnm.write_bitmap(det_dir / "one.pbm", mask)
        pnm.write_bitmap(gt_dir / "one.pbm", mask)
        out = tmp_path / "scores.csv"
        code = main(["eval", "--det", str(det_dir), "--gt", str(gt_dir),
                     "--radius", "1", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "name,radius,precision,recall,tp,fp,fn"
        assert lines[1] == "one.pbm,1,1,1,6,0,0"
        stats = {row.split(",")[0] for row in lines[2:]}
        assert stats == {"mean", "median", "p25", "p75"}

    def test_single_file_pair(self, tmp_path):
        mask = np.zeros((6, 6), bool)
        mask[2, 2] = True
        pnm.write_bitmap(tmp_path / "d.pbm", mask)
        pnm.write_bitmap(tmp_path / "g.pbm", mask)
        out = tmp_path / "s.csv"
        code = main(["eval", "--det", str(tmp_path / "d.pbm"),
                     "--gt", str(tmp_path / "g.pbm"),
                     "--radius", "0,2", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        data = [ln for ln in lines[1:] if ln.startswith("d.pbm")]
        assert len(data) == 2  # one row per radius

    def test_bad_radius_list(self, capsys):
        assert main(["eval", "--det", "a", "--gt", "b",
                     "--radius", "x,y", "--out", "c"]) == 1


class TestSynthCommand:
    def test_fixture_with_manifest(self, tmp_path):
        out = tmp_path / "scene.pbm"
        code = main(["synth", "--out", str(out), "--size", "48x32",
                     "--p", "0.05", "--seed", "5",
                     "--plant", "tile:4,4,12,10:0.9"])
        assert code == 0
        image = pnm.read_bitmap(out)
        assert image.shape == (32, 48)
        manifest = json.loads((tmp_path / "scene.pbm.json").read_text())
        assert manifest["seed"] == 5
        assert manifest["plants"][0]["family"] == "tiles"
        assert manifest["plants"][0]["cells"] == [4, 4, 12, 10]

    def test_deterministic_bytes(self, tmp_path):
        args = ["synth", "--size", "40x40", "--p", "0.1", "--seed", "9",
                "--plant", "strip:3,38,42:1.0"]
        a = tmp_path / "a.pbm"
        b = tmp_path / "b.pbm"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.pbm.json").read_text() == (tmp_path / "b.pbm.json").read_text()

    def test_bad_plant_spec(self, capsys):
        assert main(["synth", "--out", "x.pbm", "--size", "8x8",
                     "--p", "0.1", "--plant", "tile:enormous:0.9"]) == 1

    def test_out_of_range_probability(self, tmp_path, capsys):
        code = main(["synth", "--out", str(tmp_path / "x.pbm"),
                     "--size", "8x8", "--p", "1.5"])
        assert code == 1

    def test_synth_then_detect_round_trip(self, tmp_path):
        scene = tmp_path / "scene.pbm"
        assert main(["synth", "--out", str(scene), "--size", "32x32",
                     "--p", "0.05", "--seed", "3",
                     "--plant", "tile:8,8,20,18:0.95"]) == 0
        out = tmp_path / "o.json"
        assert main(["detect", "--family", "tile", "--in", str(scene),
                     "--out", str(out), "--seed", "0"]) == 0
        payload = json.loads(out.read_text())
        assert len(payload["detections"]) >= 1
        top = payload["detections"][0]["params"]
        assert abs(top["x_lo"] - 8) <= 1 and abs(top["y_hi"] - 18) <= 1

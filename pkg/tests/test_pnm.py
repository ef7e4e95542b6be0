"""Portable anymap reader/writer round trips and malformed-input rejection."""

import numpy as np
import pytest

from sigscan import pnm
from sigscan.pnm import PnmError


def random_mask(shape, seed, density=0.4):
    rng = np.random.default_rng(seed)
    return rng.random(shape) < density


class TestBitmapRoundTrip:
    @pytest.mark.parametrize("shape", [(1, 1), (5, 13), (16, 16), (7, 64), (31, 9)])
    def test_raw_round_trip(self, tmp_path, shape):
        mask = random_mask(shape, sum(shape))
        path = tmp_path / "m.pbm"
        pnm.write_bitmap(path, mask)
        assert np.array_equal(pnm.read_bitmap(path), mask)

    @pytest.mark.parametrize("shape", [(1, 3), (9, 9), (12, 70)])
    def test_plain_round_trip(self, tmp_path, shape):
        mask = random_mask(shape, 11)
        path = tmp_path / "m.pbm"
        pnm.write_bitmap_plain(path, mask, comment="unit fixture")
        assert np.array_equal(pnm.read_bitmap(path), mask)

    def test_raw_bit_order_is_msb_first(self, tmp_path):
        path = tmp_path / "bits.pbm"
        path.write_bytes(b"P4\n9 1\n" + bytes([0b10000001, 0b10000000]))
        row = pnm.read_bitmap(path)
        assert row.tolist() == [[True, False, False, False, False, False, False, True, True]]

    def test_plain_accepts_packed_digits_and_comments(self, tmp_path):
        path = tmp_path / "p.pbm"
        path.write_text("P1 # magic\n# a comment line\n 3\t2\n011\n100\n")
        got = pnm.read_bitmap(path)
        assert got.tolist() == [[False, True, True], [True, False, False]]

    def test_comment_in_header_of_raw_file(self, tmp_path):
        mask = random_mask((4, 12), 3)
        path = tmp_path / "c.pbm"
        pnm.write_bitmap(path, mask, comment="generated")
        assert np.array_equal(pnm.read_bitmap(path), mask)


class TestGray:
    def test_plain_gray_and_threshold(self, tmp_path):
        path = tmp_path / "g.pgm"
        path.write_text("P2\n3 2\n9\n0 3 9\n5 6 1\n")
        gray, maxval = pnm.read_gray(path)
        assert maxval == 9
        assert gray.tolist() == [[0, 3, 9], [5, 6, 1]]
        binary = pnm.read_binary(path, threshold=5)
        assert binary.tolist() == [[False, False, True], [True, True, False]]

    def test_raw_gray_one_byte(self, tmp_path):
        path = tmp_path / "g.pgm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 128, 200, 255]))
        gray, maxval = pnm.read_gray(path)
        assert maxval == 255
        assert gray.tolist() == [[0, 128], [200, 255]]

    def test_raw_gray_two_byte_big_endian(self, tmp_path):
        path = tmp_path / "g.pgm"
        path.write_bytes(b"P5\n2 1\n1000\n" + bytes([0x01, 0x00, 0x03, 0xE8]))
        gray, maxval = pnm.read_gray(path)
        assert maxval == 1000
        assert gray.tolist() == [[256, 1000]]

    def test_threshold_is_inclusive(self, tmp_path):
        path = tmp_path / "g.pgm"
        path.write_text("P2\n2 1\n10\n4 5\n")
        assert pnm.read_binary(path, threshold=5).tolist() == [[False, True]]


class TestDispatchAndErrors:
    def test_bitmap_with_threshold_rejected(self, tmp_path):
        path = tmp_path / "m.pbm"
        pnm.write_bitmap(path, np.zeros((2, 2), bool))
        with pytest.raises(PnmError, match="already binary"):
            pnm.read_binary(path, threshold=1)

    def test_gray_without_threshold_rejected(self, tmp_path):
        path = tmp_path / "g.pgm"
        path.write_text("P2\n1 1\n5\n3\n")
        with pytest.raises(PnmError, match="needs a threshold"):
            pnm.read_binary(path)
        with pytest.raises(PnmError, match="graymap"):
            pnm.read_bitmap(path)

    @pytest.mark.parametrize(
        "data",
        [
            b"P7\n2 2\n\x00",
            b"P1\n",
            b"P1\n0 3\n000",
            b"P1\n3 2\n01a010",
            b"P1\n2 2\n010",
            b"P4\n9 2\n\x00\x00\x00",
            b"P2\n2 1\nxx\n1 2",
            b"P2\n2 1\n0\n0 0",
            b"P2\n2 1\n5\n3 9",
            b"P5\n2 2\n255\n\x01\x02",
        ],
    )
    def test_malformed_inputs_raise(self, tmp_path, data):
        path = tmp_path / "bad.pnm"
        path.write_bytes(data)
        with pytest.raises(PnmError):
            pnm.read_binary(path, threshold=1 if data[:2] in (b"P2", b"P5") else None)

    def test_mask_type_validation(self, tmp_path):
        with pytest.raises(ValueError, match="boolean"):
            pnm.write_bitmap(tmp_path / "x.pbm", np.zeros((2, 2), np.uint8))


class TestPixmapAndOverlay:
    def test_pixmap_bytes(self, tmp_path):
        rgb = np.zeros((1, 2, 3), np.uint8)
        rgb[0, 0] = (255, 0, 0)
        rgb[0, 1] = (1, 2, 3)
        path = tmp_path / "o.ppm"
        pnm.write_pixmap(path, rgb)
        assert path.read_bytes() == b"P6\n2 1\n255\n\xff\x00\x00\x01\x02\x03"

    def test_overlay_layers(self):
        image = np.zeros((2, 2), bool)
        image[0, 0] = True
        image[1, 1] = True
        boundary = np.zeros((2, 2), bool)
        boundary[1, 1] = True  # boundary wins over the input layer
        rgb = pnm.compose_overlay(image, boundary)
        assert rgb[0, 0].tolist() == [64, 64, 64]
        assert rgb[0, 1].tolist() == [255, 255, 255]
        assert rgb[1, 1].tolist() == [255, 0, 0]

    def test_overlay_shape_mismatch(self):
        with pytest.raises(ValueError):
            pnm.compose_overlay(np.zeros((2, 2), bool), np.zeros((3, 2), bool))

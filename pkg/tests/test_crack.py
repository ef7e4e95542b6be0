"""Two-scale crack pipeline: windows, extremities, chaining, final mask."""

import math

import numpy as np
import pytest

from sigscan.crack import (
    Extremity,
    WindowGrid,
    chain_bounded_strips,
    clip_line,
    crack_mask,
    detect_cracks,
    detect_elementary_strips,
    propose_candidates,
    strip_axis_endpoints,
)
from sigscan.detect import DetectionSet
from sigscan.evaluate import precision_recall
from sigscan.families import ImageGeometry, ListedBoundedStripFamily, StripFamily
from sigscan.synth import draw_polyline, gen_bernoulli


class TestWindowGrid:
    def test_exact_tiling(self):
        grid = WindowGrid(n_cols=128, n_rows=128, window_w=64, window_h=64)
        assert grid.rects == [
            (1, 1, 64, 64),
            (65, 1, 128, 64),
            (1, 65, 64, 128),
            (65, 65, 128, 128),
        ]

    def test_border_windows_clipped(self):
        grid = WindowGrid(n_cols=100, n_rows=70, window_w=64, window_h=64)
        assert grid.rects == [
            (1, 1, 64, 64),
            (65, 1, 100, 64),
            (1, 65, 64, 70),
            (65, 65, 100, 70),
        ]

    def test_cover_without_overlap(self):
        grid = WindowGrid(n_cols=150, n_rows=90, window_w=48, window_h=32)
        canvas = np.zeros((90, 150), np.int32)
        for x0, y0, x1, y1 in grid.rects:
            canvas[y0 - 1 : y1, x0 - 1 : x1] += 1
        assert (canvas == 1).all()

    def test_window_size_floor(self):
        with pytest.raises(ValueError):
            WindowGrid(n_cols=64, n_rows=64, window_w=7, window_h=64)

    def test_d_min_is_smaller_window_side(self):
        grid = WindowGrid(n_cols=64, n_rows=64, window_w=48, window_h=32)
        assert grid.d_min == 32.0


class TestClipLine:
    def test_diagonal_through_unit_box(self):
        span = clip_line(0.0, 0.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0)
        assert span == (-1.0, 1.0)

    def test_horizontal_inside(self):
        span = clip_line(0.0, 0.5, 1.0, 0.0, -2.0, 3.0, -1.0, 1.0)
        assert span == (-2.0, 3.0)

    def test_horizontal_outside_is_none(self):
        assert clip_line(0.0, 2.0, 1.0, 0.0, -1.0, 1.0, -1.0, 1.0) is None

    def test_corner_miss_is_none(self):
        assert clip_line(5.0, -5.0, 1.0, 1.0, -1.0, 1.0, 4.0, 6.0) is None


class TestStripAxisEndpoints:
    def test_horizontal_mid_row(self):
        geom = ImageGeometry.of(np.zeros((15, 15), bool))
        family = StripFamily(geom, d_theta=math.pi / 8)
        # theta cell 5 is pi/2: offset axis is y, middle cell is row 8
        c = family.half_cells + 1
        ends = strip_axis_endpoints(family, (5, c, c))
        assert ends == ((1, 8), (15, 8))

    def test_vertical_column(self):
        geom = ImageGeometry.of(np.zeros((15, 15), bool))
        family = StripFamily(geom, d_theta=math.pi / 8)
        c = family.half_cells + 1
        ends = strip_axis_endpoints(family, (1, c + 3, c + 3))  # x = center + 3
        assert ends == ((11, 1), (11, 15))

    def test_two_cell_band_axis_between(self):
        geom = ImageGeometry.of(np.zeros((15, 15), bool))
        family = StripFamily(geom, d_theta=math.pi / 8)
        c = family.half_cells + 1
        ends = strip_axis_endpoints(family, (5, c, c + 1))  # rows 8 and 9
        assert ends == ((1, 9), (15, 9))  # midpoint 8.5 rounds away from zero


def segment_scene(seed=5):
    """One dense horizontal segment inside the first 32x32 window."""
    image = gen_bernoulli(96, 32, 0.02, seed=seed)
    image |= draw_polyline((32, 96), [(4, 16), (28, 16)])
    return image


class TestElementaryStrips:
    def test_blank_image(self):
        image = np.zeros((64, 64), bool)
        grid = WindowGrid.of(image, 32, 32)
        filtered, extremities, strips = detect_elementary_strips(image, grid)
        assert not filtered.any()
        assert extremities == [] and strips == []

    def test_single_window_segment(self):
        image = segment_scene()
        grid = WindowGrid.of(image, 32, 32)
        filtered, extremities, strips = detect_elementary_strips(image, grid, seed=1)
        first = [s for s in strips if s.window == 0]
        assert len(first) >= 1
        ends = [e for e in extremities if e.window == 0]
        assert len(ends) >= 2
        covered = filtered[15, 3:28]
        assert covered.mean() > 0.9

    def test_line_crossing_three_windows(self):
        image = gen_bernoulli(96, 32, 0.02, seed=9)
        image |= draw_polyline((32, 96), [(2, 10), (95, 20)])
        grid = WindowGrid.of(image, 32, 32)
        filtered, extremities, strips = detect_elementary_strips(image, grid, seed=0)
        windows_hit = {s.window for s in strips}
        assert windows_hit >= {0, 1, 2}
        assert len(extremities) >= 6

    def test_deterministic(self):
        image = segment_scene(11)
        grid = WindowGrid.of(image, 32, 32)
        a = detect_elementary_strips(image, grid, seed=3)
        b = detect_elementary_strips(image, grid, seed=3)
        assert np.array_equal(a[0], b[0])
        assert a[1] == b[1]
        assert [s.detection.cells for s in a[2]] == [s.detection.cells for s in b[2]]


class TestChaining:
    def test_empty_extremities(self):
        image = segment_scene()
        filtered = np.zeros_like(image)
        result, family = chain_bounded_strips(image, filtered, [], d_min=32.0)
        assert family is None
        assert len(result.detections) == 0

    def test_too_close_extremities_propose_nothing(self):
        image = segment_scene()
        filtered = np.zeros_like(image)
        ext = [Extremity(10, 10, 0), Extremity(12, 10, 0)]
        result, family = chain_bounded_strips(image, filtered, ext, d_min=32.0)
        assert family is None
        assert len(result.detections) == 0

    def test_collinear_strips_bridge_a_gap(self):
        # dense on [4,44] and [54,92] of row 16, gap of 9 columns
        image = gen_bernoulli(96, 32, 0.02, seed=13)
        image |= draw_polyline((32, 96), [(4, 16), (44, 16)])
        image |= draw_polyline((32, 96), [(54, 16), (92, 16)])
        result = detect_cracks(image, window_w=32, window_h=32, seed=0)
        assert len(result.chained.detections) >= 1
        top = result.chained.detections[0]
        theta = result.chain_family.cells_to_params(top.cells).theta
        assert abs(theta - math.pi / 2) < 0.1  # horizontal line, vertical normal
        # the accepted bounded strip spans both halves of the image
        band = result.chain_family.pattern_pixels(top.cells)
        assert band[:, :48].any() and band[:, 48:].any()

    def test_only_supported_direction_survives(self):
        image = gen_bernoulli(64, 64, 0.01, seed=17)
        image |= draw_polyline((64, 64), [(4, 32), (60, 32)])  # horizontal seeds
        filtered = np.zeros_like(image)
        filtered[31, :] = True  # horizontal corridor (row 32)
        filtered[:, 31] = True  # vertical corridor (col 32), no seeds on it
        ext = [
            Extremity(4, 32, 0),
            Extremity(60, 32, 1),
            Extremity(32, 4, 2),
            Extremity(32, 60, 3),
        ]
        result, family = chain_bounded_strips(
            image, filtered, ext, d_min=32.0, seed=0
        )
        assert len(result.detections) >= 1
        for det in result.detections:
            theta = family.cells_to_params(det.cells).theta
            assert abs(theta - math.pi / 2) < 0.1

    def test_proposals_are_sorted_unique_and_valid(self):
        geom = ImageGeometry.of(np.zeros((48, 48), bool))
        family = ListedBoundedStripFamily(geom, [], max_width=5)
        points = [(4, 24), (44, 24), (24, 4), (24, 44)]
        cand = propose_candidates(family, points, d_min=20.0, w_max=5)
        assert cand == sorted(set(cand))
        for k, i, j, f0, f1 in cand:
            assert 1 <= k <= family.n_theta
            assert 1 <= i <= j <= family.n_rho
            assert j - i + 1 <= 5
            assert 1 <= f0 <= family.n_phi and 1 <= f1 <= family.n_phi


class TestCrackMask:
    def test_empty_detsection_set_gives_blank(self):
        filtered = np.ones((8, 8), bool)
        empty = DetectionSet(family="bounded-strips-listed", p=0.1, ln_candidates=0.0)
        assert not crack_mask(empty, filtered, None).any()

    def test_blank_filtered_gives_blank(self):
        image = segment_scene()
        result = detect_cracks(image, window_w=32, window_h=32, seed=0)
        if result.chained.detections:
            blank = crack_mask(result.chained, np.zeros_like(image), result.chain_family)
            assert not blank.any()

    def test_mask_equals_direct_set_algebra(self):
        image = gen_bernoulli(96, 32, 0.02, seed=23)
        image |= draw_polyline((32, 96), [(4, 16), (44, 16)])
        image |= draw_polyline((32, 96), [(54, 16), (92, 16)])
        result = detect_cracks(image, window_w=32, window_h=32, seed=0)
        union = np.zeros_like(image)
        for det in result.chained.detections:
            union |= result.chain_family.pattern_pixels(det.cells)
        assert np.array_equal(result.mask, union & result.filtered)
        assert not (result.mask & ~result.filtered).any()


class TestPipeline:
    def test_dashed_polyline_recovery(self):
        image = gen_bernoulli(128, 64, 0.03, seed=31)
        path = [(6, 20), (60, 28), (120, 44)]
        image |= draw_polyline((64, 128), path, dash=(8, 5))
        truth = draw_polyline((64, 128), path)
        result = detect_cracks(image, window_w=32, window_h=32, seed=0)
        assert result.mask.any()
        score = precision_recall(result.mask, truth, 2)
        assert score.precision >= 0.5
        assert score.recall >= 0.5

    def test_noise_yields_few_chained_patterns(self):
        image = gen_bernoulli(128, 128, 0.05, seed=37)
        result = detect_cracks(image, window_w=64, window_h=64, seed=0)
        assert len(result.chained.detections) <= 1

    def test_end_to_end_deterministic(self):
        image = gen_bernoulli(96, 32, 0.02, seed=41)
        image |= draw_polyline((32, 96), [(4, 10), (90, 24)], dash=(7, 4))
        a = detect_cracks(image, window_w=32, window_h=32, seed=5)
        b = detect_cracks(image, window_w=32, window_h=32, seed=5)
        assert np.array_equal(a.mask, b.mask)
        assert a.extremities == b.extremities
        assert [d.cells for d in a.chained.detections] == [
            d.cells for d in b.chained.detections
        ]

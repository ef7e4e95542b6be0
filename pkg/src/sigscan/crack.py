"""Two-scale crack extraction from a binary seed image.

Local scale: the image is tiled by non-overlapping windows and each
window runs the greedy strip detector with its own density estimate, so
a locally dense streak stands out against its own background. Detected
strips are clipped to their window; their pixels form the filtered
image and the clipped axis endpoints are collected as extremities.

Image scale: pairs of far-apart extremities propose bounded strips
(width 1..w_max around the pair's line, angular sector spanning the
pair). The greedy detector reruns on filtered-AND-input pixels with the
candidate set restricted to those proposals; accepted patterns, cut
back to the filtered image, form the final crack mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from sigscan.detect import Detection, DetectionSet, detect_all
from sigscan.families import (
    ImageGeometry,
    ListedBoundedStripFamily,
    StripFamily,
    round_half_away,
)

CHAIN_SEED_TAG = 999983  # distinct rng stream for the image-scale stage


@dataclass(frozen=True)
class WindowGrid:
    """Non-overlapping window rectangles covering the image.

    Rectangles are (x_lo, y_lo, x_hi, y_hi), 1-based inclusive; border
    windows are clipped to the image, never padded.
    """

    n_cols: int
    n_rows: int
    window_w: int = 64
    window_h: int = 64

    def __post_init__(self):
        if self.n_cols < 1 or self.n_rows < 1:
            raise ValueError(f"empty image {self.n_cols}x{self.n_rows}")
        if self.window_w < 8 or self.window_h < 8:
            raise ValueError(
                f"window must be at least 8x8, got {self.window_w}x{self.window_h}"
            )

    @classmethod
    def of(cls, image, window_w: int = 64, window_h: int = 64) -> "WindowGrid":
        n_rows, n_cols = np.asarray(image).shape
        return cls(n_cols=n_cols, n_rows=n_rows, window_w=window_w, window_h=window_h)

    @property
    def rects(self):
        out = []
        for y_lo in range(1, self.n_rows + 1, self.window_h):
            for x_lo in range(1, self.n_cols + 1, self.window_w):
                out.append(
                    (
                        x_lo,
                        y_lo,
                        min(x_lo + self.window_w - 1, self.n_cols),
                        min(y_lo + self.window_h - 1, self.n_rows),
                    )
                )
        return out

    @property
    def d_min(self) -> float:
        return float(min(self.window_w, self.window_h))


@dataclass(frozen=True, order=True)
class Extremity:
    """Axis endpoint of a clipped elementary strip, 1-based pixel coords."""

    x: int
    y: int
    window: int


@dataclass(frozen=True)
class WindowStrip:
    """One elementary strip: which window found it, in window-local cells."""

    window: int
    rect: tuple
    detection: Detection


@dataclass
class CrackResult:
    grid: WindowGrid
    filtered: np.ndarray
    extremities: list
    window_strips: list
    chained: DetectionSet
    mask: np.ndarray
    chain_family: object = field(default=None, repr=False)


def clip_line(px, py, dx, dy, x_min, x_max, y_min, y_max):
    """Parameter range where (px,py)+t*(dx,dy) lies in the box, or None."""
    t0, t1 = -math.inf, math.inf
    for d, p, lo, hi in ((dx, px, x_min, x_max), (dy, py, y_min, y_max)):
        if d == 0.0:
            if p < lo or p > hi:
                return None
        else:
            ta, tb = (lo - p) / d, (hi - p) / d
            if ta > tb:
                ta, tb = tb, ta
            t0, t1 = max(t0, ta), min(t1, tb)
    if t0 > t1:
        return None
    return t0, t1


def strip_axis_endpoints(family: StripFamily, cells):
    """Central-axis endpoints of a strip, clipped to its image rectangle.

    Returns two (x, y) 1-based integer pixel positions, rounded and
    clamped inside the image; None if the axis misses the pixel grid.
    """
    k, i, j = cells
    theta = family.thetas[k - 1]
    ct, st = float(family.cos_table[k - 1]), float(family.sin_table[k - 1])
    s_mid = 0.5 * (i + j) - (family.half_cells + 1)
    rho_c = s_mid * family.d_rho
    geometry = family.geometry
    cx, cy = geometry.center
    # axis in centered coords: point rho*(cos,sin), direction (-sin,cos)
    span = clip_line(
        rho_c * ct,
        rho_c * st,
        -st,
        ct,
        1 - cx,
        geometry.n_cols - cx,
        1 - cy,
        geometry.n_rows - cy,
    )
    if span is None:
        return None
    points = []
    for t in span:
        x = int(round_half_away(np.float64(rho_c * ct - t * st + cx)))
        y = int(round_half_away(np.float64(rho_c * st + t * ct + cy)))
        points.append(
            (min(max(x, 1), geometry.n_cols), min(max(y, 1), geometry.n_rows))
        )
    points.sort()  # direction sign must not leak into the output
    return points[0], points[1]


def detect_elementary_strips(image, grid: WindowGrid, seed=0, d_rho: float = 1.0,
                             d_theta=None, threads: int = 1):
    """Per-window strip detection; the local scale of the pipeline.

    Each window runs the greedy detector on its own pixels (its own
    density estimate, its own candidate budget). Returns the filtered
    image holding only detected-strip pixels, the sorted extremity list,
    and the per-window strips. Window seeds hang off the window id, so
    any processing order gives identical output.
    """
    image = np.asarray(image, bool)
    filtered = np.zeros_like(image)
    extremities = set()
    window_strips = []
    for wid, (x_lo, y_lo, x_hi, y_hi) in enumerate(grid.rects):
        sub = image[y_lo - 1 : y_hi, x_lo - 1 : x_hi]
        if not sub.any():
            continue
        family = StripFamily(ImageGeometry.of(sub), d_rho=d_rho, d_theta=d_theta)
        local = detect_all(sub, family, seed=(seed, wid), threads=threads)
        for det in local.detections:
            window_strips.append(
                WindowStrip(window=wid, rect=(x_lo, y_lo, x_hi, y_hi), detection=det)
            )
            band = family.pattern_pixels(det.cells)
            filtered[y_lo - 1 : y_hi, x_lo - 1 : x_hi] |= band
            ends = strip_axis_endpoints(family, det.cells)
            if ends is None:
                continue
            for x, y in ends:
                extremities.add(
                    Extremity(x=x + x_lo - 1, y=y + y_lo - 1, window=wid)
                )
    return filtered, sorted(extremities), window_strips


def _ccw_sector(f_i: int, f_j: int, n_phi: int):
    """Order two angular cells so the counterclockwise arc is the minor one.

    Cells are 1-based on a circle of n_phi cells. Exact half-circle ties
    take the smaller starting cell.
    """
    span_ij = (f_j - f_i) % n_phi
    span_ji = (f_i - f_j) % n_phi
    if span_ij < span_ji or (span_ij == span_ji and f_i <= f_j):
        return f_i, f_j
    return f_j, f_i


def propose_candidates(family: ListedBoundedStripFamily, points, d_min: float,
                       w_max: int):
    """Bounded-strip cells from far-apart extremity pairs.

    For each unordered pair at distance >= d_min: theta is the pair
    line's normal direction snapped to the grid, the width-w strip is
    centered on the line (even widths lean one cell high), and the
    angular sector runs counterclockwise through the minor arc between
    the endpoints' angular cells. Returns sorted unique cell tuples.
    """
    geometry = family.geometry
    cx, cy = geometry.center
    f_grid = family.f_grid()
    offset = family.half_cells + 1
    candidates = set()
    pts = [(float(x), float(y), f_grid[y - 1, x - 1]) for x, y in points]
    for a in range(len(pts)):
        x_a, y_a, f_a = pts[a]
        for b in range(a + 1, len(pts)):
            x_b, y_b, f_b = pts[b]
            if math.hypot(x_b - x_a, y_b - y_a) < d_min:
                continue
            theta_n = math.fmod(
                math.atan2(y_b - y_a, x_b - x_a) + 0.5 * math.pi, math.pi
            )
            if theta_n < 0.0:
                theta_n += math.pi
            k = int(round_half_away(np.float64(theta_n / family.d_theta))) % family.n_theta + 1
            ct = float(family.cos_table[k - 1])
            st = float(family.sin_table[k - 1])
            rho_c = 0.5 * ((x_a - cx) * ct + (y_a - cy) * st + (x_b - cx) * ct + (y_b - cy) * st)
            center_cell = int(round_half_away(np.float64(rho_c / family.d_rho))) + offset
            f0, f1 = _ccw_sector(int(f_a), int(f_b), family.n_phi)
            for w in range(1, w_max + 1):
                lo = center_cell - (w - 1) // 2
                hi = lo + w - 1
                lo, hi = max(lo, 1), min(hi, family.n_rho)
                if lo > hi:
                    continue
                candidates.add((k, lo, hi, f0, f1))
    return sorted(candidates)


def chain_bounded_strips(image, filtered, extremities, d_min: float, seed=0,
                         w_max: int = 5, d_rho: float = 1.0, d_theta=None,
                         d_phi=None, threads: int = 1):
    """Image-scale pass: bounded strips proposed by extremity pairs.

    Runs the greedy detector on filtered-AND-input pixels with the
    candidate set (and its test budget) restricted to the proposals.
    Returns (DetectionSet, family); family is None when nothing could be
    proposed.
    """
    image = np.asarray(image, bool)
    seeds_image = filtered & image
    geometry = ImageGeometry.of(image)
    p = float(seeds_image.mean())
    empty = DetectionSet(family="bounded-strips-listed", p=p, ln_candidates=0.0)
    empty.residual = seeds_image.copy()
    if not extremities:
        return empty, None
    probe = ListedBoundedStripFamily(
        geometry, [], d_rho=d_rho, d_theta=d_theta, d_phi=d_phi, max_width=w_max
    )
    points = sorted({(e.x, e.y) for e in extremities})
    candidates = propose_candidates(probe, points, d_min, w_max)
    if not candidates:
        return empty, None
    family = ListedBoundedStripFamily(
        geometry, candidates, d_rho=d_rho, d_theta=d_theta, d_phi=d_phi, max_width=w_max
    )
    result = detect_all(seeds_image, family, seed=(seed, CHAIN_SEED_TAG), threads=threads)
    return result, family


def crack_mask(chained: DetectionSet, filtered, family) -> np.ndarray:
    """Union of accepted bounded strips, cut back to the filtered image."""
    mask = np.zeros_like(np.asarray(filtered, bool))
    if not chained.detections:
        return mask
    for det in chained.detections:
        mask |= family.pattern_pixels(det.cells)
    return mask & filtered


def detect_cracks(image, window_w: int = 64, window_h: int = 64, seed=0,
                  w_max: int = 5, threads: int = 1) -> CrackResult:
    """Full pipeline: window strips, extremity chaining, final mask."""
    image = np.asarray(image, bool)
    grid = WindowGrid.of(image, window_w=window_w, window_h=window_h)
    filtered, extremities, window_strips = detect_elementary_strips(
        image, grid, seed=seed, threads=threads
    )
    chained, family = chain_bounded_strips(
        image, filtered, extremities, d_min=grid.d_min, seed=seed,
        w_max=w_max, threads=threads,
    )
    mask = crack_mask(chained, filtered, family)
    return CrackResult(
        grid=grid,
        filtered=filtered,
        extremities=extremities,
        window_strips=window_strips,
        chained=chained,
        mask=mask,
        chain_family=family,
    )

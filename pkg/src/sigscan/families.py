"""Pattern families over binary images: geometry, voting, enumeration.

A family fixes a parametric shape class (axis-aligned tiles, oriented
strips, rings, angularly bounded strips) together with a quantization of
its parameter space. It can vote a binary image into a cumulative space,
enumerate every candidate of the quantized set in batches, and rasterize
any single candidate back to a pixel mask.

Pixel membership and voting share the same rounding and the same
per-orientation trig tables, so the count returned by a space query equals
the count obtained by masking the image. Pixels are 1-based, x along
columns and y along rows; signed offsets are measured from the image
center ((n_cols+1)/2, (n_rows+1)/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sigscan.cumulative import AxisSpec, CumulativeSpace

TWO_PI = 2.0 * math.pi


def round_half_away(a):
    """Round to the nearest integer with halves going away from zero."""
    a = np.asarray(a)
    return np.floor(np.abs(a) + 0.5) * np.sign(a)


@dataclass(frozen=True)
class ImageGeometry:
    """Pixel lattice with a centered frame.

    x runs 1..n_cols, y runs 1..n_rows; array element [y-1, x-1]. The
    centered frame puts the origin at ((n_cols+1)/2, (n_rows+1)/2), so
    offsets are symmetric and every pixel lies strictly inside the
    circumscribed radius ``rho_max`` (half the diagonal).
    """

    n_rows: int
    n_cols: int

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("image must have at least one row and one column")

    @classmethod
    def of(cls, image) -> "ImageGeometry":
        image = np.asarray(image)
        if image.ndim != 2:
            raise ValueError(f"binary image must be 2-D, got shape {image.shape}")
        return cls(n_rows=image.shape[0], n_cols=image.shape[1])

    @property
    def center(self):
        return ((self.n_cols + 1) / 2.0, (self.n_rows + 1) / 2.0)

    @property
    def rho_max(self) -> float:
        return 0.5 * math.hypot(self.n_cols, self.n_rows)

    @property
    def n_pixels(self) -> int:
        return self.n_rows * self.n_cols

    def check(self, image) -> np.ndarray:
        image = np.asarray(image)
        if image.shape != (self.n_rows, self.n_cols):
            raise ValueError(
                f"image shape {image.shape} does not match geometry "
                f"({self.n_rows}, {self.n_cols})"
            )
        return image.astype(bool, copy=False)

    def true_coords(self, image):
        """Centered (xc, yc) of the true pixels, as float arrays."""
        ys, xs = np.nonzero(self.check(image))
        cx, cy = self.center
        return xs + 1.0 - cx, ys + 1.0 - cy

    def all_coords(self):
        """Centered (xc, yc) of every pixel, flattened row-major."""
        gx, gy = self.raw_grids()
        cx, cy = self.center
        return (gx - cx).ravel(), (gy - cy).ravel()

    def raw_grids(self):
        """1-based coordinate grids of shape (n_rows, n_cols)."""
        gx, gy = np.meshgrid(
            np.arange(1, self.n_cols + 1, dtype=np.float64),
            np.arange(1, self.n_rows + 1, dtype=np.float64),
        )
        return gx, gy

    def centered_grids(self):
        gx, gy = self.raw_grids()
        cx, cy = self.center
        return gx - cx, gy - cy


@dataclass(frozen=True)
class TileParams:
    """Axis-aligned rectangle, inclusive pixel bounds."""

    x_lo: int
    y_lo: int
    x_hi: int
    y_hi: int


@dataclass(frozen=True)
class StripParams:
    """Band bounded by two parallel lines: orientation of the normal and
    a signed offset interval [rho_lo, rho_hi) from the image center."""

    theta: float
    rho_lo: float
    rho_hi: float


@dataclass(frozen=True)
class RingParams:
    """Annulus around a grid center, radius interval [rho_lo, rho_hi)."""

    x0: int
    y0: int
    rho_lo: float
    rho_hi: float


@dataclass(frozen=True)
class BoundedStripParams:
    """Strip clipped to a polar-angle sector [phi, psi) swept CCW."""

    theta: float
    rho_lo: float
    rho_hi: float
    phi: float
    psi: float


def _as_cells(cells, n):
    cells = tuple(int(v) for v in cells)
    if len(cells) != n:
        raise ValueError(f"expected {n} cell indices, got {len(cells)}")
    return cells


def _check_range(name, lo, hi, size):
    if not (1 <= lo <= hi <= size):
        raise ValueError(f"{name} cell range [{lo}, {hi}] outside [1, {size}]")


class TileFamily:
    """Axis-aligned rectangles; votes are the image pixels themselves."""

    name = "tiles"
    param_len = 4

    def __init__(self, geometry: ImageGeometry):
        self.geometry = geometry

    def axes(self):
        return (
            AxisSpec("bip", self.geometry.n_cols, offset=0, step=1.0),
            AxisSpec("bip", self.geometry.n_rows, offset=0, step=1.0),
        )

    def n_candidates(self) -> int:
        nc, nr = self.geometry.n_cols, self.geometry.n_rows
        return (nc * (nc + 1) // 2) * (nr * (nr + 1) // 2)

    def ln_eta2(self) -> float:
        return math.log(self.n_candidates())

    def vote(self, image) -> CumulativeSpace:
        image = self.geometry.check(image)
        return CumulativeSpace(self.axes(), cells=image.T.astype(np.int64))

    def build(self, image):
        return self.vote(image).integrate_two()

    def iter_blocks(self, handle):
        """Candidate batches grouped by width; one champion row per height."""
        g = handle._psum  # (n_cols+1, n_rows+1)
        nc, nr = self.geometry.n_cols, self.geometry.n_rows
        for w in range(1, nc + 1):
            col = g[w:, :] - g[: nc + 1 - w, :]
            nu = np.empty(nr, np.int64)
            kap = np.empty(nr, np.int64)
            cells = np.empty((nr, 4), np.int32)
            for h in range(1, nr + 1):
                sums = col[:, h:] - col[:, : nr + 1 - h]
                flat = int(np.argmax(sums))
                ix, iy = divmod(flat, sums.shape[1])
                nu[h - 1] = w * h
                kap[h - 1] = sums[ix, iy]
                cells[h - 1] = (ix + 1, iy + 1, ix + w, iy + h)
            yield nu, kap, cells

    def count_true(self, image, cells) -> int:
        image = self.geometry.check(image)
        return int((self.pattern_pixels(cells) & image).sum())

    def query_count(self, space: CumulativeSpace, cells) -> int:
        """True-pixel count through the integrated space (4 cell reads)."""
        x0, y0, x1, y1 = self._validated(cells)
        return space.query_rect((), x0, x1, y0, y1)

    def cardinality(self, cells) -> int:
        x0, y0, x1, y1 = self._validated(cells)
        return (x1 - x0 + 1) * (y1 - y0 + 1)

    def _validated(self, cells):
        x0, y0, x1, y1 = _as_cells(cells, 4)
        _check_range("x", x0, x1, self.geometry.n_cols)
        _check_range("y", y0, y1, self.geometry.n_rows)
        return x0, y0, x1, y1

    def pattern_pixels(self, cells) -> np.ndarray:
        x0, y0, x1, y1 = self._validated(cells)
        mask = np.zeros((self.geometry.n_rows, self.geometry.n_cols), bool)
        mask[y0 - 1 : y1, x0 - 1 : x1] = True
        return mask

    def cells_to_params(self, cells) -> TileParams:
        return TileParams(*self._validated(cells))

    def params_to_cells(self, params: TileParams):
        return self._validated((params.x_lo, params.y_lo, params.x_hi, params.y_hi))


class StripFamily:
    """Bands at quantized orientations with a signed offset interval.

    A pixel belongs to candidate (k, i, j) when its offset along the
    orientation-k normal, rounded to the nearest cell, falls in [i, j].
    """

    name = "strips"
    param_len = 3

    def __init__(self, geometry: ImageGeometry, d_rho: float = 1.0, d_theta=None):
        if d_rho <= 0:
            raise ValueError(f"d_rho must be > 0, got {d_rho}")
        self.geometry = geometry
        self.d_rho = float(d_rho)
        self.d_theta = float(d_theta) if d_theta is not None else 1.0 / geometry.rho_max
        if self.d_theta <= 0:
            raise ValueError(f"d_theta must be > 0, got {self.d_theta}")
        self.n_theta = int(math.ceil(math.pi / self.d_theta))
        self.half_cells = int(math.ceil(geometry.rho_max / self.d_rho))
        self.n_rho = 2 * self.half_cells + 1
        self.thetas = np.arange(self.n_theta, dtype=np.float64) * self.d_theta
        self.cos_table = np.cos(self.thetas)
        self.sin_table = np.sin(self.thetas)
        self._area = None

    def axes(self):
        return (
            AxisSpec("mono", self.n_theta, step=self.d_theta),
            AxisSpec("bip", self.n_rho, offset=self.half_cells + 1, step=self.d_rho),
        )

    def n_candidates(self) -> int:
        return self.n_theta * (self.n_rho * (self.n_rho + 1) // 2)

    def ln_eta2(self) -> float:
        return math.log(self.n_candidates())

    def offset_cells(self, xc, yc) -> np.ndarray:
        """Signed offset cell per orientation, shape (n_theta, n_points)."""
        rho = xc[None, :] * self.cos_table[:, None] + yc[None, :] * self.sin_table[:, None]
        return round_half_away(rho / self.d_rho).astype(np.int64)

    def _vote_space(self, xc, yc) -> CumulativeSpace:
        idx = self.offset_cells(xc, yc) + self.half_cells
        if idx.size and (idx.min() < 0 or idx.max() >= self.n_rho):
            raise RuntimeError("offset cell fell outside the axis; geometry broken")
        rows = np.arange(self.n_theta, dtype=np.int64)[:, None]
        counts = np.bincount(
            (rows * self.n_rho + idx).ravel(), minlength=self.n_theta * self.n_rho
        )
        return CumulativeSpace(self.axes(), cells=counts.reshape(self.n_theta, self.n_rho))

    def vote(self, image) -> CumulativeSpace:
        return self._vote_space(*self.geometry.true_coords(image))

    def area_space(self) -> CumulativeSpace:
        if self._area is None:
            self._area = self._vote_space(*self.geometry.all_coords()).integrate_one()
        return self._area

    def build(self, image):
        return self.vote(image).integrate_one(), self.area_space()

    def iter_blocks(self, handle):
        """One batch per orientation: every offset interval, in index order."""
        vote, area = handle
        vp, ap = vote._psum, area._psum
        ii, jj = np.triu_indices(self.n_rho)
        tail = np.empty((ii.size, 2), np.int32)
        tail[:, 0] = ii + 1
        tail[:, 1] = jj + 1
        for k in range(self.n_theta):
            kap = vp[k, jj + 1] - vp[k, ii]
            nu = ap[k, jj + 1] - ap[k, ii]
            cells = np.empty((ii.size, 3), np.int32)
            cells[:, 0] = k + 1
            cells[:, 1:] = tail
            yield nu, kap, cells

    def _validated(self, cells):
        k, i, j = _as_cells(cells, 3)
        _check_range("theta", k, k, self.n_theta)
        _check_range("rho", i, j, self.n_rho)
        return k, i, j

    def pattern_pixels(self, cells) -> np.ndarray:
        k, i, j = self._validated(cells)
        gx, gy = self.geometry.centered_grids()
        rho = gx * self.cos_table[k - 1] + gy * self.sin_table[k - 1]
        s = round_half_away(rho / self.d_rho) + (self.half_cells + 1)
        return (s >= i) & (s <= j)

    def count_true(self, image, cells) -> int:
        image = self.geometry.check(image)
        return int((self.pattern_pixels(cells) & image).sum())

    def query_count(self, space: CumulativeSpace, cells) -> int:
        """True-pixel count through the integrated space (2 cell reads)."""
        k, i, j = self._validated(cells)
        return space.query_interval((k,), i, j)

    def cardinality(self, cells) -> int:
        return int(self.pattern_pixels(cells).sum())

    def cells_to_params(self, cells) -> StripParams:
        k, i, j = self._validated(cells)
        off = self.half_cells + 1
        return StripParams(
            theta=(k - 1) * self.d_theta,
            rho_lo=(i - off - 0.5) * self.d_rho,
            rho_hi=(j - off + 0.5) * self.d_rho,
        )

    def params_to_cells(self, params: StripParams):
        k = int(math.floor(params.theta / self.d_theta + 0.5 + 1e-9)) + 1
        off = self.half_cells + 1
        i = int(math.floor(params.rho_lo / self.d_rho + 0.5 + 1e-9)) + off
        j = int(math.floor(params.rho_hi / self.d_rho - 0.5 + 1e-9)) + off
        return self._validated((k, i, j))


class RingFamily:
    """Annuli around a strided grid of candidate centers.

    A pixel belongs to candidate (a, b, i, j) when its distance to center
    (a, b), rounded to the nearest radial cell, falls in [i-1, j-1].
    """

    name = "rings"
    param_len = 4

    def __init__(self, geometry: ImageGeometry, d_rho: float = 1.0, stride: int = 2):
        if d_rho <= 0:
            raise ValueError(f"d_rho must be > 0, got {d_rho}")
        stride = int(stride)
        if stride < 1:
            raise ValueError(f"stride must be >= 1, got {stride}")
        self.geometry = geometry
        self.d_rho = float(d_rho)
        self.stride = stride
        self.center_xs = np.arange(1, geometry.n_cols + 1, stride, dtype=np.int64)
        self.center_ys = np.arange(1, geometry.n_rows + 1, stride, dtype=np.int64)
        self.n_cx = len(self.center_xs)
        self.n_cy = len(self.center_ys)
        self.n_ray = int(math.ceil(geometry.rho_max / self.d_rho)) + 1
        self._area = None

    def axes(self):
        return (
            AxisSpec("mono", self.n_cx, step=float(self.stride)),
            AxisSpec("mono", self.n_cy, step=float(self.stride)),
            AxisSpec("bip", self.n_ray, offset=1, step=self.d_rho),
        )

    def n_candidates(self) -> int:
        return self.n_cx * self.n_cy * (self.n_ray * (self.n_ray + 1) // 2)

    def ln_eta2(self) -> float:
        return math.log(self.n_candidates())

    def ray_cells(self, dx, dy) -> np.ndarray:
        d = np.sqrt(dx * dx + dy * dy)
        return round_half_away(d / self.d_rho).astype(np.int64)

    def _vote_space(self, x, y) -> CumulativeSpace:
        # distances beyond the circumscribed radius fall in an overflow
        # slot and are dropped; no candidate reaches that far
        grid = np.zeros((self.n_cx, self.n_cy, self.n_ray), np.int64)
        rows = np.arange(self.n_cy, dtype=np.int64)[:, None]
        for a, cx in enumerate(self.center_xs):
            dx = x - float(cx)
            dy = y[None, :] - self.center_ys[:, None].astype(np.float64)
            r = self.ray_cells(dx[None, :], dy)
            r = np.where(r < self.n_ray, r, self.n_ray)
            counts = np.bincount(
                (rows * (self.n_ray + 1) + r).ravel(),
                minlength=self.n_cy * (self.n_ray + 1),
            )
            grid[a] = counts.reshape(self.n_cy, self.n_ray + 1)[:, : self.n_ray]
        return CumulativeSpace(self.axes(), cells=grid)

    def _true_raw(self, image):
        ys, xs = np.nonzero(self.geometry.check(image))
        return xs + 1.0, ys + 1.0

    def vote(self, image) -> CumulativeSpace:
        return self._vote_space(*self._true_raw(image))

    def area_space(self) -> CumulativeSpace:
        if self._area is None:
            gx, gy = self.geometry.raw_grids()
            self._area = self._vote_space(gx.ravel(), gy.ravel()).integrate_one()
        return self._area

    def build(self, image):
        return self.vote(image).integrate_one(), self.area_space()

    def iter_blocks(self, handle):
        """One batch per candidate center: every radius interval."""
        vote, area = handle
        vp, ap = vote._psum, area._psum
        ii, jj = np.triu_indices(self.n_ray)
        tail = np.empty((ii.size, 2), np.int32)
        tail[:, 0] = ii + 1
        tail[:, 1] = jj + 1
        for a in range(self.n_cx):
            for b in range(self.n_cy):
                kap = vp[a, b, jj + 1] - vp[a, b, ii]
                nu = ap[a, b, jj + 1] - ap[a, b, ii]
                cells = np.empty((ii.size, 4), np.int32)
                cells[:, 0] = a + 1
                cells[:, 1] = b + 1
                cells[:, 2:] = tail
                yield nu, kap, cells

    def _validated(self, cells):
        a, b, i, j = _as_cells(cells, 4)
        _check_range("center x", a, a, self.n_cx)
        _check_range("center y", b, b, self.n_cy)
        _check_range("radius", i, j, self.n_ray)
        return a, b, i, j

    def pattern_pixels(self, cells) -> np.ndarray:
        a, b, i, j = self._validated(cells)
        gx, gy = self.geometry.raw_grids()
        r = self.ray_cells(gx - float(self.center_xs[a - 1]), gy - float(self.center_ys[b - 1]))
        return (r >= i - 1) & (r <= j - 1)

    def count_true(self, image, cells) -> int:
        image = self.geometry.check(image)
        return int((self.pattern_pixels(cells) & image).sum())

    def query_count(self, space: CumulativeSpace, cells) -> int:
        """True-pixel count through the integrated space (2 cell reads)."""
        a, b, i, j = self._validated(cells)
        return space.query_interval((a, b), i, j)

    def cardinality(self, cells) -> int:
        return int(self.pattern_pixels(cells).sum())

    def cells_to_params(self, cells) -> RingParams:
        a, b, i, j = self._validated(cells)
        return RingParams(
            x0=int(self.center_xs[a - 1]),
            y0=int(self.center_ys[b - 1]),
            rho_lo=max(0.0, (i - 1.5) * self.d_rho),
            rho_hi=(j - 0.5) * self.d_rho,
        )

    def params_to_cells(self, params: RingParams):
        a = (int(params.x0) - 1) // self.stride + 1
        b = (int(params.y0) - 1) // self.stride + 1
        i = int(math.floor(params.rho_lo / self.d_rho + 0.5 + 1e-9)) + 1
        j = int(math.floor(params.rho_hi / self.d_rho + 0.5 + 1e-9))
        return self._validated((a, b, i, max(i, j)))


class BoundedStripFamily:
    """Strips clipped to a polar-angle sector around the image center.

    A candidate is (k, i, j, f0, f1): orientation cell, offset interval,
    and a circular interval of polar-angle cells (f0 > f1 wraps through
    the seam at angle 0). Slabs are built one orientation at a time, so
    the full 3-D space never has to be materialized.
    """

    name = "bounded-strips"
    param_len = 5

    def __init__(
        self,
        geometry: ImageGeometry,
        d_rho: float = 1.0,
        d_theta=None,
        d_phi=None,
        max_width=None,
    ):
        if d_rho <= 0:
            raise ValueError(f"d_rho must be > 0, got {d_rho}")
        self.geometry = geometry
        self.d_rho = float(d_rho)
        self.d_theta = float(d_theta) if d_theta is not None else 1.0 / geometry.rho_max
        self.d_phi = float(d_phi) if d_phi is not None else 1.0 / geometry.rho_max
        if self.d_theta <= 0 or self.d_phi <= 0:
            raise ValueError("d_theta and d_phi must be > 0")
        self.n_theta = int(math.ceil(math.pi / self.d_theta))
        self.half_cells = int(math.ceil(geometry.rho_max / self.d_rho))
        self.n_rho = 2 * self.half_cells + 1
        self.n_phi = int(math.ceil(TWO_PI / self.d_phi))
        if max_width is None:
            self.max_width = self.n_rho
        else:
            self.max_width = int(max_width)
            if self.max_width < 1:
                raise ValueError(f"max_width must be >= 1, got {max_width}")
        self.thetas = np.arange(self.n_theta, dtype=np.float64) * self.d_theta
        self.cos_table = np.cos(self.thetas)
        self.sin_table = np.sin(self.thetas)
        self._all = None
        self._f_grid = None
        self._area_cache = {}
        self.rows_per_batch = 1_500_000

    def slab_axes(self):
        return (
            AxisSpec("bip", self.n_rho, offset=self.half_cells + 1, step=self.d_rho),
            AxisSpec("bip", self.n_phi, step=self.d_phi, circular=True),
        )

    def axes(self):
        return (AxisSpec("mono", self.n_theta, step=self.d_theta),) + self.slab_axes()

    def _ranges(self):
        ss0, ss1 = [], []
        for i in range(1, self.n_rho + 1):
            top = min(i + self.max_width - 1, self.n_rho)
            for j in range(i, top + 1):
                ss0.append(i)
                ss1.append(j)
        return np.array(ss0, np.int64), np.array(ss1, np.int64)

    def n_ranges(self) -> int:
        w = min(self.max_width, self.n_rho)
        # sum over widths 1..w of (n_rho - width + 1)
        return w * self.n_rho - (w * (w - 1)) // 2

    def n_candidates(self) -> int:
        return self.n_theta * self.n_ranges() * self.n_phi * self.n_phi

    def ln_eta2(self) -> float:
        return math.log(self.n_candidates())

    def phi_cells(self, xc, yc) -> np.ndarray:
        """1-based polar-angle cell; the center pixel lands in cell 1."""
        phi = np.mod(np.arctan2(yc, xc), TWO_PI)
        f = np.floor(phi / self.d_phi).astype(np.int64) + 1
        return np.minimum(f, self.n_phi)

    def f_grid(self) -> np.ndarray:
        """Polar-angle cell of every pixel, evaluated once on the full grid.

        arctan2 may take different code paths for different array layouts,
        so the cell of a given pixel is always read from this grid rather
        than recomputed on a subset.
        """
        if self._f_grid is None:
            gx, gy = self.geometry.centered_grids()
            self._f_grid = self.phi_cells(gx, gy)
        return self._f_grid

    def offset_cells_at(self, k, xc, yc) -> np.ndarray:
        """1-based offset-axis index at orientation cell k."""
        rho = xc * self.cos_table[k - 1] + yc * self.sin_table[k - 1]
        s = round_half_away(rho / self.d_rho).astype(np.int64)
        return s + (self.half_cells + 1)

    def _all_pixels(self):
        if self._all is None:
            xc, yc = self.geometry.all_coords()
            self._all = (xc, yc, self.f_grid().ravel())
        return self._all

    def build(self, image):
        image = self.geometry.check(image)
        ys, xs = np.nonzero(image)
        cx, cy = self.geometry.center
        return xs + 1.0 - cx, ys + 1.0 - cy, self.f_grid()[ys, xs]

    def _slab(self, k, xc, yc, f) -> CumulativeSpace:
        s = self.offset_cells_at(k, xc, yc)
        if s.size and (s.min() < 1 or s.max() > self.n_rho):
            raise RuntimeError("offset cell fell outside the axis; geometry broken")
        counts = np.bincount(
            (s - 1) * self.n_phi + (f - 1), minlength=self.n_rho * self.n_phi
        )
        space = CumulativeSpace(self.slab_axes(), cells=counts.reshape(self.n_rho, self.n_phi))
        return space.integrate_two()

    def _area_psum(self, k):
        # the all-pixel slab depends only on the geometry, never on the image
        if k not in self._area_cache:
            axc, ayc, af = self._all_pixels()
            self._area_cache[k] = self._slab(k, axc, ayc, af)._psum
        return self._area_cache[k]

    def vote(self, image) -> CumulativeSpace:
        """Full 3-D vote space; only for small grids (tests, diagnostics)."""
        total = self.n_theta * self.n_rho * self.n_phi
        if total > 50_000_000:
            raise ValueError(f"full vote space would hold {total} cells; scan in slabs instead")
        xc, yc, f = self.build(image)
        grid = np.zeros((self.n_theta, self.n_rho, self.n_phi), np.int64)
        for k in range(1, self.n_theta + 1):
            s = self.offset_cells_at(k, xc, yc)
            counts = np.bincount(
                (s - 1) * self.n_phi + (f - 1), minlength=self.n_rho * self.n_phi
            )
            grid[k - 1] = counts.reshape(self.n_rho, self.n_phi)
        return CumulativeSpace(self.axes(), cells=grid)

    def iter_blocks(self, handle):
        """Batches per orientation, chunked over offset intervals.

        Within a batch rows follow (i, j, f0, f1) in ascending index
        order; each row holds the interval count against the box-sum
        identity for circular second axes.
        """
        xc, yc, f = handle
        ss0, ss1 = self._ranges()
        n_phi = self.n_phi
        ff0 = np.repeat(np.arange(1, n_phi + 1, dtype=np.int64), n_phi)
        ff1 = np.tile(np.arange(1, n_phi + 1, dtype=np.int64), n_phi)
        wrap = ff0 > ff1
        n_arcs = n_phi * n_phi
        chunk = max(1, self.rows_per_batch // n_arcs)
        for k in range(1, self.n_theta + 1):
            gv = self._slab(k, xc, yc, f)._psum
            ga = self._area_psum(k)
            for lo in range(0, len(ss0), chunk):
                s0 = ss0[lo : lo + chunk]
                s1 = ss1[lo : lo + chunk]
                dv = gv[s1] - gv[s0 - 1]
                da = ga[s1] - ga[s0 - 1]
                kap = dv[:, ff1] - dv[:, ff0 - 1]
                kap[:, wrap] += dv[:, -1:]
                nu = da[:, ff1] - da[:, ff0 - 1]
                nu[:, wrap] += da[:, -1:]
                m = len(s0) * n_arcs
                cells = np.empty((m, 5), np.int32)
                cells[:, 0] = k
                cells[:, 1] = np.repeat(s0, n_arcs)
                cells[:, 2] = np.repeat(s1, n_arcs)
                cells[:, 3] = np.tile(ff0, len(s0))
                cells[:, 4] = np.tile(ff1, len(s0))
                yield nu.ravel(), kap.ravel(), cells

    def _validated(self, cells):
        k, i, j, f0, f1 = _as_cells(cells, 5)
        _check_range("theta", k, k, self.n_theta)
        _check_range("rho", i, j, self.n_rho)
        if j - i + 1 > self.max_width:
            raise ValueError(f"offset interval wider than max_width={self.max_width}")
        _check_range("phi lo", f0, f0, self.n_phi)
        _check_range("phi hi", f1, f1, self.n_phi)
        return k, i, j, f0, f1

    def pattern_pixels(self, cells) -> np.ndarray:
        k, i, j, f0, f1 = self._validated(cells)
        gx, gy = self.geometry.centered_grids()
        s = self.offset_cells_at(k, gx, gy)
        in_strip = (s >= i) & (s <= j)
        fg = self.f_grid()
        if f0 <= f1:
            in_arc = (fg >= f0) & (fg <= f1)
        else:
            in_arc = (fg >= f0) | (fg <= f1)
        return in_strip & in_arc

    def count_true(self, image, cells) -> int:
        image = self.geometry.check(image)
        return int((self.pattern_pixels(cells) & image).sum())

    def query_count(self, space: CumulativeSpace, cells) -> int:
        """True-pixel count through the integrated full space (4 or 8 reads)."""
        k, i, j, f0, f1 = self._validated(cells)
        return space.query_wrapped_rect((k,), i, j, f0, f1)

    def cardinality(self, cells) -> int:
        return int(self.pattern_pixels(cells).sum())

    def cells_to_params(self, cells) -> BoundedStripParams:
        k, i, j, f0, f1 = self._validated(cells)
        off = self.half_cells + 1
        return BoundedStripParams(
            theta=(k - 1) * self.d_theta,
            rho_lo=(i - off - 0.5) * self.d_rho,
            rho_hi=(j - off + 0.5) * self.d_rho,
            phi=(f0 - 1) * self.d_phi,
            psi=math.fmod(f1 * self.d_phi, TWO_PI),
        )

    def params_to_cells(self, params: BoundedStripParams):
        k = int(math.floor(params.theta / self.d_theta + 0.5 + 1e-9)) + 1
        off = self.half_cells + 1
        i = int(math.floor(params.rho_lo / self.d_rho + 0.5 + 1e-9)) + off
        j = int(math.floor(params.rho_hi / self.d_rho - 0.5 + 1e-9)) + off
        f0 = int(math.floor(math.fmod(params.phi, TWO_PI) / self.d_phi + 1e-9)) + 1
        psi = math.fmod(params.psi, TWO_PI)
        if psi <= 0:
            psi += TWO_PI
        f1 = int(math.ceil(psi / self.d_phi - 1e-9))
        return self._validated((k, i, j, min(f0, self.n_phi), min(f1, self.n_phi)))


class ListedBoundedStripFamily(BoundedStripFamily):
    """Bounded strips restricted to an explicit candidate list.

    Used when the candidate set comes from somewhere else (endpoint
    pairing, a coarse first pass) instead of the full quantized grid.
    Candidates are deduplicated and kept in ascending index order.
    """

    name = "bounded-strips-listed"

    def __init__(self, geometry: ImageGeometry, candidates, **config):
        super().__init__(geometry, **config)
        rows = sorted(set(self._validated(c) for c in candidates))
        self.candidates = np.array(rows, np.int64).reshape(-1, 5)

    def n_candidates(self) -> int:
        return len(self.candidates)

    def ln_eta2(self) -> float:
        if len(self.candidates) == 0:
            raise ValueError("empty candidate list has no scan to correct for")
        return math.log(len(self.candidates))

    def iter_blocks(self, handle):
        """One batch per orientation cell present in the candidate list."""
        if len(self.candidates) == 0:
            return
        xc, yc, f = handle
        cand = self.candidates
        n_phi = self.n_phi
        starts = np.flatnonzero(np.diff(cand[:, 0], prepend=-1))
        bounds = list(starts) + [len(cand)]
        for b in range(len(starts)):
            rows = cand[bounds[b] : bounds[b + 1]]
            k = int(rows[0, 0])
            gv = self._slab(k, xc, yc, f)._psum
            ga = self._area_psum(k)
            s0, s1 = rows[:, 1], rows[:, 2]
            f0, f1 = rows[:, 3], rows[:, 4]
            r = np.arange(len(rows))
            dv = gv[s1] - gv[s0 - 1]
            da = ga[s1] - ga[s0 - 1]
            kap = dv[r, f1] - dv[r, f0 - 1]
            nu = da[r, f1] - da[r, f0 - 1]
            wrap = f0 > f1
            kap[wrap] += dv[wrap, -1]
            nu[wrap] += da[wrap, -1]
            yield nu, kap, rows.astype(np.int32)


FAMILIES = {
    TileFamily.name: TileFamily,
    StripFamily.name: StripFamily,
    RingFamily.name: RingFamily,
    BoundedStripFamily.name: BoundedStripFamily,
}


def make_family(name: str, geometry: ImageGeometry, **config):
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None
    return cls(geometry, **config)


def vote_tiles(image) -> CumulativeSpace:
    return TileFamily(ImageGeometry.of(image)).vote(image)


def vote_strips(image, d_rho: float = 1.0, d_theta=None) -> CumulativeSpace:
    return StripFamily(ImageGeometry.of(image), d_rho=d_rho, d_theta=d_theta).vote(image)


def vote_rings(image, d_rho: float = 1.0, stride: int = 2) -> CumulativeSpace:
    return RingFamily(ImageGeometry.of(image), d_rho=d_rho, stride=stride).vote(image)


def vote_bounded_strips(image, d_rho: float = 1.0, d_theta=None, d_phi=None) -> CumulativeSpace:
    family = BoundedStripFamily(ImageGeometry.of(image), d_rho=d_rho, d_theta=d_theta, d_phi=d_phi)
    return family.vote(image)

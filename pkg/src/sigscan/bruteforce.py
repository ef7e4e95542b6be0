"""Brute-force reference counting over the pattern families.

Everything here recomputes pattern membership from first principles with
plain python loops: no cumulative grids, no prefix sums, no imports from
the fast path. The one shared ingredient is numerical: orientation tables
and the polar-angle grid are produced by the same numpy array calls the
fast path uses, because transcendental functions are not guaranteed to
round identically across call shapes, and the comparison must be exact.

Coordinates are 1-based, x along columns, y along rows; the center of an
image with n_cols columns and n_rows rows is ((n_cols+1)/2, (n_rows+1)/2).
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi

BRUTE_MAX_SIDE = 32
BRUTE_MAX_CANDIDATES = 2_000_000


def _rha(a: float) -> int:
    """Round half away from zero."""
    if a < 0:
        return -int(math.floor(0.5 - a))
    return int(math.floor(a + 0.5))


def _geometry(shape):
    n_rows, n_cols = shape
    cx = (n_cols + 1) / 2.0
    cy = (n_rows + 1) / 2.0
    rho_max = 0.5 * math.hypot(n_cols, n_rows)
    return n_rows, n_cols, cx, cy, rho_max


def _trig_tables(shape, d_theta):
    _, _, _, _, rho_max = _geometry(shape)
    if d_theta is None:
        d_theta = 1.0 / rho_max
    n_theta = int(math.ceil(math.pi / d_theta))
    thetas = np.arange(n_theta, dtype=np.float64) * d_theta
    return np.cos(thetas), np.sin(thetas), n_theta


def _phi_cell_grid(shape, d_phi):
    n_rows, n_cols, cx, cy, rho_max = _geometry(shape)
    if d_phi is None:
        d_phi = 1.0 / rho_max
    n_phi = int(math.ceil(TWO_PI / d_phi))
    gx, gy = np.meshgrid(
        np.arange(1, n_cols + 1, dtype=np.float64),
        np.arange(1, n_rows + 1, dtype=np.float64),
    )
    phi = np.mod(np.arctan2(gy - cy, gx - cx), TWO_PI)
    grid = np.minimum(np.floor(phi / d_phi).astype(np.int64) + 1, n_phi)
    return grid, n_phi


def _rho_axis(shape, d_rho):
    _, _, _, _, rho_max = _geometry(shape)
    half = int(math.ceil(rho_max / d_rho))
    return half, 2 * half + 1


def _strip_index(x, y, cx, cy, cos_t, sin_t, d_rho, half):
    rho = (x - cx) * cos_t + (y - cy) * sin_t
    return _rha(rho / d_rho) + half + 1


def _ray_index(x, y, x0, y0, d_rho):
    dx = x - float(x0)
    dy = y - float(y0)
    return _rha(math.sqrt(dx * dx + dy * dy) / d_rho)


def _in_arc(f, f0, f1):
    if f0 <= f1:
        return f0 <= f <= f1
    return f >= f0 or f <= f1


def brute_pixels(shape, family, cells, d_rho=1.0, d_theta=None, d_phi=None, stride=2):
    """All (x, y) belonging to the candidate, by direct per-pixel tests."""
    n_rows, n_cols, cx, cy, _ = _geometry(shape)
    out = []
    if family == "tiles":
        x0, y0, x1, y1 = cells
        for y in range(1, n_rows + 1):
            for x in range(1, n_cols + 1):
                if x0 <= x <= x1 and y0 <= y <= y1:
                    out.append((x, y))
    elif family == "strips":
        k, i, j = cells
        cos_tab, sin_tab, _ = _trig_tables(shape, d_theta)
        half, _ = _rho_axis(shape, d_rho)
        ct, st = float(cos_tab[k - 1]), float(sin_tab[k - 1])
        for y in range(1, n_rows + 1):
            for x in range(1, n_cols + 1):
                if i <= _strip_index(x, y, cx, cy, ct, st, d_rho, half) <= j:
                    out.append((x, y))
    elif family == "rings":
        a, b, i, j = cells
        x0 = 1 + (a - 1) * stride
        y0 = 1 + (b - 1) * stride
        for y in range(1, n_rows + 1):
            for x in range(1, n_cols + 1):
                if i - 1 <= _ray_index(x, y, x0, y0, d_rho) <= j - 1:
                    out.append((x, y))
    elif family == "bounded-strips":
        k, i, j, f0, f1 = cells
        cos_tab, sin_tab, _ = _trig_tables(shape, d_theta)
        half, _ = _rho_axis(shape, d_rho)
        fgrid, _ = _phi_cell_grid(shape, d_phi)
        ct, st = float(cos_tab[k - 1]), float(sin_tab[k - 1])
        for y in range(1, n_rows + 1):
            for x in range(1, n_cols + 1):
                if i <= _strip_index(x, y, cx, cy, ct, st, d_rho, half) <= j and _in_arc(
                    int(fgrid[y - 1, x - 1]), f0, f1
                ):
                    out.append((x, y))
    else:
        raise ValueError(f"unknown family {family!r}")
    return out


def brute_count(image, family, cells, **config) -> int:
    """True pixels inside the candidate, by direct per-pixel tests."""
    image = np.asarray(image).astype(bool)
    return sum(1 for x, y in brute_pixels(image.shape, family, cells, **config) if image[y - 1, x - 1])


def brute_area(shape, family, cells, **config) -> int:
    return len(brute_pixels(shape, family, cells, **config))


def _record(table, nu, kappa, cells):
    if kappa <= 0:
        return
    cur = table.get(nu)
    if cur is None or kappa > cur[0] or (kappa == cur[0] and cells < cur[1]):
        table[nu] = (kappa, cells)


def brute_best(image, family, d_rho=1.0, d_theta=None, d_phi=None, stride=2, max_width=None):
    """Exhaustive per-cardinality champion table.

    Returns {nu: (kappa, cells)} for each cardinality whose best candidate
    holds at least one true pixel, replacing on strictly larger kappa and
    on equal kappa with a lexicographically smaller cell tuple. Pixels are
    binned per candidate cell first; a candidate's counts are then plain
    sums over its cells, still without any cumulative structure.
    """
    image = np.asarray(image).astype(bool)
    n_rows, n_cols = image.shape
    if n_rows > BRUTE_MAX_SIDE or n_cols > BRUTE_MAX_SIDE:
        raise ValueError(f"brute_best is guarded to {BRUTE_MAX_SIDE}x{BRUTE_MAX_SIDE} images")
    _, _, cx, cy, _ = _geometry(image.shape)
    table = {}

    if family == "tiles":
        if n_cols**2 * n_rows**2 > BRUTE_MAX_CANDIDATES * 4:
            raise ValueError("tile candidate set too large for brute enumeration")
        for x0 in range(1, n_cols + 1):
            for y0 in range(1, n_rows + 1):
                for x1 in range(x0, n_cols + 1):
                    run = 0
                    for y1 in range(y0, n_rows + 1):
                        run += int(image[y1 - 1, x0 - 1 : x1].sum())
                        _record(table, (x1 - x0 + 1) * (y1 - y0 + 1), run, (x0, y0, x1, y1))
        return table

    if family == "strips":
        cos_tab, sin_tab, n_theta = _trig_tables(image.shape, d_theta)
        half, n_rho = _rho_axis(image.shape, d_rho)
        if n_theta * n_rho * n_rho > BRUTE_MAX_CANDIDATES * 2:
            raise ValueError("strip candidate set too large for brute enumeration")
        for k in range(1, n_theta + 1):
            ct, st = float(cos_tab[k - 1]), float(sin_tab[k - 1])
            hist_t = [0] * (n_rho + 1)
            hist_a = [0] * (n_rho + 1)
            for y in range(1, n_rows + 1):
                for x in range(1, n_cols + 1):
                    idx = _strip_index(x, y, cx, cy, ct, st, d_rho, half)
                    hist_a[idx] += 1
                    if image[y - 1, x - 1]:
                        hist_t[idx] += 1
            for i in range(1, n_rho + 1):
                kappa = 0
                nu = 0
                for j in range(i, n_rho + 1):
                    kappa += hist_t[j]
                    nu += hist_a[j]
                    if nu:
                        _record(table, nu, kappa, (k, i, j))
        return table

    if family == "rings":
        half, _ = _rho_axis(image.shape, d_rho)
        n_ray = half + 1
        xs0 = list(range(1, n_cols + 1, stride))
        ys0 = list(range(1, n_rows + 1, stride))
        if len(xs0) * len(ys0) * n_ray * n_ray > BRUTE_MAX_CANDIDATES * 2:
            raise ValueError("ring candidate set too large for brute enumeration")
        for a, x0 in enumerate(xs0, start=1):
            for b, y0 in enumerate(ys0, start=1):
                hist_t = [0] * (n_ray + 1)
                hist_a = [0] * (n_ray + 1)
                for y in range(1, n_rows + 1):
                    for x in range(1, n_cols + 1):
                        r = _ray_index(x, y, x0, y0, d_rho)
                        if r < n_ray:
                            hist_a[r] += 1
                            if image[y - 1, x - 1]:
                                hist_t[r] += 1
                for i in range(1, n_ray + 1):
                    kappa = 0
                    nu = 0
                    for j in range(i, n_ray + 1):
                        kappa += hist_t[j - 1]
                        nu += hist_a[j - 1]
                        if nu:
                            _record(table, nu, kappa, (a, b, i, j))
        return table

    if family == "bounded-strips":
        cos_tab, sin_tab, n_theta = _trig_tables(image.shape, d_theta)
        half, n_rho = _rho_axis(image.shape, d_rho)
        fgrid, n_phi = _phi_cell_grid(image.shape, d_phi)
        w_cap = n_rho if max_width is None else int(max_width)
        n_ranges = sum(n_rho - w + 1 for w in range(1, min(w_cap, n_rho) + 1))
        if n_theta * n_ranges * n_phi * n_phi > BRUTE_MAX_CANDIDATES * 8:
            raise ValueError("bounded-strip candidate set too large for brute enumeration")
        for k in range(1, n_theta + 1):
            ct, st = float(cos_tab[k - 1]), float(sin_tab[k - 1])
            hist_t = [[0] * (n_phi + 1) for _ in range(n_rho + 1)]
            hist_a = [[0] * (n_phi + 1) for _ in range(n_rho + 1)]
            for y in range(1, n_rows + 1):
                for x in range(1, n_cols + 1):
                    idx = _strip_index(x, y, cx, cy, ct, st, d_rho, half)
                    f = int(fgrid[y - 1, x - 1])
                    hist_a[idx][f] += 1
                    if image[y - 1, x - 1]:
                        hist_t[idx][f] += 1
            for i in range(1, n_rho + 1):
                row_t = [0] * (n_phi + 1)
                row_a = [0] * (n_phi + 1)
                for j in range(i, min(i + w_cap - 1, n_rho) + 1):
                    for f in range(1, n_phi + 1):
                        row_t[f] += hist_t[j][f]
                        row_a[f] += hist_a[j][f]
                    for f0 in range(1, n_phi + 1):
                        kappa = 0
                        nu = 0
                        f = f0
                        for _ in range(n_phi):
                            kappa += row_t[f]
                            nu += row_a[f]
                            if nu:
                                _record(table, nu, kappa, (k, i, j, f0, f))
                            f = f + 1 if f < n_phi else 1
                    # full-circle duplicates of each starting cell are
                    # enumerated above; nothing else to add
        return table

    raise ValueError(f"unknown family {family!r}")

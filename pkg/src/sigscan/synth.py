"""Seeded synthetic binary scenes: noise backgrounds and planted patterns.

All randomness comes from numpy's default_rng (PCG64) seeded explicitly,
so a (seed, size, density) triple always regenerates the same image.
Fixture files record that triple in a sidecar manifest.
"""

from __future__ import annotations

import json

import numpy as np

from sigscan import pnm
from sigscan.families import ImageGeometry, make_family, round_half_away


def gen_bernoulli(n_cols: int, n_rows: int, p: float, seed) -> np.ndarray:
    """Independent Bernoulli(p) pixels; PCG64 stream, same seed same image."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    return rng.random((n_rows, n_cols)) < p


def plant_pattern(image, family, cells, inner_density: float, seed) -> np.ndarray:
    """Overwrite the pattern's pixels with Bernoulli(inner_density) draws.

    cells may also be the family's parameter dataclass; it is quantized
    to cells first. Background pixels are untouched. Returns a new array.
    """
    if not 0.0 <= inner_density <= 1.0:
        raise ValueError(f"inner_density must be in [0, 1], got {inner_density}")
    if not isinstance(cells, tuple):
        cells = family.params_to_cells(cells)
    image = family.geometry.check(image).copy()
    mask = family.pattern_pixels(cells)
    rng = np.random.default_rng(seed)
    ys, xs = np.nonzero(mask)
    image[ys, xs] = rng.random(len(ys)) < inner_density
    return image


def draw_polyline(shape, points, dash=None) -> np.ndarray:
    """Width-1 pixels along straight segments between consecutive points.

    points are 1-based (x, y) pairs; samples run at unit-ish spacing
    along each segment. dash=(on, off) keeps `on` pixels then skips
    `off`, the counter running across segment joints, which makes gapped
    crack-like seeds out of a continuous path.
    """
    mask = np.zeros(shape, bool)
    n_rows, n_cols = shape
    period = None
    if dash is not None:
        on, off = dash
        if on < 1 or off < 0:
            raise ValueError(f"dash wants (on >= 1, off >= 0), got {dash}")
        period = on + off
    counter = 0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        n = int(max(abs(x1 - x0), abs(y1 - y0))) + 1
        for t in range(n):
            frac = t / (n - 1) if n > 1 else 0.0
            x = int(round_half_away(np.float64(x0 + frac * (x1 - x0))))
            y = int(round_half_away(np.float64(y0 + frac * (y1 - y0))))
            if period is None or counter % period < dash[0]:
                if 1 <= x <= n_cols and 1 <= y <= n_rows:
                    mask[y - 1, x - 1] = True
            counter += 1
    return mask


def build_scene(n_cols, n_rows, p, plants, seed, family_configs=None):
    """Noise background plus planted patterns; returns (image, records).

    plants: iterable of (family_name, cells_or_params, inner_density).
    Sub-seeds derive from the scene seed so scenes are reproducible as a
    whole. records echoes each plant with its quantized cells.
    """
    image = gen_bernoulli(n_cols, n_rows, p, seed)
    geometry = ImageGeometry.of(image)
    configs = family_configs or {}
    records = []
    for offset, (name, cells, inner) in enumerate(plants, start=1):
        family = make_family(name, geometry, **configs.get(name, {}))
        if not isinstance(cells, tuple):
            cells = family.params_to_cells(cells)
        image = plant_pattern(image, family, cells, inner, seed + 1000 * offset)
        records.append({"family": name, "cells": list(cells), "inner_density": inner})
    return image, records


def write_fixture(path, image, manifest: dict):
    """Raw bitmap plus a JSON manifest sidecar at path + '.json'.

    The manifest must carry enough to regenerate and to score: generator
    name, seed, densities, and the planted patterns' families and cells.
    """
    manifest = dict(manifest)
    manifest.setdefault("generator", "numpy.random.default_rng(PCG64)")
    pnm.write_bitmap(path, image, comment="seeded synthetic scene")
    with open(str(path) + ".json", "w", encoding="ascii") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")


def read_manifest(path) -> dict:
    with open(str(path) + ".json", "r", encoding="ascii") as f:
        return json.load(f)


def write_scene_fixture(path, n_cols, n_rows, p, plants, seed, family_configs=None):
    """build_scene and persist it with a full manifest; returns the image."""
    image, records = build_scene(n_cols, n_rows, p, plants, seed, family_configs)
    write_fixture(
        path,
        image,
        {
            "n_cols": n_cols,
            "n_rows": n_rows,
            "background_p": p,
            "seed": seed,
            "plants": records,
            "family_configs": family_configs or {},
        },
    )
    return image


def ground_truth_mask(shape, records, family_configs=None) -> np.ndarray:
    """Union of planted pattern footprints from manifest records."""
    geometry = ImageGeometry.of(np.zeros(shape, bool))
    configs = family_configs or {}
    mask = np.zeros(shape, bool)
    for rec in records:
        family = make_family(rec["family"], geometry, **configs.get(rec["family"], {}))
        mask |= family.pattern_pixels(tuple(rec["cells"]))
    return mask

"""Precision and recall with a spatial tolerance radius.

True positives compare the detection against the ground truth dilated by
a Euclidean disk; false negatives compare the ground truth against the
dilated detection. Empty denominators score 1.0 by convention, so a
blank detection on a blank truth is a perfect score and never a crash.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_dilation

from sigscan import pnm


@dataclass(frozen=True)
class PRScore:
    precision: float
    recall: float
    dilation_radius: int
    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        for field in ("precision", "recall"):
            v = getattr(self, field)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{field} must be in [0, 1], got {v}")
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("counts must be nonnegative")


def disk(radius: int) -> np.ndarray:
    """Euclidean disk structuring element: offsets within distance radius."""
    radius = int(radius)
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    span = np.arange(-radius, radius + 1)
    dx, dy = np.meshgrid(span, span)
    return dx * dx + dy * dy <= radius * radius


def dilate(mask, radius: int) -> np.ndarray:
    """Morphological dilation by a Euclidean disk; radius 0 is identity."""
    mask = np.asarray(mask, bool)
    if radius == 0:
        return mask.copy()
    return binary_dilation(mask, structure=disk(radius))


def _ratio(numer: int, denom: int) -> float:
    return 1.0 if denom == 0 else numer / denom


def precision_recall(detected, ground_truth, radius: int) -> PRScore:
    """Tolerance-scored match between a detection mask and ground truth."""
    detected = np.asarray(detected, bool)
    ground_truth = np.asarray(ground_truth, bool)
    if detected.shape != ground_truth.shape:
        raise ValueError(f"shape mismatch: {detected.shape} vs {ground_truth.shape}")
    tp = int((detected & dilate(ground_truth, radius)).sum())
    fp = int(detected.sum()) - tp
    fn = int((ground_truth & ~dilate(detected, radius)).sum())
    n_gt = int(ground_truth.sum())
    return PRScore(
        precision=_ratio(tp, tp + fp),
        recall=_ratio(n_gt - fn, n_gt),
        dilation_radius=int(radius),
        tp=tp,
        fp=fp,
        fn=fn,
    )


def summarize(values) -> dict:
    """The four aggregate statistics: mean, median, 25th, 75th percentile."""
    arr = np.asarray(list(values), np.float64)
    if arr.size == 0:
        raise ValueError("nothing to summarize")
    return {
        "mean": float(arr.mean()),
        "median": float(np.median(arr)),
        "p25": float(np.percentile(arr, 25)),
        "p75": float(np.percentile(arr, 75)),
    }


def _mask_files(path):
    if os.path.isdir(path):
        names = sorted(
            n for n in os.listdir(path) if n.endswith((".pbm", ".pgm", ".pnm"))
        )
        if not names:
            raise ValueError(f"no mask files under {path}")
        return [os.path.join(path, n) for n in names]
    return [path]


def score_paths(det_path, gt_path, radii):
    """Per-file scores for a mask file or directory pair.

    Directories pair files by sorted name order and must hold the same
    count. Returns rows of (name, radius, PRScore) for every radius.
    """
    det_files = _mask_files(det_path)
    gt_files = _mask_files(gt_path)
    if len(det_files) != len(gt_files):
        raise ValueError(
            f"{len(det_files)} detection masks vs {len(gt_files)} ground truths"
        )
    rows = []
    for det_file, gt_file in zip(det_files, gt_files):
        det = pnm.read_bitmap(det_file)
        gt = pnm.read_bitmap(gt_file)
        for radius in radii:
            rows.append((os.path.basename(det_file), radius, precision_recall(det, gt, radius)))
    return rows


def aggregate(rows):
    """Per-radius summaries of precision and recall over score rows."""
    out = {}
    for radius in sorted({r for _, r, _ in rows}):
        scores = [s for _, r, s in rows if r == radius]
        out[radius] = {
            "precision": summarize(s.precision for s in scores),
            "recall": summarize(s.recall for s in scores),
        }
    return out

"""Estimator-style front end over the detection pipelines.

PatternDetector and CrackDetector follow the fit/fit_predict convention:
construction only stores parameters (so instances clone cleanly), fit
validates the input image and runs the pipeline, fitted state lands in
trailing-underscore attributes. Both are transductive, like clustering
estimators: they describe the image they were fitted on.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from sigscan.crack import detect_cracks
from sigscan.detect import detect_all
from sigscan.families import FAMILIES, ImageGeometry, make_family

_TOKEN_ALIASES = {
    "tile": "tiles",
    "strip": "strips",
    "ring": "rings",
    "bstrip": "bounded-strips",
}


def check_binary_image(X) -> np.ndarray:
    """Validate a 2-d binary image, returning a boolean array.

    Accepts boolean arrays or numeric arrays containing only 0 and 1.
    Anything else (wrong rank, empty, gray values) is rejected so a
    mistaken gray image never silently becomes all-true.
    """
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d image, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("image is empty")
    if arr.dtype == bool:
        return arr
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("non-binary pixel values; threshold the image first")
    return arr.astype(bool)


def _resolve_family(name: str) -> str:
    resolved = _TOKEN_ALIASES.get(name, name)
    if resolved not in FAMILIES:
        known = sorted(FAMILIES) + sorted(_TOKEN_ALIASES)
        raise ValueError(f"unknown family {name!r}; known: {known}")
    return resolved


class PatternDetector(BaseEstimator):
    """Greedy significant-pattern extraction for one family.

    Parameters mirror the pipeline configuration: quantization steps
    (theta_step, rho_step, phi_step), ring center stride, bounded-strip
    width cap, an optional test-count override eta2, seed and threads.

    Attributes after fit: detections_ (list), set_significance_, p_,
    ln_eta2_, residual_, curves_, n_iterations_, family_ (the family
    object, exposing pattern_pixels for rendering).
    """

    def __init__(self, family="strip", theta_step=None, rho_step=1.0,
                 phi_step=None, stride=2, max_width=None, eta2=None,
                 seed=0, threads=1):
        self.family = family
        self.theta_step = theta_step
        self.rho_step = rho_step
        self.phi_step = phi_step
        self.stride = stride
        self.max_width = max_width
        self.eta2 = eta2
        self.seed = seed
        self.threads = threads

    def _build_family(self, geometry):
        name = _resolve_family(self.family)
        config = {"d_rho": self.rho_step} if name != "tiles" else {}
        if name in ("strips", "bounded-strips") and self.theta_step is not None:
            config["d_theta"] = self.theta_step
        if name == "rings":
            config["stride"] = self.stride
        if name == "bounded-strips":
            if self.phi_step is not None:
                config["d_phi"] = self.phi_step
            if self.max_width is not None:
                config["max_width"] = self.max_width
        return make_family(name, geometry, **config)

    def fit(self, X, y=None):
        image = check_binary_image(X)
        family = self._build_family(ImageGeometry.of(image))
        ln_eta2 = None
        if self.eta2 is not None:
            if self.eta2 <= 0:
                raise ValueError(f"eta2 must be > 0, got {self.eta2}")
            ln_eta2 = math.log(self.eta2)
        result = detect_all(
            image, family, seed=self.seed, threads=self.threads, ln_eta2=ln_eta2
        )
        self.family_ = family
        self.result_ = result
        self.detections_ = result.detections
        self.set_significance_ = result.set_significance
        self.p_ = result.p
        self.ln_eta2_ = result.ln_candidates
        self.residual_ = result.residual
        self.curves_ = result.curves
        self.n_iterations_ = result.n_iterations
        return self

    def pattern_mask_(self) -> np.ndarray:
        """Union of the fitted detections' pixels."""
        check_is_fitted(self, "detections_")
        mask = np.zeros(self.residual_.shape, bool)
        for det in self.detections_:
            mask |= self.family_.pattern_pixels(det.cells)
        return mask

    def fit_predict(self, X, y=None) -> np.ndarray:
        """Fit and return the detected-pattern pixel mask."""
        return self.fit(X, y).pattern_mask_()


class CrackDetector(BaseEstimator):
    """Two-scale crack pipeline behind the same estimator conventions.

    Attributes after fit: mask_ (the crack estimate), filtered_,
    extremities_, window_strips_, chained_ (image-scale DetectionSet),
    grid_, chain_family_.
    """

    def __init__(self, window_w=64, window_h=64, w_max=5, seed=0, threads=1):
        self.window_w = window_w
        self.window_h = window_h
        self.w_max = w_max
        self.seed = seed
        self.threads = threads

    def fit(self, X, y=None):
        image = check_binary_image(X)
        result = detect_cracks(
            image,
            window_w=self.window_w,
            window_h=self.window_h,
            seed=self.seed,
            w_max=self.w_max,
            threads=self.threads,
        )
        self.result_ = result
        self.mask_ = result.mask
        self.filtered_ = result.filtered
        self.extremities_ = result.extremities
        self.window_strips_ = result.window_strips
        self.chained_ = result.chained
        self.grid_ = result.grid
        self.chain_family_ = result.chain_family
        return self

    def fit_predict(self, X, y=None) -> np.ndarray:
        """Fit and return the crack mask."""
        return self.fit(X, y).mask_

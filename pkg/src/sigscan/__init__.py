"""Significance-driven detection of parametric patterns in binary images."""

from sigscan.crack import CrackResult, WindowGrid, detect_cracks
from sigscan.cumulative import AxisSpec, CumulativeSpace
from sigscan.detect import BestPerCardinality, Detection, DetectionSet, detect_all
from sigscan.estimators import CrackDetector, PatternDetector, check_binary_image
from sigscan.evaluate import PRScore, dilate, precision_recall
from sigscan.families import (
    BoundedStripFamily,
    BoundedStripParams,
    ImageGeometry,
    ListedBoundedStripFamily,
    RingFamily,
    RingParams,
    StripFamily,
    StripParams,
    TileFamily,
    TileParams,
    make_family,
)
from sigscan.nfa import (
    DensityBelowModelError,
    NaiveModel,
    SignificanceResult,
    binomial_tail_log,
    hoeffding_significance,
    significance_exact,
    significance_hoeffding,
)

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "BestPerCardinality",
    "BoundedStripFamily",
    "BoundedStripParams",
    "CrackDetector",
    "CrackResult",
    "CumulativeSpace",
    "DensityBelowModelError",
    "Detection",
    "DetectionSet",
    "ImageGeometry",
    "ListedBoundedStripFamily",
    "NaiveModel",
    "PRScore",
    "PatternDetector",
    "RingFamily",
    "RingParams",
    "SignificanceResult",
    "StripFamily",
    "StripParams",
    "TileFamily",
    "TileParams",
    "WindowGrid",
    "binomial_tail_log",
    "check_binary_image",
    "detect_all",
    "detect_cracks",
    "dilate",
    "hoeffding_significance",
    "make_family",
    "precision_recall",
    "significance_exact",
    "significance_hoeffding",
]

"""Greedy extraction of significant patterns from a binary image.

One round: vote the current image into the family's cumulative spaces,
find for every cardinality nu the candidate holding the most true pixels,
keep the candidate maximizing the density-excess significance, and accept
it only if the significance of the whole detection set (computed on the
pixel union against the original image, with one correction budget per
member) still improves. Accepted patterns are thinned back to the
background density before the next round, so overlapping or nested
patterns do not re-trigger.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from sigscan.nfa import hoeffding_significance


@dataclass(frozen=True)
class Detection:
    """One accepted pattern."""

    family: str
    cells: tuple
    params: object
    kappa: int
    nu: int
    s: float
    iteration: int

    def __post_init__(self):
        if not 0 <= self.kappa <= self.nu:
            raise ValueError(f"need 0 <= kappa <= nu, got {self.kappa}, {self.nu}")


@dataclass
class DetectionSet:
    """Ordered detections plus the state of the stopping rule."""

    family: str
    p: float
    ln_candidates: float
    detections: list = field(default_factory=list)
    set_significance: float = 0.0
    set_significance_history: list = field(default_factory=list)
    curves: list = field(default_factory=list)
    n_iterations: int = 0
    residual: np.ndarray | None = None

    def __len__(self):
        return len(self.detections)


class BestPerCardinality:
    """Champion per cardinality: max true-pixel count and its cell tuple.

    kappa_of[nu] stays 0 until some candidate of cardinality nu holds a
    true pixel; rows replace on strictly larger kappa, or on equal kappa
    with a lexicographically smaller cell tuple.
    """

    def __init__(self, n_max: int, param_len: int):
        self.kappa_of = np.zeros(n_max + 1, np.int64)
        self.cells_of = np.zeros((n_max + 1, param_len), np.int32)

    def update_batch(self, nu, kap, cells):
        """Merge champion rows with pairwise-distinct nu into the table."""
        cur = self.kappa_of[nu]
        replace = kap > cur
        tie = np.flatnonzero(kap == cur)
        if len(tie):
            replace[tie] |= _lex_less(cells[tie], self.cells_of[nu[tie]])
        if replace.any():
            idx = nu[replace]
            self.kappa_of[idx] = kap[replace]
            self.cells_of[idx] = cells[replace]

    def merge(self, other: "BestPerCardinality"):
        nz = np.flatnonzero(other.kappa_of)
        if len(nz):
            self.update_batch(nz, other.kappa_of[nz], other.cells_of[nz])

    def champion(self, nu: int):
        return int(self.kappa_of[nu]), tuple(int(v) for v in self.cells_of[nu])


def _lex_less(a, b) -> np.ndarray:
    """Row-wise lexicographic a < b for equal-width integer matrices."""
    less = np.zeros(len(a), bool)
    tied = np.ones(len(a), bool)
    for c in range(a.shape[1]):
        less |= tied & (a[:, c] < b[:, c])
        tied &= a[:, c] == b[:, c]
    return less


def reduce_batch(nu, kap, cells):
    """Champions of one candidate batch, or None if no true pixel.

    Rows must arrive in ascending cell-tuple order; the returned rows have
    pairwise-distinct nu, each carrying the batch maximum kappa for that
    nu and, among equals, the lexicographically smallest cells.
    """
    keep = kap > 0
    if not keep.any():
        return None
    nu = np.asarray(nu[keep], np.int64)
    kap = np.asarray(kap[keep], np.int64)
    cells = cells[keep]
    n = len(nu)
    # encode (kappa desc, position asc) in one key so a single scatter-max
    # picks the champion; kappa >= 1 here so keys stay positive
    key = kap * n - np.arange(n, dtype=np.int64)
    buf = np.zeros(int(nu.max()) + 1, np.int64)
    np.maximum.at(buf, nu, key)
    nz = np.flatnonzero(buf)
    best_key = buf[nz]
    best_kap = (best_key + n - 1) // n
    pos = best_kap * n - best_key
    return nz, best_kap, cells[pos]


def scan_candidates(family, handle, n_max: int, threads: int = 1) -> BestPerCardinality:
    """Exhaustive per-cardinality maximization over the candidate set."""
    best = BestPerCardinality(n_max, family.param_len)
    if threads <= 1:
        for batch in family.iter_blocks(handle):
            r = reduce_batch(*batch)
            if r is not None:
                best.update_batch(*r)
        return best
    pending = deque()
    with ThreadPoolExecutor(max_workers=threads) as ex:
        for batch in family.iter_blocks(handle):
            pending.append(ex.submit(reduce_batch, *batch))
            while len(pending) > 2 * threads:
                r = pending.popleft().result()
                if r is not None:
                    best.update_batch(*r)
        while pending:
            r = pending.popleft().result()
            if r is not None:
                best.update_batch(*r)
    return best


def pick_most_significant(best: BestPerCardinality, p: float, ln_eta2: float):
    """Most significant champion with density above p, or None.

    Returns (nu, kappa, s, cells). Ties on s resolve to the smallest nu;
    only strictly positive significance qualifies.
    """
    nus = np.flatnonzero(best.kappa_of)
    if len(nus) == 0:
        return None
    kaps = best.kappa_of[nus]
    ok = kaps > p * nus
    if not ok.any():
        return None
    nus, kaps = nus[ok], kaps[ok]
    s = hoeffding_significance(kaps, nus, p, ln_eta2)
    i = int(np.argmax(s))
    if not s[i] > 0.0:
        return None
    nu = int(nus[i])
    return nu, int(kaps[i]), float(s[i]), best.champion(nu)[1]


def curve_rows(best: BestPerCardinality, p: float, ln_eta2: float):
    """(nu, kappa, s) arrays over cardinalities with a true pixel.

    s is NaN where the champion density falls below p (the significance
    of a density excess is undefined there).
    """
    nus = np.flatnonzero(best.kappa_of)
    kaps = best.kappa_of[nus]
    if len(nus) == 0:
        return nus, kaps, np.zeros(0)
    s = hoeffding_significance(kaps, nus, float(p), ln_eta2)
    s = np.where(kaps >= p * nus, s, np.nan)
    return nus, kaps, s


def remove_pattern(image, mask, p: float, rng) -> np.ndarray:
    """Thin the pattern back to density p, in place.

    Clears max(kappa - floor(p*nu), 0) of the pattern's true pixels,
    chosen by a seeded shuffle; the small epsilon guards floor against
    p*nu landing a hair under an integer.
    """
    inside = mask & image
    kappa = int(inside.sum())
    nu = int(mask.sum())
    keep = int(math.floor(p * nu + 1e-9))
    excess = kappa - keep
    if excess <= 0:
        return image
    ys, xs = np.nonzero(inside)
    sel = rng.permutation(kappa)[:excess]
    image[ys[sel], xs[sel]] = False
    return image


def set_significance(union_mask, original, p: float, n_members: int, ln_candidates: float) -> float:
    """Significance of a detection set from its pixel union.

    The correction term charges one candidate-set budget per member;
    -inf when the union's density does not exceed p.
    """
    nu_u = int(union_mask.sum())
    kappa_u = int((union_mask & original).sum())
    if nu_u == 0 or not kappa_u > p * nu_u:
        return -math.inf
    return float(hoeffding_significance(kappa_u, nu_u, p, n_members * ln_candidates))


def detect_all(image, family, seed: int = 0, threads: int = 1, ln_eta2=None) -> DetectionSet:
    """Greedy loop: scan, pick, test the set significance, thin, repeat.

    The density p is estimated once from the input image. ln_eta2
    overrides the candidate-count correction (default ln of the family's
    candidate count). Degenerate inputs (p = 0 or 1) return an empty set.
    """
    geometry = family.geometry
    original = geometry.check(image).copy()
    work = original.copy()
    n_true = int(original.sum())
    p = n_true / geometry.n_pixels
    ln_a = family.ln_eta2() if ln_eta2 is None else float(ln_eta2)
    result = DetectionSet(family=family.name, p=p, ln_candidates=ln_a)
    if n_true == 0 or n_true == geometry.n_pixels:
        result.residual = work
        return result
    rng = np.random.default_rng(seed)
    union = np.zeros_like(work)
    for iteration in range(n_true + 1):
        handle = family.build(work)
        best = scan_candidates(family, handle, geometry.n_pixels, threads)
        result.n_iterations = iteration + 1
        result.curves.append(curve_rows(best, p, ln_a))
        picked = pick_most_significant(best, p, ln_a)
        if picked is None:
            break
        nu, kappa, s_val, cells = picked
        mask = family.pattern_pixels(cells)
        cand_union = union | mask
        s_union = set_significance(cand_union, original, p, len(result.detections) + 1, ln_a)
        if not s_union > result.set_significance:
            break
        result.detections.append(
            Detection(
                family=family.name,
                cells=cells,
                params=family.cells_to_params(cells),
                kappa=kappa,
                nu=nu,
                s=s_val,
                iteration=iteration,
            )
        )
        result.set_significance = s_union
        result.set_significance_history.append(s_union)
        union = cand_union
        remove_pattern(work, mask, p, rng)
    result.residual = work
    return result

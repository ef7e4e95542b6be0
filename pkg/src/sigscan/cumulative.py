"""Discretized cumulative (vote) spaces with integral partial sums.

A space is a dense grid over pattern-parameter axes. Axes come in two
kinds: *mono* axes carry one pattern parameter, *bip* axes carry two (the
lower and upper bound of an interval). Mono axes always precede bip axes,
and at most the last two axes are bip. After voting, the grid is
integrated in place along its bip axes (inclusive prefix sums); the sum of
votes over any axis-aligned box is then recovered from 2 (one bip axis) or
4 (two bip axes) cell reads.

Indexing in the query API is 1-based; index 0 is the virtual zero below
the first cell. Internally the integrated grid is stored with an explicit
zero row/column at index 0 of each bip axis, so queries are plain lookups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AxisSpec:
    """One axis of a cumulative space.

    ``offset`` maps signed physical cell coordinates to 1-based indices
    (index = physical + offset); ``step`` is the physical unit per cell.
    ``circular`` marks angular axes whose intervals may wrap.
    """

    kind: str  # "mono" or "bip"
    size: int
    offset: int = 0
    step: float = 1.0
    circular: bool = False

    def __post_init__(self):
        if self.kind not in ("mono", "bip"):
            raise ValueError(f"axis kind must be 'mono' or 'bip', got {self.kind!r}")
        if self.size < 1:
            raise ValueError(f"axis size must be >= 1, got {self.size}")
        if not self.step > 0:
            raise ValueError(f"axis step must be > 0, got {self.step}")


class CumulativeSpace:
    """Dense vote grid over parameter axes, integrable along bip axes."""

    def __init__(self, axes, cells=None):
        axes = tuple(axes)
        kinds = [a.kind for a in axes]
        n_bip = kinds.count("bip")
        if n_bip > 2:
            raise ValueError(f"at most 2 bip axes supported, got {n_bip}")
        if "bip" in kinds and "mono" in kinds[kinds.index("bip"):]:
            raise ValueError("mono axes must precede bip axes")
        shape = tuple(a.size for a in axes)
        if cells is None:
            cells = np.zeros(shape, dtype=np.int64)
        else:
            cells = np.ascontiguousarray(cells, dtype=np.int64)
            if cells.shape != shape:
                raise ValueError(f"cells shape {cells.shape} != axes shape {shape}")
        self.axes = axes
        self.cells = cells
        self.integrated = False
        self.reads = 0  # cell reads performed by queries

    @property
    def n_bip(self) -> int:
        return sum(1 for a in self.axes if a.kind == "bip")

    @property
    def n_mono(self) -> int:
        return len(self.axes) - self.n_bip

    def _require_votes(self):
        if self.integrated:
            raise ValueError("space is already integrated")
        if (self.cells < 0).any():
            raise ValueError("vote grid holds negative counts")

    def integrate_one(self) -> "CumulativeSpace":
        """Inclusive prefix sums along the single (last) bip axis."""
        if self.n_bip != 1:
            raise ValueError(f"integrate_one needs exactly 1 bip axis, space has {self.n_bip}")
        self._require_votes()
        padded = np.zeros(self.cells.shape[:-1] + (self.cells.shape[-1] + 1,), dtype=np.int64)
        np.cumsum(self.cells, axis=-1, out=padded[..., 1:])
        self._psum = padded
        self.cells = padded[..., 1:]
        self.integrated = True
        return self

    def integrate_two(self) -> "CumulativeSpace":
        """Inclusive 2-D prefix sums along the last two (bip) axes."""
        if self.n_bip != 2:
            raise ValueError(f"integrate_two needs exactly 2 bip axes, space has {self.n_bip}")
        self._require_votes()
        s1, s2 = self.cells.shape[-2], self.cells.shape[-1]
        padded = np.zeros(self.cells.shape[:-2] + (s1 + 1, s2 + 1), dtype=np.int64)
        np.cumsum(self.cells, axis=-1, out=padded[..., 1:, 1:])
        np.cumsum(padded[..., 1:, 1:], axis=-2, out=padded[..., 1:, 1:])
        self._psum = padded
        self.cells = padded[..., 1:, 1:]
        self.integrated = True
        return self

    def _mono_key(self, mono_index):
        mono_index = tuple(mono_index)
        if len(mono_index) != self.n_mono:
            raise IndexError(f"expected {self.n_mono} mono indices, got {len(mono_index)}")
        for i, (m, axis) in enumerate(zip(mono_index, self.axes)):
            if not 1 <= m <= axis.size:
                raise IndexError(f"mono index {m} out of range [1, {axis.size}] on axis {i}")
        return tuple(m - 1 for m in mono_index)

    def _check_interval(self, axis_pos, lo, hi):
        size = self.axes[axis_pos].size
        if not (1 <= lo <= hi <= size):
            raise IndexError(f"need 1 <= lo <= hi <= {size}, got [{lo}, {hi}]")

    def query_interval(self, mono_index, lo: int, hi: int) -> int:
        """Sum of votes over bip-axis cells [lo, hi] at the given mono index."""
        if not self.integrated or self.n_bip != 1:
            raise ValueError("query_interval needs an integrated space with 1 bip axis")
        key = self._mono_key(mono_index)
        self._check_interval(-1, lo, hi)
        row = self._psum[key]
        self.reads += 2
        return int(row[hi] - row[lo - 1])

    def query_rect(self, mono_index, lo1: int, hi1: int, lo2: int, hi2: int) -> int:
        """Sum of votes over the box [lo1, hi1] x [lo2, hi2] of the two bip axes."""
        if not self.integrated or self.n_bip != 2:
            raise ValueError("query_rect needs an integrated space with 2 bip axes")
        key = self._mono_key(mono_index)
        self._check_interval(-2, lo1, hi1)
        self._check_interval(-1, lo2, hi2)
        g = self._psum[key]
        self.reads += 4
        return int(g[hi1, hi2] + g[lo1 - 1, lo2 - 1] - g[lo1 - 1, hi2] - g[hi1, lo2 - 1])

    def query_wrapped_interval(self, mono_index, lo: int, hi: int) -> int:
        """Interval sum on a circular bip axis; lo > hi wraps past the seam."""
        if not self.axes[-1].circular:
            raise ValueError("query_wrapped_interval needs a circular last axis")
        if lo <= hi:
            return self.query_interval(mono_index, lo, hi)
        size = self.axes[-1].size
        return self.query_interval(mono_index, lo, size) + self.query_interval(mono_index, 1, hi)

    def query_wrapped_rect(self, mono_index, lo1: int, hi1: int, lo2: int, hi2: int) -> int:
        """Box sum with wrap-around on the circular last axis (lo2 > hi2 wraps)."""
        if not self.axes[-1].circular:
            raise ValueError("query_wrapped_rect needs a circular last axis")
        if lo2 <= hi2:
            return self.query_rect(mono_index, lo1, hi1, lo2, hi2)
        size = self.axes[-1].size
        return self.query_rect(mono_index, lo1, hi1, lo2, size) + self.query_rect(
            mono_index, lo1, hi1, 1, hi2
        )

    def to_csv(self, path) -> None:
        """Debug dump: one header line of axis sizes, then flat cell values."""
        with open(path, "w") as fh:
            fh.write(",".join(str(a.size) for a in self.axes) + "\n")
            fh.write("\n".join(str(int(v)) for v in self.cells.ravel()) + "\n")

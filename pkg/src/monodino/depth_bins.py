"""Linearly increasing depth discretization and foreground depth targets.

The range [d_min, d_max] is split into k bins whose widths grow as an
arithmetic sequence delta, 2*delta, ..., k*delta with
delta = 2*(d_max - d_min) / (k*(k + 1)), so distant objects land in wider
bins. Class k is the overflow/background class: depths at or beyond d_max
and pixels outside every object box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, OverflowClassError, ValidationError


@dataclass(frozen=True)
class DepthBinSpec:
    d_min: float
    d_max: float
    k: int

    def __post_init__(self):
        if not (self.d_max > self.d_min >= 0):
            raise ValidationError(f"need d_max > d_min >= 0, got [{self.d_min}, {self.d_max}]")
        if self.k < 1:
            raise ValidationError(f"need at least one bin, got k={self.k}")

    @property
    def num_classes(self) -> int:
        """Foreground bins plus the overflow/background class."""
        return self.k + 1

    @property
    def delta(self) -> float:
        return 2.0 * (self.d_max - self.d_min) / (self.k * (self.k + 1))

    def edges(self) -> np.ndarray:
        """k+1 cumulative bin edges from d_min to d_max."""
        i = np.arange(self.k + 1, dtype=np.float64)
        return self.d_min + self.delta * i * (i + 1) / 2.0


def lid_bin_index(d: float, spec: DepthBinSpec) -> int:
    """Class index in [0, k] for a depth; k is the overflow class."""
    if d < 0:
        raise DomainError(f"depth must be nonnegative, got {d}")
    if d >= spec.d_max:
        return spec.k
    if d < spec.d_min:
        return 0
    t = (d - spec.d_min) / spec.delta
    idx = int(math.floor(-0.5 + 0.5 * math.sqrt(1.0 + 8.0 * t)))
    idx = max(0, min(idx, spec.k - 1))
    # Guard the closed form against sqrt rounding right at a bin edge.
    edges = spec.edges()
    while idx > 0 and d < edges[idx]:
        idx -= 1
    while idx < spec.k - 1 and d >= edges[idx + 1]:
        idx += 1
    return idx


def lid_bin_center(i: int, spec: DepthBinSpec) -> float:
    """Midpoint depth of foreground bin i."""
    if i == spec.k:
        raise OverflowClassError("the overflow class has no finite center")
    if not 0 <= i < spec.k:
        raise DomainError(f"bin index {i} outside [0, {spec.k}]")
    edges = spec.edges()
    return float(0.5 * (edges[i] + edges[i + 1]))


def bin_centers(spec: DepthBinSpec) -> np.ndarray:
    """Centers of all k foreground bins."""
    edges = spec.edges()
    return 0.5 * (edges[:-1] + edges[1:])


def foreground_depth_target(
    boxes2d: Sequence[tuple[float, float, float, float]],
    depths: Sequence[float],
    map_shape: tuple[int, int],
    image_size: tuple[int, int],
    spec: DepthBinSpec,
) -> np.ndarray:
    """Per-pixel depth-class grid supervising the depth map.

    Pixels whose centers fall inside an object's 2D box (scaled from image to
    map resolution) take that object's center-depth class; elsewhere the
    overflow class k. Where boxes overlap, the nearer object wins.
    """
    hd, wd = map_shape
    h_img, w_img = image_size
    target = np.full((hd, wd), spec.k, dtype=np.int64)
    if len(boxes2d) != len(depths):
        raise ValidationError("boxes2d and depths must have equal length")
    su, sv = wd / w_img, hd / h_img
    order = np.argsort(-np.asarray(depths, dtype=np.float64))  # far to near
    cols = (np.arange(wd) + 0.5) / su
    rows = (np.arange(hd) + 0.5) / sv
    for idx in order:
        u_min, v_min, u_max, v_max = boxes2d[idx]
        cls = lid_bin_index(float(depths[idx]), spec)
        c_sel = (cols >= u_min) & (cols < u_max)
        r_sel = (rows >= v_min) & (rows < v_max)
        target[np.ix_(r_sel, c_sel)] = cls
    return target

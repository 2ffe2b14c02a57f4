"""Independent oracles used by the test suite.

Everything here recomputes expected values by a different route than the
library code: rasterization instead of polygon clipping, exhaustive search
instead of the Hungarian algorithm, edge enumeration instead of closed-form
bin indexing, and central differences instead of backprop.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from monodino.geometry import Box3D, box3d_corners


# ---------------------------------------------------------------------------
# Rotated-rectangle IoU by rasterization.


def _footprint(box: Box3D) -> np.ndarray:
    return box3d_corners(box)[:4][:, [0, 2]]


def _half_planes(poly: np.ndarray) -> np.ndarray:
    """Rows (nx, nz, c) with n.p + c >= 0 inside, for a convex polygon."""
    # Ensure counter-clockwise orientation first.
    x, z = poly[:, 0], poly[:, 1]
    if 0.5 * (np.dot(x, np.roll(z, -1)) - np.dot(z, np.roll(x, -1))) < 0:
        poly = poly[::-1]
    rows = []
    n = len(poly)
    for i in range(n):
        ax, az = poly[i]
        bx, bz = poly[(i + 1) % n]
        # Inward normal of edge a->b for a CCW polygon.
        nx, nz = -(bz - az), bx - ax
        rows.append((nx, nz, -(nx * ax + nz * az)))
    return np.asarray(rows)


def _inside(points: np.ndarray, planes: np.ndarray) -> np.ndarray:
    vals = points @ planes[:, :2].T + planes[:, 2]
    return (vals >= 0.0).all(axis=1)


def raster_intersection_area(a: Box3D, b: Box3D, step: float = 1e-3) -> float:
    """Footprint intersection area by two-level rasterization.

    Coarse cells are classified exactly (full / empty / boundary) with
    half-plane corner tests; only boundary cells are sampled at the fine
    step, so the effective resolution is `step` at bounded cost.
    """
    pa, pb = _footprint(a), _footprint(b)
    lo = np.maximum(pa.min(axis=0), pb.min(axis=0))
    hi = np.minimum(pa.max(axis=0), pb.max(axis=0))
    if (hi <= lo).any():
        return 0.0
    planes = np.vstack([_half_planes(pa), _half_planes(pb)])

    sub = 32  # fine samples per coarse cell edge
    coarse = step * sub
    nx = int(math.ceil((hi[0] - lo[0]) / coarse))
    nz = int(math.ceil((hi[1] - lo[1]) / coarse))
    xs = lo[0] + np.arange(nx + 1) * coarse
    zs = lo[1] + np.arange(nz + 1) * coarse
    gx, gz = np.meshgrid(xs, zs, indexing="ij")
    corner_vals = (
        np.stack([gx, gz], axis=-1).reshape(-1, 2) @ planes[:, :2].T + planes[:, 2]
    ).reshape(nx + 1, nz + 1, -1)
    corner_in = corner_vals >= 0.0

    # A cell is fully inside the intersection when all four corners satisfy
    # every half-plane; it is empty when, for some half-plane, all four
    # corners are strictly outside (the cell then lies beyond that plane).
    c00 = corner_in[:-1, :-1]
    c01 = corner_in[:-1, 1:]
    c10 = corner_in[1:, :-1]
    c11 = corner_in[1:, 1:]
    all_in = (c00 & c01 & c10 & c11).all(axis=-1)
    none_in = (~c00 & ~c01 & ~c10 & ~c11).any(axis=-1)
    boundary = ~all_in & ~none_in

    area = float(all_in.sum()) * coarse * coarse
    if boundary.any():
        bi, bj = np.nonzero(boundary)
        offs = (np.arange(sub) + 0.5) * step
        ox, oz = np.meshgrid(offs, offs, indexing="ij")
        cell_pts = np.stack([ox.ravel(), oz.ravel()], axis=-1)  # (sub*sub, 2)
        origins = np.stack([xs[bi], zs[bj]], axis=-1)  # (n_cells, 2)
        pts = (origins[:, None, :] + cell_pts[None, :, :]).reshape(-1, 2)
        area += float(_inside(pts, planes).sum()) * step * step
    return area


def raster_iou_bev(a: Box3D, b: Box3D, step: float = 1e-3) -> float:
    inter = raster_intersection_area(a, b, step)
    union = a.w * a.l + b.w * b.l - inter
    return inter / union if union > 0 else 0.0


def grid_iou_bev(a: Box3D, b: Box3D, step: float = 1e-3) -> float:
    """Single-level pixel-center rasterization over the union's bounding box."""
    pa, pb = _footprint(a), _footprint(b)
    lo = np.minimum(pa.min(axis=0), pb.min(axis=0)) - step
    hi = np.maximum(pa.max(axis=0), pb.max(axis=0)) + step
    xs = np.arange(lo[0] + step / 2, hi[0], step)
    zs = np.arange(lo[1] + step / 2, hi[1], step)
    gx, gz = np.meshgrid(xs, zs, indexing="ij")
    pts = np.stack([gx.ravel(), gz.ravel()], axis=-1)
    in_a = _inside(pts, _half_planes(pa))
    in_b = _inside(pts, _half_planes(pb))
    inter = float((in_a & in_b).sum())
    union = float((in_a | in_b).sum())
    return inter / union if union > 0 else 0.0


# ---------------------------------------------------------------------------
# Assignment by exhaustive search.


def brute_force_assignment_cost(cost: np.ndarray) -> float:
    """Minimum total cost over all injective column assignments."""
    n, m = cost.shape
    assert n >= m, "needs at least as many rows as columns"
    best = math.inf
    for rows in itertools.permutations(range(n), m):
        total = sum(cost[r, c] for c, r in enumerate(rows))
        best = min(best, total)
    return best


# ---------------------------------------------------------------------------
# Depth-bin edges by enumeration.


def lid_edges(d_min: float, d_max: float, k: int) -> np.ndarray:
    """Cumulative bin edges delta, delta+2*delta, ... built by summation."""
    delta = 2.0 * (d_max - d_min) / (k * (k + 1))
    edges = [d_min]
    for i in range(1, k + 1):
        edges.append(edges[-1] + i * delta)
    return np.asarray(edges)


def lid_index_by_search(d: float, d_min: float, d_max: float, k: int) -> int:
    """Locate d among enumerated edges (the oracle for the closed form)."""
    if d >= d_max:
        return k
    edges = lid_edges(d_min, d_max, k)
    idx = int(np.searchsorted(edges, d, side="right")) - 1
    return max(0, min(idx, k - 1))


# ---------------------------------------------------------------------------
# Finite differences.


def central_difference_grad(f, param, index, step=1e-4):
    """d f / d param[index] by central differences; param is a torch tensor."""
    with_no_grad = param.detach()
    orig = with_no_grad[index].item()
    with_no_grad[index] = orig + step
    f_plus = float(f())
    with_no_grad[index] = orig - step
    f_minus = float(f())
    with_no_grad[index] = orig
    return (f_plus - f_minus) / (2.0 * step)


def rel_err(a: float, b: float, floor: float = 1e-8) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)

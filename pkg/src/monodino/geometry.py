"""Camera projection and 3D box geometry.

Coordinate conventions (KITTI camera frame):
  - x right, y down, z forward; units are meters.
  - A 3D box is anchored at the center of its bottom face, dimensions are
    ordered (h, w, l), and rotation_y is the yaw about the (downward) y-axis,
    wrapped to [-pi, pi].
  - Image coordinates (u, v) are pixels, v growing downward; the projection
    matrix P is 3x4 and depth is the homogeneous scale of P @ [x, y, z, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BehindCamera, ValidationError

_TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle into [-pi, pi]; ties at +/-pi resolve to -pi."""
    wrapped = math.fmod(theta + math.pi, _TWO_PI)
    if wrapped < 0.0:
        wrapped += _TWO_PI
    return wrapped - math.pi


@dataclass(frozen=True)
class CameraCalib:
    """Pinhole camera: 3x4 projection matrix plus image size (H, W)."""

    P: np.ndarray
    image_size: tuple[int, int]

    def __post_init__(self):
        P = np.asarray(self.P, dtype=np.float64)
        if P.shape != (3, 4):
            raise ValidationError(f"projection matrix must be 3x4, got {P.shape}")
        if P[0, 0] <= 0 or P[1, 1] <= 0:
            raise ValidationError("focal lengths P[0,0] and P[1,1] must be positive")
        h, w = self.image_size
        if h <= 0 or w <= 0:
            raise ValidationError(f"image_size must be positive, got {self.image_size}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "image_size", (int(h), int(w)))

    @property
    def fu(self) -> float:
        return float(self.P[0, 0])

    @property
    def fv(self) -> float:
        return float(self.P[1, 1])

    @property
    def cu(self) -> float:
        return float(self.P[0, 2])

    @property
    def cv(self) -> float:
        return float(self.P[1, 2])


@dataclass(frozen=True)
class Box2D:
    """Axis-aligned pixel box (u_min, v_min, u_max, v_max)."""

    u_min: float
    v_min: float
    u_max: float
    v_max: float

    def __post_init__(self):
        if self.u_min > self.u_max or self.v_min > self.v_max:
            raise ValidationError(f"degenerate 2D box: {self}")

    @property
    def width(self) -> float:
        return self.u_max - self.u_min

    @property
    def height(self) -> float:
        return self.v_max - self.v_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_array(self) -> np.ndarray:
        return np.array([self.u_min, self.v_min, self.u_max, self.v_max], dtype=np.float64)


@dataclass(frozen=True)
class Box3D:
    """Yaw-rotated cuboid: bottom-face center, (h, w, l) dims, rotation_y."""

    location: tuple[float, float, float]
    dimensions: tuple[float, float, float]
    rotation_y: float = field(default=0.0)

    def __post_init__(self):
        h, w, l = self.dimensions
        if not (h > 0 and w > 0 and l > 0):
            raise ValidationError(f"box dimensions must be strictly positive, got {self.dimensions}")
        object.__setattr__(self, "location", tuple(float(c) for c in self.location))
        object.__setattr__(self, "dimensions", (float(h), float(w), float(l)))
        object.__setattr__(self, "rotation_y", wrap_angle(float(self.rotation_y)))

    @property
    def h(self) -> float:
        return self.dimensions[0]

    @property
    def w(self) -> float:
        return self.dimensions[1]

    @property
    def l(self) -> float:
        return self.dimensions[2]

    def center(self) -> np.ndarray:
        """Geometric center of the cuboid (half a height above the anchor)."""
        x, y, z = self.location
        return np.array([x, y - 0.5 * self.h, z], dtype=np.float64)


def project_point(calib: CameraCalib, p) -> tuple[float, float, float]:
    """Project a camera-frame point to pixels; returns (u, v, depth).

    Depth is the homogeneous scale; points with depth <= 1e-6 raise BehindCamera.
    """
    p = np.asarray(p, dtype=np.float64)
    uvw = calib.P @ np.append(p, 1.0)
    depth = uvw[2]
    if depth <= 1e-6:
        raise BehindCamera(f"point {tuple(p)} projects at nonpositive depth {depth:.3g}")
    return float(uvw[0] / depth), float(uvw[1] / depth), float(depth)


def backproject_point(calib: CameraCalib, u: float, v: float, depth: float) -> np.ndarray:
    """Invert project_point given the known depth (homogeneous scale)."""
    if depth <= 1e-6:
        raise BehindCamera(f"cannot back-project at nonpositive depth {depth:.3g}")
    A = calib.P[:, :3]
    b = depth * np.array([u, v, 1.0]) - calib.P[:, 3]
    return np.linalg.solve(A, b)


def box3d_corners(box: Box3D) -> np.ndarray:
    """8x3 array of corner points; bottom face first, then top face."""
    h, w, l = box.dimensions
    # Object frame: length along x, width along z, y up out of the bottom face.
    xs = np.array([l, l, -l, -l, l, l, -l, -l]) / 2.0
    zs = np.array([w, -w, -w, w, w, -w, -w, w]) / 2.0
    ys = np.array([0.0, 0.0, 0.0, 0.0, -h, -h, -h, -h])
    c, s = math.cos(box.rotation_y), math.sin(box.rotation_y)
    x, y, z = box.location
    corners = np.empty((8, 3), dtype=np.float64)
    corners[:, 0] = c * xs + s * zs + x
    corners[:, 1] = ys + y
    corners[:, 2] = -s * xs + c * zs + z
    return corners


def bev_footprint(box: Box3D) -> np.ndarray:
    """4x2 footprint polygon (x, z) of the box in the x-z plane."""
    corners = box3d_corners(box)
    return corners[:4][:, [0, 2]]


def _polygon_area(poly: np.ndarray) -> float:
    """Shoelace area; sign depends on winding, magnitude returned."""
    x, z = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(z, -1)) - np.dot(z, np.roll(x, -1))))


def _clip_polygon(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex subject polygon by a convex clip polygon."""
    # Orient the clip polygon counter-clockwise so its interior is left of each edge.
    cx, cz = clip[:, 0], clip[:, 1]
    signed = 0.5 * (np.dot(cx, np.roll(cz, -1)) - np.dot(cz, np.roll(cx, -1)))
    if signed < 0:
        clip = clip[::-1]
    output = [tuple(p) for p in subject]
    n = len(clip)
    for i in range(n):
        ax, az = clip[i]
        bx, bz = clip[(i + 1) % n]
        ex, ez = bx - ax, bz - az
        input_pts = output
        output = []
        if not input_pts:
            break
        dist = [ex * (pz - az) - ez * (px - ax) for px, pz in input_pts]
        m = len(input_pts)
        for j in range(m):
            px, pz = input_pts[j]
            qx, qz = input_pts[(j + 1) % m]
            dp, dq = dist[j], dist[(j + 1) % m]
            if dp >= 0.0:
                output.append((px, pz))
            if (dp > 0.0 > dq) or (dq > 0.0 > dp):
                t = dp / (dp - dq)
                output.append((px + t * (qx - px), pz + t * (qz - pz)))
    return np.array(output, dtype=np.float64) if output else np.empty((0, 2))


def intersection_area_bev(a: Box3D, b: Box3D) -> float:
    """Area of the overlap of the two yaw-rotated footprints in the x-z plane."""
    poly = _clip_polygon(bev_footprint(a), bev_footprint(b))
    if len(poly) < 3:
        return 0.0
    return _polygon_area(poly)


def iou_bev(a: Box3D, b: Box3D) -> float:
    """Bird's-eye-view IoU of the yaw-rotated footprint rectangles."""
    inter = intersection_area_bev(a, b)
    union = a.w * a.l + b.w * b.l - inter
    if union <= 0.0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def iou_3d(a: Box3D, b: Box3D) -> float:
    """3D IoU: BEV intersection times vertical overlap over the volume union."""
    inter_bev = intersection_area_bev(a, b)
    if inter_bev <= 0.0:
        return 0.0
    # y points down: a box spans [y - h, y].
    y_overlap = min(a.location[1], b.location[1]) - max(a.location[1] - a.h, b.location[1] - b.h)
    if y_overlap <= 0.0:
        return 0.0
    inter = inter_bev * y_overlap
    union = a.h * a.w * a.l + b.h * b.w * b.l - inter
    if union <= 0.0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def iou_2d(a: Box2D, b: Box2D) -> float:
    """Axis-aligned IoU of two pixel boxes."""
    iw = min(a.u_max, b.u_max) - max(a.u_min, b.u_min)
    ih = min(a.v_max, b.v_max) - max(a.v_min, b.v_min)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def alpha_from_ry(rotation_y: float, location) -> float:
    """Observation angle: yaw expressed relative to the viewing ray."""
    x, _, z = location
    if z <= 0:
        raise BehindCamera(f"observation angle undefined at z={z}")
    return wrap_angle(rotation_y - math.atan2(x, z))


def ry_from_alpha(alpha: float, location) -> float:
    """Inverse of alpha_from_ry."""
    x, _, z = location
    if z <= 0:
        raise BehindCamera(f"yaw recovery undefined at z={z}")
    return wrap_angle(alpha + math.atan2(x, z))


def project_box3d(calib: CameraCalib, box: Box3D, clip: bool = True) -> Box2D:
    """Tight 2D bound of the projected corners, optionally clipped to the image."""
    corners = box3d_corners(box)
    uvs = []
    for corner in corners:
        u, v, _ = project_point(calib, corner)
        uvs.append((u, v))
    uvs = np.asarray(uvs)
    u_min, v_min = uvs.min(axis=0)
    u_max, v_max = uvs.max(axis=0)
    if clip:
        h, w = calib.image_size
        u_min, u_max = max(u_min, 0.0), min(u_max, float(w))
        v_min, v_max = max(v_min, 0.0), min(v_max, float(h))
        if u_min > u_max or v_min > v_max:
            raise BehindCamera("box projects entirely outside the image")
    return Box2D(float(u_min), float(v_min), float(u_max), float(v_max))

"""Deterministic synthetic scenes: cuboid cars on flat or banked ground.

Each sample is a gradient-background image with flat-shaded car cuboids,
KITTI-format labels whose 2D boxes tightly bound the projected 3D corners,
and a pinhole calibration. Everything is a pure function of (config, index),
so samples can be regenerated or produced in parallel at will.

The default camera is deliberately anamorphic (long vertical focal, short
horizontal): cars a few meters out stay taller than the KITTI difficulty
cutoffs while leaving lateral room to place several of them in a 64 px
frame.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import PlacementError, ValidationError
from .geometry import (
    Box3D,
    CameraCalib,
    alpha_from_ry,
    box3d_corners,
    iou_bev,
    project_box3d,
    project_point,
)
from .kitti_io import ObjectLabel3D, format_calib_file, quantize_label, write_label_file

_LIGHT_DIR = np.array([0.35, -0.8, 0.49])
_LIGHT_DIR = _LIGHT_DIR / np.linalg.norm(_LIGHT_DIR)

# Quad corner indices into box3d_corners order (bottom 0-3, top 4-7).
_FACES = [
    (0, 1, 5, 4),
    (1, 2, 6, 5),
    (2, 3, 7, 6),
    (3, 0, 4, 7),
    (4, 5, 6, 7),  # top
    (0, 3, 2, 1),  # bottom
]


@dataclass(frozen=True)
class SceneConfig:
    image_size: tuple[int, int] = (64, 64)
    num_cars: int = 2
    depth_range: tuple[float, float] = (5.0, 8.0)
    bank_angle: float = 0.0
    car_height_range: tuple[float, float] = (1.35, 1.75)
    car_width_range: tuple[float, float] = (1.5, 1.8)
    car_length_range: tuple[float, float] = (3.2, 4.2)
    seed: int = 0
    patch_size: int = 8
    focal_u: float = 50.0
    focal_v: float = 160.0
    principal_v_ratio: float = 0.3
    camera_height: float = 1.2
    max_placement_attempts: int = 200

    def __post_init__(self):
        h, w = self.image_size
        near, far = self.depth_range
        if near <= 0 or far <= near:
            raise ValidationError(f"need 0 < near < far, got {self.depth_range}")
        if h % self.patch_size or w % self.patch_size:
            raise ValidationError(
                f"image size {self.image_size} not divisible by patch size {self.patch_size}"
            )
        if self.num_cars < 0:
            raise ValidationError("num_cars must be nonnegative")

    def calib(self) -> CameraCalib:
        h, w = self.image_size
        P = np.array(
            [
                [self.focal_u, 0.0, w / 2.0, 0.0],
                [0.0, self.focal_v, self.principal_v_ratio * h, 0.0],
                [0.0, 0.0, 1.0, 0.0],
            ]
        )
        return CameraCalib(P=P, image_size=(h, w))


def _sample_rng(cfg: SceneConfig, index: int) -> np.random.Generator:
    # Stable per-sample stream: (seed, index) keys the sequence, so split
    # membership and generation order never matter.
    return np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(index,)))


def ground_height(cfg: SceneConfig, x: float) -> float:
    """Camera-frame y of the ground under lateral offset x (y points down)."""
    return cfg.camera_height + x * math.tan(cfg.bank_angle)


def _place_cars(cfg: SceneConfig, rng: np.random.Generator) -> list[Box3D]:
    near, far = cfg.depth_range
    half_w = cfg.image_size[1] / 2.0
    boxes: list[Box3D] = []
    for _ in range(cfg.num_cars):
        for _attempt in range(cfg.max_placement_attempts):
            z = rng.uniform(near, far)
            x_max = 0.8 * z * half_w / cfg.focal_u
            x = rng.uniform(-x_max, x_max)
            dims = (
                rng.uniform(*cfg.car_height_range),
                rng.uniform(*cfg.car_width_range),
                rng.uniform(*cfg.car_length_range),
            )
            box = Box3D(
                location=(x, ground_height(cfg, x), z),
                dimensions=dims,
                rotation_y=rng.uniform(-math.pi, math.pi),
            )
            if all(iou_bev(box, other) == 0.0 for other in boxes):
                boxes.append(box)
                break
        else:
            raise PlacementError(
                f"could not place car {len(boxes) + 1}/{cfg.num_cars} "
                f"after {cfg.max_placement_attempts} attempts"
            )
    return boxes


def _fill_convex_quad(image: np.ndarray, quad: np.ndarray, color: np.ndarray) -> None:
    """Paint pixels whose centers fall inside a convex 2D quad, in place."""
    h, w = image.shape[:2]
    u0 = max(int(math.floor(quad[:, 0].min())), 0)
    u1 = min(int(math.ceil(quad[:, 0].max())) + 1, w)
    v0 = max(int(math.floor(quad[:, 1].min())), 0)
    v1 = min(int(math.ceil(quad[:, 1].max())) + 1, h)
    if u0 >= u1 or v0 >= v1:
        return
    # Orient counter-clockwise so every inward cross product is nonnegative.
    x, y = quad[:, 0], quad[:, 1]
    if 0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) < 0:
        quad = quad[::-1]
    us = np.arange(u0, u1) + 0.5
    vs = np.arange(v0, v1) + 0.5
    gu, gv = np.meshgrid(us, vs, indexing="xy")
    inside = np.ones(gu.shape, dtype=bool)
    n = len(quad)
    for i in range(n):
        ax, ay = quad[i]
        bx, by = quad[(i + 1) % n]
        inside &= (bx - ax) * (gv - ay) - (by - ay) * (gu - ax) >= 0
    region = image[v0:v1, u0:u1]
    region[inside] = color


def _render_scene(
    cfg: SceneConfig, calib: CameraCalib, boxes: list[Box3D], rng: np.random.Generator
) -> np.ndarray:
    h, w = cfg.image_size
    # Gradient background with a per-sample tint so scenes are tellable apart.
    tint = rng.uniform(0.0, 0.25, size=3)
    top = np.clip(np.array([0.55, 0.65, 0.8]) + tint * 0.3, 0, 1)
    bottom = np.clip(np.array([0.25, 0.25, 0.22]) + tint, 0, 1)
    ramp = np.linspace(0.0, 1.0, h)[:, None, None]
    image = (1 - ramp) * top[None, None, :] + ramp * bottom[None, None, :]

    colors = rng.uniform(0.15, 0.95, size=(len(boxes), 3))
    order = np.argsort([-b.location[2] for b in boxes])  # far first
    for bi in order:
        box = boxes[bi]
        corners = box3d_corners(box)
        projected = np.array([project_point(calib, c)[:2] for c in corners])
        depths = np.array([project_point(calib, c)[2] for c in corners])
        face_order = sorted(
            range(len(_FACES)),
            key=lambda f: -float(np.mean([depths[i] for i in _FACES[f]])),
        )
        for f in face_order:
            ids = list(_FACES[f])
            pts3d = corners[ids]
            center = pts3d.mean(axis=0)
            normal = np.cross(pts3d[1] - pts3d[0], pts3d[3] - pts3d[0])
            nrm = np.linalg.norm(normal)
            if nrm < 1e-12:
                continue
            normal = normal / nrm
            if np.dot(normal, center) > 0:
                normal = -normal
            if np.dot(normal, center) >= 0:  # not facing the camera
                continue
            shade = 0.45 + 0.55 * max(0.0, float(np.dot(normal, -_LIGHT_DIR)))
            _fill_convex_quad(image, projected[ids], np.clip(colors[bi] * shade, 0, 1))
    return image


def _occlusion_level(own, nearer) -> int:
    """0/1/2 from the fraction of the own 2D box covered by nearer boxes."""
    if own.area <= 0 or not nearer:
        return 0
    # Pixel-resolution coverage mask; exact enough for bucketing.
    u0, v0 = int(math.floor(own.u_min)), int(math.floor(own.v_min))
    u1, v1 = int(math.ceil(own.u_max)), int(math.ceil(own.v_max))
    if u1 <= u0 or v1 <= v0:
        return 0
    mask = np.zeros((v1 - v0, u1 - u0), dtype=bool)
    for other in nearer:
        a0 = max(int(math.floor(other.u_min)) - u0, 0)
        a1 = min(int(math.ceil(other.u_max)) - u0, u1 - u0)
        b0 = max(int(math.floor(other.v_min)) - v0, 0)
        b1 = min(int(math.ceil(other.v_max)) - v0, v1 - v0)
        if a1 > a0 and b1 > b0:
            mask[b0:b1, a0:a1] = True
    frac = mask.mean()
    if frac < 0.15:
        return 0
    if frac < 0.50:
        return 1
    return 2


def generate_sample(cfg: SceneConfig, index: int):
    """Render one scene; returns (image HxWx3 in [0,1], labels, calib)."""
    rng = _sample_rng(cfg, index)
    calib = cfg.calib()
    boxes = _place_cars(cfg, rng)
    image = _render_scene(cfg, calib, boxes, rng)

    clipped = [project_box3d(calib, b, clip=True) for b in boxes]
    full = [project_box3d(calib, b, clip=False) for b in boxes]
    labels = []
    for i, box in enumerate(boxes):
        trunc = 0.0
        if full[i].area > 0:
            trunc = min(max(1.0 - clipped[i].area / full[i].area, 0.0), 1.0)
        nearer = [clipped[j] for j in range(len(boxes)) if boxes[j].location[2] < box.location[2]]
        labels.append(
            ObjectLabel3D(
                class_name="Car",
                truncated=trunc,
                occluded=_occlusion_level(clipped[i], nearer),
                alpha=alpha_from_ry(box.rotation_y, box.location),
                box2d=clipped[i],
                box3d=box,
            )
        )
    return image, labels, calib


def image_to_uint8(image: np.ndarray) -> np.ndarray:
    return np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8)


def generate_split(cfg: SceneConfig, n_train: int, n_val: int, out_dir) -> dict:
    """Write a KITTI-layout directory tree and return the split manifest."""
    out = Path(out_dir)
    for sub in ("image_2", "label_2", "calib"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    ids = [f"{i:06d}" for i in range(n_train + n_val)]
    calib_text = format_calib_file(cfg.calib())
    for i, sample_id in enumerate(ids):
        image, labels, _ = generate_sample(cfg, i)
        Image.fromarray(image_to_uint8(image)).save(out / "image_2" / f"{sample_id}.png")
        quantized = [quantize_label(lab) for lab in labels]
        (out / "label_2" / f"{sample_id}.txt").write_text(write_label_file(quantized))
        (out / "calib" / f"{sample_id}.txt").write_text(calib_text)
    manifest = {
        "train": ids[:n_train],
        "val": ids[n_train:],
        "image_size": list(cfg.image_size),
        "config": asdict(cfg),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest

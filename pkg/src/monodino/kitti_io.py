"""KITTI-format label and calibration file I/O plus difficulty bucketing.

Label lines carry 15 whitespace-separated fields (16 with a trailing score):
type, truncated, occluded, alpha, bbox (4), dimensions h w l, location x y z,
rotation_y[, score]. The 15 standard fields are written with two decimals,
matching the devkit convention; scores keep six decimals so ranking survives
the round trip.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ParseError, ValidationError
from .geometry import Box2D, Box3D, CameraCalib


class Difficulty(enum.IntEnum):
    """KITTI difficulty tier; Ignored objects are excluded from every tier."""

    EASY = 0
    MODERATE = 1
    HARD = 2
    IGNORED = 3


# (min 2D height px, max occlusion level, max truncation) per tier.
_DIFFICULTY_THRESHOLDS = {
    Difficulty.EASY: (40.0, 0, 0.15),
    Difficulty.MODERATE: (25.0, 1, 0.30),
    Difficulty.HARD: (25.0, 2, 0.50),
}


@dataclass(frozen=True)
class ObjectLabel3D:
    """One ground-truth or predicted object in KITTI label conventions."""

    class_name: str
    truncated: float
    occluded: int
    alpha: float
    box2d: Box2D
    box3d: Box3D
    score: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.truncated <= 1.0:
            raise ValidationError(f"truncated must be in [0,1], got {self.truncated}")
        if self.occluded not in (0, 1, 2, 3):
            raise ValidationError(f"occluded must be in {{0,1,2,3}}, got {self.occluded}")

    def with_score(self, score: float) -> "ObjectLabel3D":
        return replace(self, score=float(score))


def difficulty_of(label: ObjectLabel3D) -> Difficulty:
    height = label.box2d.height
    for tier in (Difficulty.EASY, Difficulty.MODERATE, Difficulty.HARD):
        min_h, max_occ, max_trunc = _DIFFICULTY_THRESHOLDS[tier]
        if height >= min_h and label.occluded <= max_occ and label.truncated <= max_trunc:
            return tier
    return Difficulty.IGNORED


def _parse_float(token: str, line_no: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"non-numeric {what} token {token!r}", line=line_no) from None


def parse_label_line(line: str, line_no: int = 1) -> ObjectLabel3D:
    fields = line.split()
    if len(fields) not in (15, 16):
        raise ParseError(f"expected 15 or 16 fields, got {len(fields)}", line=line_no)
    nums = [_parse_float(tok, line_no, "label") for tok in fields[1:]]
    try:
        return ObjectLabel3D(
            class_name=fields[0],
            truncated=nums[0],
            occluded=int(nums[1]),
            alpha=nums[2],
            box2d=Box2D(nums[3], nums[4], nums[5], nums[6]),
            box3d=Box3D(
                location=(nums[10], nums[11], nums[12]),
                dimensions=(nums[7], nums[8], nums[9]),
                rotation_y=nums[13],
            ),
            score=nums[14] if len(nums) == 15 else None,
        )
    except ValidationError as exc:
        raise ParseError(str(exc), line=line_no) from exc


def parse_label_file(text: str) -> list[ObjectLabel3D]:
    labels = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        labels.append(parse_label_line(line, line_no))
    return labels


def format_label_line(label: ObjectLabel3D) -> str:
    b2, b3 = label.box2d, label.box3d
    fields = [
        label.class_name,
        f"{label.truncated:.2f}",
        str(int(label.occluded)),
        f"{label.alpha:.2f}",
        f"{b2.u_min:.2f}",
        f"{b2.v_min:.2f}",
        f"{b2.u_max:.2f}",
        f"{b2.v_max:.2f}",
        f"{b3.h:.2f}",
        f"{b3.w:.2f}",
        f"{b3.l:.2f}",
        f"{b3.location[0]:.2f}",
        f"{b3.location[1]:.2f}",
        f"{b3.location[2]:.2f}",
        f"{b3.rotation_y:.2f}",
    ]
    if label.score is not None:
        fields.append(f"{label.score:.6f}")
    return " ".join(fields)


def write_label_file(labels: list[ObjectLabel3D]) -> str:
    if not labels:
        return ""
    return "\n".join(format_label_line(label) for label in labels) + "\n"


def quantize_label(label: ObjectLabel3D) -> ObjectLabel3D:
    """Round a label onto the file format's grid so write/parse round-trips."""
    return parse_label_line(format_label_line(label))


def parse_calib_file(text: str, image_size: tuple[int, int] = (370, 1240)) -> CameraCalib:
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.startswith("P2:"):
            continue
        tokens = line.split()[1:]
        if len(tokens) != 12:
            raise ParseError(f"P2 needs 12 values, got {len(tokens)}", line=line_no)
        vals = [_parse_float(tok, line_no, "calib") for tok in tokens]
        return CameraCalib(P=np.array(vals, dtype=np.float64).reshape(3, 4), image_size=image_size)
    raise ParseError("no P2 line found")


def format_calib_file(calib: CameraCalib) -> str:
    values = " ".join(f"{v:.12e}" for v in calib.P.ravel())
    return f"P2: {values}\n"

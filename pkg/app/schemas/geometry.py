"""Geometry Pydantic schemas — model pose and pinhole camera for depth rendering."""

import math

from pydantic import BaseModel, Field, field_validator


class Pose6D(BaseModel):
    """Model pose in camera coordinates: X_cam = R · X_model + t.

    Rotation is three Euler angles in radians, intrinsic X-Y-Z order
    (R = Rx · Ry · Rz). Camera looks down +z, image x right, image y down.
    """

    tx: float = 0.0
    ty: float = 0.0
    tz: float = 5.0
    rx: float = 0.0
    ry: float = 0.0
    rz: float = 0.0

    model_config = {"frozen": True}

    @field_validator("tx", "ty", "tz", "rx", "ry", "rz")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("pose components must be finite")
        return value

    def as_vector(self) -> list:
        return [self.tx, self.ty, self.tz, self.rx, self.ry, self.rz]

    @classmethod
    def from_vector(cls, values) -> "Pose6D":
        tx, ty, tz, rx, ry, rz = (float(v) for v in values)
        return cls(tx=tx, ty=ty, tz=tz, rx=rx, ry=ry, rz=rz)


class CameraIntrinsics(BaseModel):
    """Pinhole camera. Pixel (row i, col j) has its centre at (j + 0.5, i + 0.5)."""

    width: int = Field(1024, ge=1)
    height: int = Field(1024, ge=1)
    fx: float = Field(1024.0, gt=0)
    fy: float = Field(1024.0, gt=0)
    cx: float = 512.0
    cy: float = 512.0

    model_config = {"frozen": True}

    @classmethod
    def centered(cls, width: int, height: int, focal: float) -> "CameraIntrinsics":
        return cls(width=width, height=height, fx=focal, fy=focal, cx=width / 2, cy=height / 2)

"""
Depth rendering by rasterisation.

Per triangle: transform into camera space and clip at z = near. Each piece is
projected, its bounding box is walked inside the current band, pixel centres
are tested with edge functions and the pixel ray is intersected with the
triangle plane. The Z-buffer keeps the minimum Euclidean camera-to-surface
distance. Bands are handed out dynamically; every band owns disjoint rows, so
the order cannot change the image.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from app.errors import GeometryError
from app.schemas.geometry import CameraIntrinsics, Pose6D
from app.services.frame_codec import Frame
from app.services.kernels.partition import DEFAULT_WORKERS, PartitionMode, partition_bands, run_bands

logger = logging.getLogger(__name__)

NO_HIT = 65535
DEPTH_LEVELS = 65534
DEFAULT_NEAR = 0.1
DEFAULT_FAR = 100.0
DEFAULT_BANDS = 32


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(vertices)):
            raise GeometryError("Triangle index out of range")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "triangles", triangles)

    @classmethod
    def empty(cls) -> "TriangleMesh":
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    def validated(self, eps: float = 1e-12) -> "TriangleMesh":
        """Drop zero-area triangles."""
        if not len(self.triangles):
            return self
        v = self.vertices[self.triangles]
        area2 = np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)
        return TriangleMesh(self.vertices, self.triangles[area2 > eps])

    def extended(self, vertices: np.ndarray, triangles: np.ndarray) -> "TriangleMesh":
        base = len(self.vertices)
        return TriangleMesh(
            np.vstack([self.vertices, np.asarray(vertices, dtype=np.float64).reshape(-1, 3)]),
            np.vstack([self.triangles, np.asarray(triangles, dtype=np.int64).reshape(-1, 3) + base]),
        )


def rotation_matrix(rx: float, ry: float, rz: float) -> np.ndarray:
    """Intrinsic X-Y-Z Euler rotation, R = Rx · Ry · Rz."""
    cx, sx = np.cos(rx), np.sin(rx)
    cy, sy = np.cos(ry), np.sin(ry)
    cz, sz = np.cos(rz), np.sin(rz)
    rot_x = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    rot_y = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rot_z = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rot_x @ rot_y @ rot_z


def to_camera(mesh: TriangleMesh, pose: Pose6D) -> np.ndarray:
    rot = rotation_matrix(pose.rx, pose.ry, pose.rz)
    return mesh.vertices @ rot.T + np.array([pose.tx, pose.ty, pose.tz])


def quantize_depth(distance: np.ndarray, near: float = DEFAULT_NEAR, far: float = DEFAULT_FAR) -> np.ndarray:
    """Linear map of [near, far] onto [0, 65534]; inf (no hit) becomes 65535."""
    distance = np.asarray(distance, dtype=np.float64)
    scaled = np.rint((distance - near) / (far - near) * DEPTH_LEVELS)
    q = np.clip(np.nan_to_num(scaled, posinf=DEPTH_LEVELS), 0, DEPTH_LEVELS).astype(np.uint32)
    q[~np.isfinite(distance)] = NO_HIT
    return q


def _rasterize_band(zbuf: np.ndarray, tri_cam: np.ndarray, camera: CameraIntrinsics, r0: int, r1: int) -> None:
    width = camera.width
    for v0, v1, v2 in tri_cam:
        xs = camera.fx * np.array([v0[0], v1[0], v2[0]]) / np.array([v0[2], v1[2], v2[2]]) + camera.cx
        ys = camera.fy * np.array([v0[1], v1[1], v2[1]]) / np.array([v0[2], v1[2], v2[2]]) + camera.cy
        area = (xs[1] - xs[0]) * (ys[2] - ys[0]) - (xs[2] - xs[0]) * (ys[1] - ys[0])
        if abs(area) < 1e-12:
            continue

        # bounding box of pixel centres, clipped to the band
        j0 = max(int(np.ceil(xs.min() - 0.5)), 0)
        j1 = min(int(np.floor(xs.max() - 0.5)), width - 1)
        i0 = max(int(np.ceil(ys.min() - 0.5)), r0)
        i1 = min(int(np.floor(ys.max() - 0.5)), r1 - 1)
        if j0 > j1 or i0 > i1:
            continue

        px = np.arange(j0, j1 + 1) + 0.5
        py = np.arange(i0, i1 + 1)[:, None] + 0.5
        sign = 1.0 if area > 0 else -1.0
        w0 = sign * ((xs[2] - xs[1]) * (py - ys[1]) - (ys[2] - ys[1]) * (px - xs[1]))
        w1 = sign * ((xs[0] - xs[2]) * (py - ys[2]) - (ys[0] - ys[2]) * (px - xs[2]))
        w2 = sign * ((xs[1] - xs[0]) * (py - ys[0]) - (ys[1] - ys[0]) * (px - xs[0]))
        inside = (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
        if not inside.any():
            continue

        # ray through each pixel centre meets the triangle plane at t·d
        dx = (px - camera.cx) / camera.fx
        dy = (py - camera.cy) / camera.fy
        normal = np.cross(v1 - v0, v2 - v0)
        denom = normal[0] * dx + normal[1] * dy + normal[2]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.dot(normal, v0) / denom
            dist = t * np.sqrt(dx * dx + dy * dy + 1.0)
        valid = inside & np.isfinite(dist) & (t > 0)
        window = zbuf[i0 : i1 + 1, j0 : j1 + 1]
        np.minimum(window, np.where(valid, dist, np.inf), out=window)


def _clip_to_near(tri: np.ndarray, near: float) -> List[np.ndarray]:
    """Keep the part of one camera-space triangle with z >= near, as a fan of triangles."""
    inside = tri[:, 2] >= near
    if inside.all():
        return [tri]
    if not inside.any():
        return []
    polygon = []
    for k in range(3):
        a, b = tri[k], tri[(k + 1) % 3]
        if inside[k]:
            polygon.append(a)
        if inside[k] != inside[(k + 1) % 3]:
            s = (near - a[2]) / (b[2] - a[2])
            polygon.append(a + s * (b - a))
    return [np.array([polygon[0], polygon[k], polygon[k + 1]]) for k in range(1, len(polygon) - 1)]


def _camera_triangles(mesh: TriangleMesh, pose: Pose6D, near: float) -> np.ndarray:
    if not len(mesh.triangles):
        return np.zeros((0, 3, 3))
    clipped = [piece for tri in to_camera(mesh, pose)[mesh.triangles] for piece in _clip_to_near(tri, near)]
    return np.array(clipped).reshape(-1, 3, 3)


def render_distances(
    mesh: TriangleMesh,
    pose: Pose6D,
    camera: CameraIntrinsics,
    near: float = DEFAULT_NEAR,
    n_bands: int = DEFAULT_BANDS,
    n_workers: int = DEFAULT_WORKERS,
    mode: PartitionMode = PartitionMode.DYNAMIC,
    costs: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Float Z-buffer of camera-to-surface distances (inf where nothing is hit)."""
    zbuf = np.full((camera.height, camera.width), np.inf)
    tri_cam = _camera_triangles(mesh.validated(), pose, near)
    bands = min(n_bands, camera.height)
    partition = partition_bands(camera.height, bands, n_workers, mode, costs=costs)
    run_bands(partition, lambda r0, r1: _rasterize_band(zbuf, tri_cam, camera, r0, r1))
    logger.debug(f"Rasterised {len(tri_cam)} triangles over {bands} bands")
    return zbuf


def render_depth(
    mesh: TriangleMesh,
    pose: Pose6D,
    camera: CameraIntrinsics,
    near: float = DEFAULT_NEAR,
    far: float = DEFAULT_FAR,
    n_bands: int = DEFAULT_BANDS,
    n_workers: int = DEFAULT_WORKERS,
    mode: PartitionMode = PartitionMode.DYNAMIC,
    costs: Optional[Sequence[float]] = None,
) -> Frame:
    """16-bit depth image; 65535 where the pixel ray hits nothing."""
    zbuf = render_distances(mesh, pose, camera, near, n_bands, n_workers, mode, costs)
    return Frame.from_array(quantize_depth(zbuf, near, far), 16)


def raycast_distances(mesh: TriangleMesh, pose: Pose6D, camera: CameraIntrinsics, near: float = DEFAULT_NEAR) -> np.ndarray:
    """Brute-force reference: Möller–Trumbore at every pixel centre against every unclipped triangle.

    Hits in front of the near plane are rejected per ray.
    """
    mesh = mesh.validated()
    tri = to_camera(mesh, pose)[mesh.triangles] if len(mesh.triangles) else np.zeros((0, 3, 3))
    out = np.full((camera.height, camera.width), np.inf)
    if not len(tri):
        return out
    v0, e1, e2 = tri[:, 0], tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]
    for i in range(camera.height):
        for j in range(camera.width):
            d = np.array([(j + 0.5 - camera.cx) / camera.fx, (i + 0.5 - camera.cy) / camera.fy, 1.0])
            d /= np.linalg.norm(d)
            p = np.cross(d, e2)
            det = np.einsum("ij,ij->i", e1, p)
            ok = np.abs(det) > 1e-12
            inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
            s = -v0
            u = np.einsum("ij,ij->i", s, p) * inv
            q = np.cross(s, e1)
            v = (q @ d) * inv
            t = np.einsum("ij,ij->i", e2, q) * inv
            hit = ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 0) & (t * d[2] >= near)
            if hit.any():
                out[i, j] = t[hit].min()
    return out


def raycast_depth(
    mesh: TriangleMesh,
    pose: Pose6D,
    camera: CameraIntrinsics,
    near: float = DEFAULT_NEAR,
    far: float = DEFAULT_FAR,
) -> Frame:
    return Frame.from_array(quantize_depth(raycast_distances(mesh, pose, camera, near), near, far), 16)

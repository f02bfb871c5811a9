"""ASCII OFF triangle meshes (polygonal faces are fan-triangulated)."""

from pathlib import Path
from typing import List, Union

import numpy as np

from app.errors import FileFormatError
from app.services.kernels.rendering import TriangleMesh


def _lines(text: str) -> List[List[str]]:
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    return rows


def read_off(path: Union[str, Path]) -> TriangleMesh:
    rows = _lines(Path(path).read_text(encoding="utf-8"))
    if not rows or rows[0][0] != "OFF":
        raise FileFormatError(f"{path}: missing OFF header")
    header = rows[0][1:] or (rows.pop(1) if len(rows) > 1 else [])
    try:
        n_vertices, n_faces = int(header[0]), int(header[1])
        body = rows[1:]
        vertices = np.array([[float(v) for v in row[:3]] for row in body[:n_vertices]], dtype=np.float64)
        triangles = []
        faces = body[n_vertices : n_vertices + n_faces]
        if len(faces) != n_faces:
            raise FileFormatError(f"{path}: expected {n_faces} faces, found {len(faces)}")
        for row in faces:
            count = int(row[0])
            idx = [int(i) for i in row[1 : 1 + count]]
            if count < 3 or len(idx) != count:
                raise FileFormatError(f"{path}: bad face {' '.join(row)}")
            triangles.extend([idx[0], idx[k], idx[k + 1]] for k in range(1, count - 1))
    except (IndexError, ValueError) as e:
        raise FileFormatError(f"{path}: malformed OFF body ({e})") from e
    if len(vertices) != n_vertices:
        raise FileFormatError(f"{path}: expected {n_vertices} vertices, found {len(vertices)}")
    return TriangleMesh(vertices.reshape(-1, 3), np.array(triangles, dtype=np.int64).reshape(-1, 3))


def write_off(path: Union[str, Path], mesh: TriangleMesh) -> Path:
    lines = ["OFF", f"{len(mesh.vertices)} {len(mesh.triangles)} 0"]
    lines += [" ".join(f"{c:.9g}" for c in v) for v in mesh.vertices]
    lines += ["3 " + " ".join(str(int(i)) for i in tri) for tri in mesh.triangles]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def cube_mesh(size: float = 1.0) -> TriangleMesh:
    """Axis-aligned cube centred on the origin, 12 outward-facing triangles."""
    h = size / 2
    vertices = np.array(
        [[-h, -h, -h], [h, -h, -h], [h, h, -h], [-h, h, -h],
         [-h, -h, h], [h, -h, h], [h, h, h], [-h, h, h]],
        dtype=np.float64,
    )
    quads = [(0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4), (2, 3, 7, 6), (1, 2, 6, 5), (0, 4, 7, 3)]
    triangles = [[a, b, c] for a, b, c, _ in quads] + [[a, c, d] for a, _, c, d in quads]
    return TriangleMesh(vertices, np.array(triangles, dtype=np.int64))

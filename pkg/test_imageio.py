"""File formats: netpbm images, OFF meshes, CNN weight blobs and report exports."""

import csv
import json

import numpy as np
import pytest

from app.errors import FileFormatError
from app.schemas.bus import BusConfig
from app.services.frame_codec import Frame
from app.services.kernels.cnn import CnnModel, infer_patch
from app.services.pixel_bus import serialize_frame
from app.utils.export import write_events_csv, write_json
from app.utils.imageio import read_pgm, read_ppm, write_pgm, write_ppm
from app.utils.mesh_io import cube_mesh, read_off, write_off
from app.utils.weights_io import read_weights, write_weights


# ── PGM / PPM ──

@pytest.mark.parametrize("bpp", [8, 16])
def test_pgm_round_trip(tmp_path, rng, bpp):
    frame = Frame.from_array(rng.integers(0, 1 << bpp, size=(7, 11)), bpp)
    path = write_pgm(tmp_path / "f.pgm", frame)
    assert read_pgm(path) == frame


def test_pgm_16_bit_is_big_endian(tmp_path):
    path = write_pgm(tmp_path / "f.pgm", Frame.from_array(np.array([[0x1234]]), 16))
    assert path.read_bytes() == b"P5\n1 1\n65535\n\x12\x34"


def test_pgm_header_comments(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# made by hand\n2 1\n# max\n255\n\x05\x06")
    assert read_pgm(path).pixels.tolist() == [[5, 6]]


@pytest.mark.parametrize(
    "content",
    [b"P6\n1 1\n255\n\x00\x00\x00", b"P5\n2 2\n255\n\x00", b"P5\nx 2\n255\n", b"P5\n1 1\n255"],
)
def test_bad_pgm_raises(tmp_path, content):
    path = tmp_path / "bad.pgm"
    path.write_bytes(content)
    with pytest.raises(FileFormatError):
        read_pgm(path)


def test_pgm_cannot_hold_24_bpp(tmp_path):
    with pytest.raises(FileFormatError):
        write_pgm(tmp_path / "f.pgm", Frame.from_array(np.zeros((2, 2)), 24))


@pytest.mark.parametrize("bpp", [8, 16])
def test_ppm_round_trip(tmp_path, rng, bpp):
    rgb = rng.integers(0, 1 << bpp, size=(5, 4, 3))
    got, got_bpp = read_ppm(write_ppm(tmp_path / "f.ppm", rgb, bpp))
    assert got_bpp == bpp
    assert np.array_equal(got, rgb)


def test_ppm_rejects_out_of_range_samples(tmp_path):
    with pytest.raises(FileFormatError):
        write_ppm(tmp_path / "f.ppm", np.full((2, 2, 3), 300), 8)


# ── OFF ──

def test_cube_fixture_has_twelve_triangles(fixture_root):
    mesh = read_off(fixture_root / "meshes" / "cube.off")
    assert mesh.vertices.shape == (8, 3)
    assert mesh.triangles.shape == (12, 3)
    assert len(mesh.validated().triangles) == 12


def test_off_round_trip(tmp_path):
    mesh = cube_mesh(3.0)
    again = read_off(write_off(tmp_path / "cube.off", mesh))
    assert np.allclose(again.vertices, mesh.vertices)
    assert np.array_equal(again.triangles, mesh.triangles)


def test_off_fans_polygons(tmp_path):
    path = tmp_path / "pentagon.off"
    path.write_text("OFF 5 1 0\n0 0 0\n1 0 0\n1 1 0\n0.5 1.5 0\n0 1 0\n5 0 1 2 3 4\n", encoding="utf-8")
    assert read_off(path).triangles.tolist() == [[0, 1, 2], [0, 2, 3], [0, 3, 4]]


@pytest.mark.parametrize(
    "text",
    ["PLY\n", "OFF\n3 1 0\n0 0 0\n1 0 0\n3 0 1 2\n", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n2 0 1\n", "OFF\n"],
)
def test_bad_off_raises(tmp_path, text):
    path = tmp_path / "bad.off"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(FileFormatError):
        read_off(path)


# ── CNN weights ──

def test_weights_round_trip(tmp_path, rng):
    model = CnnModel.from_seed(9)
    manifest = write_weights(tmp_path / "model.json", model)
    assert (tmp_path / "model.bin").stat().st_size == 2 * model.parameter_count
    loaded = read_weights(manifest)
    for name, tensor in model.weights.items():
        assert np.array_equal(loaded.weights[name], tensor)
    patch = rng.integers(0, 65536, size=(128, 128, 3))
    assert infer_patch(loaded, patch) == infer_patch(model, patch)


def test_truncated_weight_blob_raises(tmp_path):
    manifest = write_weights(tmp_path / "model.json", CnnModel.from_seed(1))
    blob = tmp_path / "model.bin"
    blob.write_bytes(blob.read_bytes()[:-2])
    with pytest.raises(FileFormatError):
        read_weights(manifest)


def test_wrong_tensor_shape_in_manifest_raises(tmp_path):
    manifest = write_weights(tmp_path / "model.json", CnnModel.from_seed(1))
    data = json.loads(manifest.read_text())
    data["tensors"][-1]["shape"] = [1, 1]
    manifest.write_text(json.dumps(data))
    with pytest.raises(FileFormatError):
        read_weights(manifest)


def test_missing_weights_file_raises(tmp_path):
    with pytest.raises(FileFormatError):
        read_weights(tmp_path / "absent.json")


# ── Exports ──

def test_json_export_is_key_sorted(tmp_path):
    path = write_json(tmp_path / "r.json", {"b": 1, "a": {"d": 2, "c": 3}})
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert text.index('"c"') < text.index('"d"')


def test_event_csv_lists_every_event(tmp_path):
    frame = Frame.from_array(np.array([[1, 2], [3, 4]]), 8)
    stream = serialize_frame(frame, BusConfig(width=2, height=2))
    path = write_events_csv(tmp_path / "events.csv", stream)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + len(stream)
    assert rows[1][1] == "VSYNC_START"
    assert rows[-1][1] == "FRAME_END"

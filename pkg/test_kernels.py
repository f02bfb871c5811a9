"""VPU kernels: band partitioning, binning, convolution, rendering and the CNN."""

import numpy as np
import pytest

from app.errors import GeometryError, ParameterError, PartitionError
from app.schemas.geometry import CameraIntrinsics, Pose6D
from app.services.frame_codec import Frame
from app.services.kernels.binning import average_binning, bin_reference
from app.services.kernels.cnn import PATCH, CnnModel, cnn_ship_detect, infer_patch, split_patches
from app.services.kernels.convolution import KERNEL_SIZES, box_kernel, correlate_float, fp_convolution
from app.services.kernels.partition import PartitionMode, partition_bands, split_heights
from app.services.kernels.rendering import (
    NO_HIT,
    TriangleMesh,
    quantize_depth,
    raycast_depth,
    render_depth,
)
from app.utils.mesh_io import cube_mesh


def random_frame(rng, width, height, bpp=8):
    return Frame.from_array(rng.integers(0, 1 << bpp, size=(height, width)), bpp)


# ── Partitioning ──

def test_static_36_bands_over_12_workers():
    p = partition_bands(2048, 36, 12, PartitionMode.STATIC)
    assert all(len(p.bands_of(w)) == 3 for w in range(12))
    assert p.height == 2048


def test_single_band_covers_image():
    p = partition_bands(1024, 1, 1, PartitionMode.STATIC)
    assert p.rows(0) == (0, 1024)
    assert p.bands_of(0) == (0,)


def test_dynamic_completes_every_band_once(rng):
    costs = rng.uniform(1.0, 20.0, size=32)
    p = partition_bands(1024, 32, 12, PartitionMode.DYNAMIC, costs=costs)
    done = sorted(band for _, band in p.dispatch_order)
    assert done == list(range(32))
    assert sorted(b for w in range(12) for b in p.bands_of(w)) == list(range(32))
    # greedy list-scheduling bound
    assert p.makespan <= sum(costs) / 12 + max(costs)


def test_dynamic_gives_slow_band_its_own_worker():
    costs = [100.0] + [1.0] * 11
    p = partition_bands(12, 12, 2, PartitionMode.DYNAMIC, costs=costs)
    assert p.bands_of(0) == (0,)
    assert len(p.bands_of(1)) == 11


def test_bands_tile_uneven_height():
    heights = split_heights(1000, 36)
    assert sum(heights) == 1000
    assert max(heights) - min(heights) <= 1


def test_aligned_bands_stay_on_unit_boundaries():
    heights = split_heights(2048, 36, align=2)
    assert sum(heights) == 2048
    assert all(h % 2 == 0 for h in heights)


@pytest.mark.parametrize(
    "height,n_bands,align",
    [(1023, 36, 2), (10, 11, 1), (64, 0, 1), (64, 4, 0)],
)
def test_bad_partition_raises(height, n_bands, align):
    with pytest.raises(PartitionError):
        split_heights(height, n_bands, align)


def test_cost_model_must_cover_every_band():
    with pytest.raises(PartitionError):
        partition_bands(64, 4, 2, PartitionMode.DYNAMIC, costs=[1.0, 2.0])


def test_zero_workers_raise():
    with pytest.raises(PartitionError):
        partition_bands(64, 4, 0)


# ── Binning ──

def test_constant_frame_bins_to_constant():
    out = average_binning(Frame.from_array(np.full((16, 16), 77), 8))
    assert (out.width, out.height) == (8, 8)
    assert np.all(out.pixels == 77)


def test_bin_floors_the_mean():
    out = average_binning(Frame.from_array(np.array([[0, 0], [0, 4]]), 8))
    assert out.pixels.tolist() == [[1]]
    out = average_binning(Frame.from_array(np.array([[0, 1], [1, 1]]), 8))
    assert out.pixels.tolist() == [[0]]


@pytest.mark.parametrize(
    "n_bands,n_workers,mode",
    [(1, 1, PartitionMode.STATIC), (36, 12, PartitionMode.STATIC), (36, 12, PartitionMode.DYNAMIC), (5, 3, PartitionMode.DYNAMIC)],
)
def test_binning_is_partition_independent(rng, n_bands, n_workers, mode):
    frame = random_frame(rng, 64, 64)
    out = average_binning(frame, n_bands=n_bands, n_workers=n_workers, mode=mode)
    assert np.array_equal(out.pixels, bin_reference(frame.pixels))


def test_binning_matches_brute_force(rng):
    frame = random_frame(rng, 12, 10)
    out = average_binning(frame)
    p = frame.pixels
    for i in range(5):
        for j in range(6):
            block = [p[2 * i, 2 * j], p[2 * i, 2 * j + 1], p[2 * i + 1, 2 * j], p[2 * i + 1, 2 * j + 1]]
            assert out.pixels[i, j] == sum(int(v) for v in block) // 4


def test_binned_pixel_within_block_range(rng):
    frame = random_frame(rng, 32, 32)
    out = average_binning(frame).pixels
    blocks = frame.pixels.reshape(16, 2, 16, 2)
    assert np.all(out >= blocks.min(axis=(1, 3)))
    assert np.all(out <= blocks.max(axis=(1, 3)))


@pytest.mark.parametrize("shape", [(15, 16), (16, 15)])
def test_binning_odd_dimension_raises(shape):
    with pytest.raises(GeometryError):
        average_binning(Frame.from_array(np.zeros(shape), 8))


def test_binning_rejects_16_bpp():
    with pytest.raises(GeometryError):
        average_binning(Frame.from_array(np.zeros((4, 4)), 16))


# ── Convolution ──

def naive_convolution(pixels, kernel):
    """Quadruple loop in float32, kernel taps in row-major order."""
    h, w = pixels.shape
    k = kernel.shape[0]
    r = k // 2
    out = np.zeros((h, w), dtype=np.uint32)
    for i in range(h):
        for j in range(w):
            acc = np.float32(0.0)
            for di in range(k):
                for dj in range(k):
                    y, x = i + di - r, j + dj - r
                    p = np.float32(pixels[y, x]) if 0 <= y < h and 0 <= x < w else np.float32(0.0)
                    acc = np.float32(acc + np.float32(p * kernel[di, dj]))
            out[i, j] = min(max(int(np.rint(acc)), 0), 255)
    return out


def test_delta_kernel_is_identity(rng):
    frame = random_frame(rng, 24, 24)
    delta = np.zeros((5, 5), dtype=np.float32)
    delta[2, 2] = 1.0
    assert np.array_equal(fp_convolution(frame, delta).pixels, frame.pixels)


def test_box_kernel_keeps_constant_interior():
    out = fp_convolution(Frame.from_array(np.full((16, 16), 90), 8), box_kernel(3)).pixels
    assert np.all(out[1:-1, 1:-1] == 90)
    # zero padding darkens the corners
    assert out[0, 0] == 40


@pytest.mark.parametrize("k", KERNEL_SIZES)
def test_convolution_matches_naive_oracle(rng, k):
    # 9 pairs per size, 54 in all; wide kernels get smaller frames
    side = 16 if k <= 7 else 12
    for _ in range(9):
        frame = random_frame(rng, side, side)
        kernel = rng.uniform(-0.5, 0.5, size=(k, k)).astype(np.float32)
        assert np.array_equal(fp_convolution(frame, kernel).pixels, naive_convolution(frame.pixels, kernel))


def test_convolution_is_correlation():
    image = np.zeros((9, 9))
    image[4, 4] = 100
    kernel = np.zeros((3, 3), dtype=np.float32)
    kernel[0, 0] = 1.0
    out = fp_convolution(Frame.from_array(image, 8), kernel).pixels
    # tap (0, 0) reads the upper-left neighbour, so the impulse lands down-right
    assert out[5, 5] == 100
    assert out.sum() == 100


def test_convolution_is_partition_independent(rng):
    frame = random_frame(rng, 40, 40)
    kernel = rng.uniform(0.0, 0.1, size=(7, 7))
    a = fp_convolution(frame, kernel, n_bands=1, n_workers=1)
    b = fp_convolution(frame, kernel, n_bands=36, n_workers=12)
    c = fp_convolution(frame, kernel, n_bands=36, n_workers=12, mode=PartitionMode.DYNAMIC)
    assert np.array_equal(a.pixels, b.pixels)
    assert np.array_equal(a.pixels, c.pixels)


def test_unclamped_correlation_is_linear(rng):
    a = rng.integers(0, 256, size=(20, 20)).astype(np.float32)
    b = rng.integers(0, 256, size=(20, 20)).astype(np.float32)
    kernel = rng.uniform(-1.0, 1.0, size=(5, 5))
    lhs = correlate_float(2.0 * a - 0.5 * b, kernel)
    rhs = 2.0 * correlate_float(a, kernel) - 0.5 * correlate_float(b, kernel)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-4, atol=0.1)


@pytest.mark.parametrize("shape", [(4, 4), (1, 1), (15, 15), (3, 5)])
def test_bad_kernel_size_raises(shape):
    with pytest.raises(ParameterError):
        fp_convolution(Frame.from_array(np.zeros((8, 8)), 8), np.ones(shape))


# ── Rendering ──

def square_mesh(half=10.0):
    vertices = [[-half, -half, 0.0], [half, -half, 0.0], [half, half, 0.0], [-half, half, 0.0]]
    return TriangleMesh(np.array(vertices), np.array([[0, 1, 2], [0, 2, 3]]))


def test_empty_mesh_renders_blank():
    out = render_depth(TriangleMesh.empty(), Pose6D(), CameraIntrinsics.centered(16, 16, 16.0))
    assert np.all(out.pixels == NO_HIT)
    assert out.bpp == 16


def test_square_facing_camera_gives_ray_distance():
    d = 5.0
    camera = CameraIntrinsics.centered(16, 16, 16.0)
    out = render_depth(square_mesh(), Pose6D(tz=d), camera).pixels
    j, i = np.meshgrid(np.arange(16) + 0.5, np.arange(16) + 0.5)
    dx, dy = (j - camera.cx) / camera.fx, (i - camera.cy) / camera.fy
    expected = quantize_depth(d * np.sqrt(dx * dx + dy * dy + 1.0))
    assert np.all(out != NO_HIT)
    assert np.abs(out.astype(np.int64) - expected.astype(np.int64)).max() <= 1


def test_quantize_depth_endpoints():
    q = quantize_depth(np.array([0.1, 100.0, 50.05, np.inf, 0.01, 1e6]))
    assert q.tolist() == [0, 65534, 32767, NO_HIT, 0, 65534]


def test_mesh_behind_camera_is_culled():
    out = render_depth(square_mesh(), Pose6D(tz=-5.0), CameraIntrinsics.centered(8, 8, 8.0))
    assert np.all(out.pixels == NO_HIT)


def test_wall_crossing_near_plane_is_clipped_not_dropped():
    # plane 9.95·y − 10·z + 50.25 = 0, running from z = 0.05 up to z = 10
    wall = TriangleMesh(
        np.array([[-5.0, -5.0, 0.05], [5.0, -5.0, 0.05], [5.0, 5.0, 10.0], [-5.0, 5.0, 10.0]]),
        np.array([[0, 1, 2], [0, 2, 3]]),
    )
    camera = CameraIntrinsics.centered(16, 16, 16.0)
    out = render_depth(wall, Pose6D(), camera).pixels.astype(np.int64)
    assert np.all(out != NO_HIT)

    j, i = np.meshgrid(np.arange(16) + 0.5, np.arange(16) + 0.5)
    dx, dy = (j - camera.cx) / camera.fx, (i - camera.cy) / camera.fy
    t = 50.25 / (10.0 - 9.95 * dy)
    expected = quantize_depth(t * np.sqrt(dx * dx + dy * dy + 1.0)).astype(np.int64)
    assert np.abs(out - expected).max() <= 1

    rays = raycast_depth(wall, Pose6D(), camera).pixels.astype(np.int64)
    assert np.abs(out - rays).max() <= 1


def test_render_agrees_with_raycast_oracle():
    mesh = cube_mesh(2.0)
    pose = Pose6D(tz=4.0, rx=0.5, ry=0.75)
    camera = CameraIntrinsics.centered(16, 16, 16.0)
    raster = render_depth(mesh, pose, camera).pixels.astype(np.int64)
    rays = raycast_depth(mesh, pose, camera).pixels.astype(np.int64)
    covered = (raster != NO_HIT) | (rays != NO_HIT)
    assert covered.sum() > 20
    agree = np.abs(raster - rays)[covered] <= 1
    assert agree.mean() >= 0.95


def test_adding_a_triangle_never_increases_depth(rng):
    mesh = cube_mesh(2.0)
    pose = Pose6D(tz=4.0, rx=0.3, ry=-0.4)
    camera = CameraIntrinsics.centered(16, 16, 16.0)
    before = render_depth(mesh, pose, camera).pixels
    for _ in range(5):
        extra = rng.uniform(-1.5, 1.5, size=(3, 3))
        mesh = mesh.extended(extra, [[0, 1, 2]])
        after = render_depth(mesh, pose, camera).pixels
        assert np.all(after <= before)
        before = after


def test_render_is_partition_independent():
    mesh = cube_mesh(2.0)
    pose = Pose6D(tz=3.5, rx=0.2, ry=0.9, rz=0.1)
    camera = CameraIntrinsics.centered(24, 24, 24.0)
    dynamic = render_depth(mesh, pose, camera, mode=PartitionMode.DYNAMIC, costs=list(range(1, 25)))
    static = render_depth(mesh, pose, camera, n_bands=24, n_workers=12, mode=PartitionMode.STATIC)
    single = render_depth(mesh, pose, camera, n_bands=1, n_workers=1, mode=PartitionMode.STATIC)
    assert np.array_equal(dynamic.pixels, static.pixels)
    assert np.array_equal(single.pixels, static.pixels)


def test_degenerate_triangles_are_dropped():
    mesh = TriangleMesh(np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]]), np.array([[0, 1, 2]]))
    assert len(mesh.validated().triangles) == 0


def test_out_of_range_triangle_index_raises():
    with pytest.raises(GeometryError):
        TriangleMesh(np.zeros((3, 3)), np.array([[0, 1, 3]]))


# ── CNN ──

@pytest.fixture(scope="module")
def model():
    return CnnModel.from_seed(5)


def test_model_shape(model):
    assert model.layer_count == 6
    assert model.parameter_count == 125_425
    assert abs(model.parameter_count - 132_000) <= 0.05 * 132_000


def test_identical_patches_score_identically(rng, model):
    patch = rng.integers(0, 65536, size=(PATCH, PATCH, 3))
    image = np.tile(patch, (2, 2, 1))
    scores = cnn_ship_detect(image, model)
    assert scores.shape == (4,)
    assert np.all(scores == scores[0])


def test_scores_are_probabilities(rng, model):
    image = rng.integers(0, 65536, size=(2 * PATCH, 2 * PATCH, 3))
    scores = cnn_ship_detect(image, model)
    assert np.all((scores >= 0.0) & (scores <= 1.0))


def test_fp16_close_to_fp32_reference(rng, model):
    diffs = []
    for _ in range(100):
        patch = rng.integers(0, 65536, size=(PATCH, PATCH, 3))
        diffs.append(abs(infer_patch(model, patch, "fp16") - infer_patch(model, patch, "fp32")))
    assert max(diffs) <= 0.02


def test_swapping_patches_swaps_scores(rng, model):
    image = rng.integers(0, 65536, size=(PATCH, 3 * PATCH, 3))
    swapped = image.copy()
    swapped[:, :PATCH], swapped[:, 2 * PATCH :] = image[:, 2 * PATCH :], image[:, :PATCH]
    a = cnn_ship_detect(image, model)
    b = cnn_ship_detect(swapped, model)
    assert b.tolist() == [a[2], a[1], a[0]]


def test_patches_are_row_major(rng):
    image = rng.integers(0, 65536, size=(2 * PATCH, 2 * PATCH, 3))
    patches = split_patches(image)
    assert np.array_equal(patches[1], image[:PATCH, PATCH:])
    assert np.array_equal(patches[2], image[PATCH:, :PATCH])


def test_partial_patch_grid_raises(model):
    with pytest.raises(GeometryError):
        cnn_ship_detect(np.zeros((PATCH + 1, PATCH, 3)), model)


def test_wrong_tensor_shape_raises(model):
    weights = dict(model.weights)
    weights["dense2.bias"] = np.zeros(2)
    with pytest.raises(GeometryError):
        CnnModel(weights)

"""End-to-end scenarios: host → CIF → kernel → LCD → host, golden checks and timing provenance."""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from app.errors import ConfigurationError, GeometryError, ParameterError
from app.schemas.geometry import Pose6D
from app.schemas.scenario import BitFlip, Scenario
from app.schemas.timing import PipelineMode, Provenance
from app.services.frame_codec import Frame
from app.services.golden import compare_golden, frame_checksum
from app.services.scenario_runner import decode_pose, encode_pose, full_size, load_scenario, run_scenario
from app.utils.imageio import write_pgm


# ── Golden comparison ──

def test_identical_frames_match():
    frame = Frame.from_array(np.arange(16).reshape(4, 4), 8)
    report = compare_golden(frame, frame)
    assert report.passed
    assert report.mismatched_pixels == 0
    assert report.fraction_within == 1.0


def test_one_lsb_off_fails_exact_check():
    golden = Frame.from_array(np.full((4, 4), 10), 8)
    pixels = np.full((4, 4), 10)
    pixels[2, 3] = 11
    output = Frame.from_array(pixels, 8)
    exact = compare_golden(output, golden)
    assert not exact.passed
    assert exact.max_abs_diff == 1
    assert exact.mismatched_pixels == 1
    assert compare_golden(output, golden, tolerance=1).passed


def test_golden_size_mismatch_raises():
    with pytest.raises(GeometryError):
        compare_golden(Frame.from_array(np.zeros((4, 4)), 8), Frame.from_array(np.zeros((4, 2)), 8))


def test_checksum_covers_geometry():
    a = Frame.from_array(np.zeros((2, 4)), 8)
    b = Frame.from_array(np.zeros((4, 2)), 8)
    assert frame_checksum(a) != frame_checksum(b)
    assert frame_checksum(a) == frame_checksum(Frame.from_array(np.zeros((2, 4)), 8))


# ── Pose on the wire ──

def test_pose_frame_layout():
    frame = encode_pose(Pose6D(tx=1.0, ty=-2.0, tz=4.0, rx=0.5, ry=0.25, rz=0.0))
    assert (frame.width, frame.height, frame.bpp) == (6, 1, 16)
    assert frame.pixels[0, 0] == 0x3C00  # 1.0 in half precision
    assert decode_pose(frame).as_vector() == [1.0, -2.0, 4.0, 0.5, 0.25, 0.0]


def test_pose_outside_half_range_raises():
    with pytest.raises(ConfigurationError):
        encode_pose(Pose6D(tz=1e6))


# ── Scenario files ──

def test_load_fixture(scenario_dir):
    scenario = load_scenario(scenario_dir / "conv3.json")
    assert scenario.timing_key == "conv3"
    assert scenario.mode is PipelineMode.UNMASKED


@pytest.mark.parametrize("content", ["{", json.dumps({"name": "x", "benchmark": "fft"})])
def test_invalid_scenario_file(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    with pytest.raises(ConfigurationError):
        load_scenario(path)


def test_missing_scenario_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_scenario(tmp_path / "absent.json")


def test_derived_timing_needs_vpu_time():
    with pytest.raises(ValidationError):
        Scenario.model_validate(
            {"name": "x", "benchmark": "conv", "frame": {"width": 8, "height": 8}, "timing": {"source": "derived"}}
        )


def test_render_range_must_be_ordered():
    with pytest.raises(ValidationError):
        Scenario.model_validate(
            {"name": "x", "benchmark": "render", "frame": {"width": 8, "height": 8, "bpp": 16}, "near": 5, "far": 1}
        )


def test_full_size_geometry(scenario_dir):
    scenario = full_size(load_scenario(scenario_dir / "render.json"))
    assert (scenario.frame.width, scenario.frame.height, scenario.frame.bpp) == (1024, 1024, 16)
    assert scenario.inputs.mesh == "meshes/cube.off"


# ── Runs ──

@pytest.mark.parametrize("name", ["binning_constant", "conv3", "conv3_derived", "render", "cnn"])
def test_fixture_scenarios_pass(scenario_dir, name):
    report = run_scenario(load_scenario(scenario_dir / f"{name}.json"))
    assert report.functional.crc_ok_cif and report.functional.crc_ok_lcd
    assert report.functional.golden.passed
    assert report.passed


def test_binning_output_geometry(scenario_dir):
    report = run_scenario(load_scenario(scenario_dir / "binning_constant.json"))
    f = report.functional
    assert (f.output_width, f.output_height, f.output_bpp) == (8, 8, 8)
    assert f.output_checksum == frame_checksum(Frame.from_array(np.full((8, 8), 77), 8))


def test_conv3_paper_timing(scenario_dir):
    report = run_scenario(load_scenario(scenario_dir / "conv3.json"))
    assert report.performance.throughput == pytest.approx(20.0)
    assert report.analytical_latency_ms == pytest.approx(50.0)
    assert set(report.provenance.values()) == {Provenance.PAPER}


def test_render_sees_the_mesh(scenario_dir):
    scenario = load_scenario(scenario_dir / "render.json")
    report = run_scenario(scenario)
    # the masked schedule hides I/O behind the 164 ms render
    assert report.analytical_fps == pytest.approx(1 / 0.164)
    blank = run_scenario(scenario.model_copy(update={"pose": Pose6D(tz=-4.0)}))
    assert blank.functional.output_checksum != report.functional.output_checksum


def test_cnn_returns_one_score_per_patch(scenario_dir):
    report = run_scenario(load_scenario(scenario_dir / "cnn.json"))
    f = report.functional
    assert (f.output_width, f.output_height, f.output_bpp) == (1, 1, 16)


def test_derived_timing_labels_provenance(scenario_dir):
    report = run_scenario(load_scenario(scenario_dir / "conv3_derived.json"))
    assert report.provenance["cif_time"] is Provenance.DERIVED
    assert report.provenance["vpu_time"] is Provenance.PAPER
    # 32x32 payload pixels at 50 MHz
    assert report.component_times_ms["cif_ms"] == pytest.approx(32 * 32 / 50e6 * 1e3)


def test_measured_host_timing(scenario_dir):
    scenario = load_scenario(scenario_dir / "conv3.json")
    timing = scenario.timing.model_copy(update={"source": "measured-host"})
    report = run_scenario(scenario.model_copy(update={"timing": timing}))
    assert report.provenance["vpu_time"] is Provenance.MEASURED_HOST
    assert report.component_times_ms["vpu_ms"] > 0


def test_lcd_frequency_override(scenario_dir):
    scenario = load_scenario(scenario_dir / "conv3_derived.json")
    base = run_scenario(scenario)
    slow = run_scenario(scenario.model_copy(update={"lcd_frequency": 25e6}))
    assert slow.component_times_ms["lcd_ms"] == pytest.approx(2 * base.component_times_ms["lcd_ms"])
    assert slow.passed


def test_injected_flip_fails_cif_crc(scenario_dir):
    report = run_scenario(load_scenario(scenario_dir / "injected_error.json"))
    assert not report.functional.crc_ok_cif
    assert report.functional.crc_ok_lcd
    assert not report.passed


def test_lcd_flip_fails_lcd_crc(scenario_dir):
    scenario = load_scenario(scenario_dir / "injected_error.json")
    scenario = scenario.model_copy(update={"inject": [BitFlip(link="lcd", cycle=20, bit=3)]})
    report = run_scenario(scenario)
    assert report.functional.crc_ok_cif
    assert not report.functional.crc_ok_lcd


def test_golden_file_input(tmp_path, scenario_dir):
    write_pgm(tmp_path / "golden.pgm", Frame.from_array(np.full((8, 8), 77), 8))
    scenario = load_scenario(scenario_dir / "binning_constant.json")
    inputs = scenario.inputs.model_copy(update={"golden": str(tmp_path / "golden.pgm")})
    assert run_scenario(scenario.model_copy(update={"inputs": inputs})).passed

    write_pgm(tmp_path / "golden.pgm", Frame.from_array(np.full((8, 8), 78), 8))
    assert not run_scenario(scenario.model_copy(update={"inputs": inputs})).passed


def test_image_geometry_mismatch(tmp_path, scenario_dir):
    write_pgm(tmp_path / "in.pgm", Frame.from_array(np.zeros((8, 8)), 8))
    scenario = load_scenario(scenario_dir / "conv3.json")
    inputs = scenario.inputs.model_copy(update={"image": str(tmp_path / "in.pgm")})
    with pytest.raises(GeometryError):
        run_scenario(scenario.model_copy(update={"inputs": inputs}))


def test_kernel_size_mismatch(scenario_dir):
    scenario = load_scenario(scenario_dir / "conv3.json")
    with pytest.raises(ParameterError):
        run_scenario(scenario.model_copy(update={"kernel": np.ones((5, 5)).tolist()}))


def test_missing_mesh_file(scenario_dir):
    scenario = load_scenario(scenario_dir / "render.json")
    inputs = scenario.inputs.model_copy(update={"mesh": "meshes/absent.off"})
    with pytest.raises(ConfigurationError):
        run_scenario(scenario.model_copy(update={"inputs": inputs}))

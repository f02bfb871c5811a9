"""VPU benchmark kernels and their band/patch work partitioning."""

from app.services.kernels.binning import average_binning, bin_reference
from app.services.kernels.cnn import CnnModel, cnn_ship_detect, infer_patch
from app.services.kernels.convolution import correlate_float, fp_convolution
from app.services.kernels.partition import BandPartition, PartitionMode, partition_bands
from app.services.kernels.rendering import TriangleMesh, raycast_depth, render_depth

__all__ = [
    "BandPartition",
    "CnnModel",
    "PartitionMode",
    "TriangleMesh",
    "average_binning",
    "bin_reference",
    "cnn_ship_detect",
    "correlate_float",
    "fp_convolution",
    "infer_patch",
    "partition_bands",
    "raycast_depth",
    "render_depth",
]

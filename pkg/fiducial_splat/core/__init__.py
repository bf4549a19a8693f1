"""
Fiducial Splat Core Module

Marker I/O, minimum rectangle partition, Gaussian splat generation, the CPU
splat renderer and the evaluation harness.
"""

from .harness import SweepConfig, SweepReport, angle_sweep, bit_readback, psnr, report_counts_and_time, ssim
from .marker_io import BitGrid, ImageBuffer, load_bitgrid, make_test_grid, read_image, save_bitgrid, write_image
from .rect_partition import PartitionResult, Rect, partition_marker, per_cell_partition
from .renderer import Camera, RenderConfig, make_camera, pose_from_view, render
from .splat_generator import ApproxConfig, Gaussian2D, Plane, SplatSet, load_splats, marker_to_splats, save_splats

__all__ = [
    'BitGrid',
    'ImageBuffer',
    'load_bitgrid',
    'save_bitgrid',
    'make_test_grid',
    'read_image',
    'write_image',
    'PartitionResult',
    'Rect',
    'partition_marker',
    'per_cell_partition',
    'ApproxConfig',
    'Gaussian2D',
    'Plane',
    'SplatSet',
    'marker_to_splats',
    'load_splats',
    'save_splats',
    'Camera',
    'RenderConfig',
    'make_camera',
    'pose_from_view',
    'render',
    'SweepConfig',
    'SweepReport',
    'angle_sweep',
    'bit_readback',
    'psnr',
    'ssim',
    'report_counts_and_time',
]

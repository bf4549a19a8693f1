"""
Fiducial Splat - compile binary fiducial markers into 2D Gaussian splats

Turns AprilTag/QR bitmaps into compact sets of planar Gaussian primitives
without any training: the marker is split into a minimum number of
rectangles per color component, and every rectangle expands into a fixed
multi-level Gaussian mixture. A CPU rasterizer and a readback harness check
that the result stays readable from oblique views.

Example:
    >>> from fiducial_splat import FiducialSplat
    >>> fs = FiducialSplat()
    >>> grid = fs.load_marker("tests/data/plus.txt")
    >>> splats = fs.generate(grid)
    >>> image = fs.render(splats, view_angle=60)
"""

import logging
import platform
import sys
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

from .core.harness import SweepConfig, SweepReport, angle_sweep
from .core.marker_io import BitGrid, ImageBuffer, load_bitgrid, write_image
from .core.rect_partition import PartitionResult, partition_marker
from .core.renderer import RenderConfig, make_camera, render
from .core.splat_generator import ApproxConfig, Plane, SplatSet, load_splats, marker_to_splats, save_splats
from .utils.config import load_config

__version__ = "1.0.0"

logger = logging.getLogger(__name__)

ConfigSource = Union[None, str, Path, Mapping[str, Any]]


class FiducialSplat:
    """Marker-to-splat pipeline with one configuration."""

    def __init__(self, config: ConfigSource = None):
        """
        Args:
            config: YAML path, configuration dict, or None for defaults
        """
        self.config = load_config(config)
        self.render_config = RenderConfig.from_dict(self.config["render"])
        self.sweep_config = SweepConfig.from_dict(self.config["sweep"])
        logger.debug("FiducialSplat initialized")

    def get_info(self) -> Dict[str, Any]:
        """Version, platform, dependency availability and active configuration."""
        return {
            "version": __version__,
            "python_version": sys.version,
            "platform": platform.platform(),
            "modules": {
                "numpy": self._check_module("numpy"),
                "pillow": self._check_module("PIL"),
                "networkx": self._check_module("networkx"),
                "plyfile": self._check_module("plyfile"),
                "opencv": self._check_module("cv2"),
                "yaml": self._check_module("yaml"),
            },
            "config": self.config,
        }

    def _check_module(self, module_name: str) -> bool:
        try:
            __import__(module_name)
            return True
        except ImportError:
            return False

    def approx_config(self, grid: BitGrid, part: Optional[PartitionResult] = None) -> ApproxConfig:
        """Mixture parameters for ``grid``, resolving the level default from its size and partition."""
        part = part or self.partition(grid)
        return ApproxConfig.from_dict(self.config["approx"], grid.width, grid.height, part.longest_side)

    def load_marker(self, path: Union[str, Path], format: Optional[str] = None) -> BitGrid:
        return load_bitgrid(path, format)

    def partition(self, grid: BitGrid) -> PartitionResult:
        return partition_marker(grid, self.config["partition"]["colors"])

    def generate(
        self,
        grid: BitGrid,
        plane: Optional[Plane] = None,
        marker_id: Optional[str] = None,
    ) -> SplatSet:
        """Partition the marker and expand every rectangle into splats."""
        part = self.partition(grid)
        return marker_to_splats(part, (grid.width, grid.height), self.approx_config(grid, part), plane, marker_id)

    def render(
        self,
        splats: SplatSet,
        view_angle: float = 0.0,
        azimuth: Optional[float] = None,
        resolution: Optional[Tuple[int, int]] = None,
        distance: Optional[float] = None,
    ) -> ImageBuffer:
        """Render with the default camera at the given view angle."""
        width, height = resolution or self.sweep_config.resolution
        cam = make_camera(
            width,
            height,
            distance if distance is not None else self.sweep_config.distance,
            view_angle,
            self.sweep_config.azimuth if azimuth is None else azimuth,
        )
        return render(splats, cam, self.render_config)

    def sweep(
        self,
        splats: SplatSet,
        truth: BitGrid,
        angles: Sequence[float],
        dump_dir: Optional[Union[str, Path]] = None,
        progress: bool = False,
    ) -> SweepReport:
        cfg = self.sweep_config
        return angle_sweep(
            splats,
            truth,
            angles,
            distance=cfg.distance,
            azimuth=cfg.azimuth,
            resolution=cfg.resolution,
            decode_threshold=cfg.decode_threshold,
            render_cfg=self.render_config,
            dump_dir=dump_dir,
            progress=progress,
        )


# Convenience functions for quick operations
def quick_compile(input_path: Union[str, Path], output_path: Union[str, Path], config: ConfigSource = None) -> int:
    """
    Compile a marker file into a .ply or .json splat file.

    Returns:
        Number of splats written
    """
    fs = FiducialSplat(config)
    grid = fs.load_marker(input_path)
    splats = fs.generate(grid, marker_id=Path(input_path).stem)
    save_splats(splats, output_path)
    return len(splats)


def quick_render(
    splats_path: Union[str, Path],
    output_path: Union[str, Path],
    view_angle: float = 0.0,
    config: ConfigSource = None,
) -> ImageBuffer:
    """Render a splat file to a PGM image."""
    fs = FiducialSplat(config)
    image = fs.render(load_splats(splats_path), view_angle=view_angle)
    write_image(image, output_path)
    return image


__all__ = [
    'FiducialSplat',
    'quick_compile',
    'quick_render',
    '__version__',
]

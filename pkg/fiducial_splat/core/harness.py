"""
Evaluation Harness

Image metrics (PSNR, SSIM), a bit-readback decodability oracle, viewing-angle
sweeps and primitive-count / construction-time reports.

The readback oracle projects every module center through the known camera,
samples the image bilinearly and thresholds at 0.5 (dark iff < 0.5). A marker
counts as decodable at an angle when the fraction of correctly read modules
reaches the decode threshold (1.0 by default). Real detectors are not run;
sweeps can dump each frame as a PPM for external tools.
"""

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import cv2
import numpy as np
from tqdm import tqdm

from ..utils.config import DEFAULT_CONFIG
from ..utils.error_handler import (
    ConfigurationError,
    DimensionError,
    ProjectionError,
    ValidationError,
    create_error_context,
)
from .marker_io import BitGrid, ImageBuffer, write_image
from .rect_partition import partition_marker
from .renderer import Camera, RenderConfig, make_camera, project_points, render
from .splat_generator import ApproxConfig, Plane, SplatSet, marker_to_splats

logger = logging.getLogger(__name__)

SSIM_WINDOW = (11, 11)
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
PLANE_DIAGONAL = 2.0 * math.sqrt(2.0)

# Size categories by marker width in modules (QR versions 2, 5, 10, 22)
SIZE_CATEGORIES = [(25, "small"), (37, "medium"), (57, "large"), (105, "huge")]


def _json_float(value: float) -> Union[float, str]:
    return "inf" if math.isinf(value) else value


# ---------------------------------------------------------------------------
# Image metrics
# ---------------------------------------------------------------------------

def _check_same_shape(a: ImageBuffer, b: ImageBuffer, operation: str) -> None:
    if (a.width, a.height, a.channels) != (b.width, b.height, b.channels):
        raise DimensionError(
            f"Image shapes differ: {a.width}x{a.height}x{a.channels} vs {b.width}x{b.height}x{b.channels}",
            create_error_context(operation),
        )


def psnr(a: ImageBuffer, b: ImageBuffer) -> float:
    """
    Peak signal-to-noise ratio with MAX = 1 over all samples.

    Returns:
        Decibels, or math.inf for identical images
    """
    _check_same_shape(a, b, "psnr")
    mse = float(np.mean((a.samples - b.samples) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def ssim(a: ImageBuffer, b: ImageBuffer) -> float:
    """
    Mean structural similarity on luminance.

    Uses an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, MAX = 1.

    Raises:
        DimensionError: On shape mismatch or images smaller than the window
    """
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionError(
            f"Image sizes differ: {a.width}x{a.height} vs {b.width}x{b.height}",
            create_error_context("ssim"),
        )
    if a.width < SSIM_WINDOW[0] or a.height < SSIM_WINDOW[1]:
        raise DimensionError(
            f"Images of {a.width}x{a.height} are smaller than the {SSIM_WINDOW[0]}x{SSIM_WINDOW[1]} window",
            create_error_context("ssim"),
        )

    i1 = a.to_gray().astype(np.float64)
    i2 = b.to_gray().astype(np.float64)
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2

    def blur(x: np.ndarray) -> np.ndarray:
        return cv2.GaussianBlur(x, SSIM_WINDOW, SSIM_SIGMA, sigmaY=SSIM_SIGMA)

    mu1 = blur(i1)
    mu2 = blur(i2)
    sigma1_sq = blur(i1 * i1) - mu1 * mu1
    sigma2_sq = blur(i2 * i2) - mu2 * mu2
    sigma12 = blur(i1 * i2) - mu1 * mu2

    ssim_map = ((2 * mu1 * mu2 + c1) * (2 * sigma12 + c2)) / (
        (mu1 * mu1 + mu2 * mu2 + c1) * (sigma1_sq + sigma2_sq + c2)
    )
    return float(np.mean(ssim_map))


def image_metrics(
    ref: ImageBuffer, test: ImageBuffer, bit_accuracy: Optional[float] = None
) -> Dict[str, Any]:
    """Machine-readable metric record; LPIPS is reported as unavailable."""
    record: Dict[str, Any] = {
        "psnr": _json_float(psnr(ref, test)),
        "ssim": ssim(ref, test),
        "lpips": "unavailable",
    }
    if bit_accuracy is not None:
        record["bit_accuracy"] = bit_accuracy
    return record


# ---------------------------------------------------------------------------
# Bit readback
# ---------------------------------------------------------------------------

def module_centers(width: int, height: int, plane: Plane) -> np.ndarray:
    """World positions of all module centers, row-major (row 0 at the top, +v)."""
    cell = 2.0 / max(width, height)
    rows, cols = np.indices((height, width))
    uv = np.stack(
        [(cols.ravel() + 0.5 - width / 2.0) * cell, (height / 2.0 - rows.ravel() - 0.5) * cell], axis=1
    )
    return plane.to_world(uv)


def read_modules(
    img: ImageBuffer, cam: Camera, plane: Plane, grid_dims: Tuple[int, int]
) -> np.ndarray:
    """
    Bilinear samples of the image at every projected module center.

    Returns:
        (height, width) array of gray samples

    Raises:
        ProjectionError: If any center is behind the camera or outside the image
    """
    width, height = grid_dims
    if (img.width, img.height) != (cam.width, cam.height):
        raise DimensionError(
            f"Image is {img.width}x{img.height}, camera is {cam.width}x{cam.height}",
            create_error_context("bit_readback"),
        )
    pixels, _ = project_points(cam, module_centers(width, height, plane))
    outside = (
        ~np.isfinite(pixels).all(axis=1)
        | (pixels[:, 0] < 0) | (pixels[:, 0] > cam.width)
        | (pixels[:, 1] < 0) | (pixels[:, 1] > cam.height)
    )
    if outside.any():
        first = int(np.flatnonzero(outside)[0])
        raise ProjectionError(
            f"{int(outside.sum())} module center(s) project outside the image",
            create_error_context("bit_readback", row=first // width, col=first % width),
        )

    gray = img.to_gray().astype(np.float32)
    # pixel centers sit at +0.5
    map_x = (pixels[:, 0] - 0.5).astype(np.float32).reshape(1, -1)
    map_y = (pixels[:, 1] - 0.5).astype(np.float32).reshape(1, -1)
    samples = cv2.remap(gray, map_x, map_y, interpolation=cv2.INTER_LINEAR, borderMode=cv2.BORDER_REPLICATE)
    return samples.reshape(height, width).astype(np.float64)


def bit_readback(
    img: ImageBuffer,
    cam: Camera,
    plane: Plane,
    grid_dims: Tuple[int, int],
    truth: BitGrid,
) -> float:
    """Fraction of modules whose thresholded sample matches the truth grid."""
    if grid_dims != (truth.width, truth.height):
        raise DimensionError(
            f"Grid dims {grid_dims} do not match truth {truth.width}x{truth.height}",
            create_error_context("bit_readback"),
        )
    read = (read_modules(img, cam, plane, grid_dims) < 0.5).astype(np.uint8)
    return float(np.mean(read == truth.cells))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    decode_threshold: float = 1.0
    azimuth: float = 0.0
    resolution: Tuple[int, int] = (800, 800)
    distance_factor: float = 3.0

    def __post_init__(self) -> None:
        context = create_error_context("SweepConfig")
        if not 0.0 <= self.decode_threshold <= 1.0:
            raise ConfigurationError(f"decode_threshold must be in [0, 1], got {self.decode_threshold}", context)
        if len(self.resolution) != 2 or min(self.resolution) < 1:
            raise ConfigurationError(f"resolution must be two positive integers, got {self.resolution}", context)
        if self.distance_factor <= 0:
            raise ConfigurationError(f"distance_factor must be positive, got {self.distance_factor}", context)
        object.__setattr__(self, "resolution", (int(self.resolution[0]), int(self.resolution[1])))

    @classmethod
    def from_dict(cls, values: Optional[Mapping[str, Any]] = None) -> "SweepConfig":
        merged = dict(DEFAULT_CONFIG["sweep"])
        merged.update(values or {})
        return cls(
            decode_threshold=float(merged["decode_threshold"]),
            azimuth=float(merged["azimuth"]),
            resolution=tuple(merged["resolution"]),
            distance_factor=float(merged["distance_factor"]),
        )

    @property
    def distance(self) -> float:
        return PLANE_DIAGONAL * self.distance_factor


class AngleRecord(NamedTuple):
    theta: float
    bit_accuracy: float
    decodable: bool


@dataclass
class SweepReport:
    """Per-angle readback results; theta_decode is the largest decodable angle."""
    marker: str
    config: Dict[str, Any]
    records: List[AngleRecord] = field(default_factory=list)
    primitive_count: int = 0
    construction_time: Optional[float] = None

    def __post_init__(self) -> None:
        thetas = [r.theta for r in self.records]
        if any(b <= a for a, b in zip(thetas, thetas[1:])):
            raise ValidationError("Sweep angles must be strictly increasing", create_error_context("SweepReport"))

    @property
    def theta_decode(self) -> Optional[float]:
        passing = [r.theta for r in self.records if r.decodable]
        return max(passing) if passing else None

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "marker": self.marker,
            "config": self.config,
            "records": [
                {"theta": r.theta, "bit_accuracy": r.bit_accuracy, "decodable": r.decodable}
                for r in self.records
            ],
            "theta_decode": self.theta_decode,
            "primitive_count": self.primitive_count,
        }
        if include_timing:
            data["timing"] = {"construction_time": self.construction_time}
        return data

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=2) + "\n"


def _validate_angles(angles: Sequence[float]) -> List[float]:
    values = [float(a) for a in angles]
    context = create_error_context("angle_sweep", angles=values)
    if any(not 0.0 <= a < 90.0 for a in values):
        raise ValidationError("Sweep angles must lie in [0, 90)", context)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError("Sweep angles must be strictly increasing", context)
    return values


def angle_sweep(
    splats: SplatSet,
    truth: BitGrid,
    angles: Sequence[float],
    distance: Optional[float] = None,
    azimuth: float = 0.0,
    resolution: Tuple[int, int] = (800, 800),
    decode_threshold: float = 1.0,
    render_cfg: Optional[RenderConfig] = None,
    dump_dir: Optional[Union[str, Path]] = None,
    progress: bool = False,
    construction_time: Optional[float] = None,
) -> SweepReport:
    """
    Render the splats at each view angle and read the modules back.

    Args:
        splats: Marker splats (their plane is used for readback)
        truth: Expected module bits
        angles: Strictly increasing view angles in degrees, each in [0, 90)
        distance: Camera distance; plane diagonal x 3 when None
        azimuth: Camera azimuth in degrees
        resolution: (width, height) in pixels
        decode_threshold: Minimum bit accuracy for an angle to count as decodable
        render_cfg: Renderer settings
        dump_dir: If given, every frame is written there as frame_{theta}.ppm
        progress: Show a tqdm progress bar
        construction_time: Echoed into the report's timing field

    Returns:
        SweepReport
    """
    thetas = _validate_angles(angles)
    distance = distance if distance is not None else PLANE_DIAGONAL * DEFAULT_CONFIG["sweep"]["distance_factor"]
    render_cfg = render_cfg or RenderConfig()
    width, height = resolution
    grid_dims = (truth.width, truth.height)

    if dump_dir is not None:
        Path(dump_dir).mkdir(parents=True, exist_ok=True)

    records = []
    for theta in tqdm(thetas, desc="sweep", unit="view", disable=not progress):
        cam = make_camera(width, height, distance, theta, azimuth)
        frame = render(splats, cam, render_cfg)
        accuracy = bit_readback(frame, cam, splats.plane, grid_dims, truth)
        records.append(AngleRecord(theta=theta, bit_accuracy=accuracy, decodable=accuracy >= decode_threshold))
        logger.info("theta=%g: bit accuracy %.4f", theta, accuracy)
        if dump_dir is not None:
            write_image(frame.to_rgb(), Path(dump_dir) / f"frame_{theta:g}.ppm")

    config = {
        "distance": distance,
        "azimuth": azimuth,
        "resolution": [width, height],
        "decode_threshold": decode_threshold,
        "render": render_cfg.to_dict(),
        "approx": splats.meta.get("config"),
    }
    # worker count does not change the frames
    config["render"].pop("workers")
    return SweepReport(
        marker=str(splats.meta.get("marker", "")),
        config=config,
        records=records,
        primitive_count=len(splats),
        construction_time=construction_time,
    )


# ---------------------------------------------------------------------------
# Counts and timing
# ---------------------------------------------------------------------------

class CountReport(NamedTuple):
    primitive_count: int
    construction_time: float
    rect_count: int


def size_category(width: int) -> str:
    """Name of the smallest size category that fits a marker of ``width`` modules."""
    for limit, name in SIZE_CATEGORIES:
        if width <= limit:
            return name
    return "oversize"


def report_counts_and_time(
    grid: BitGrid,
    cfg: Union[None, ApproxConfig, Mapping[str, Any]] = None,
    colors: str = "both",
) -> CountReport:
    """
    Partition and splat generation under a monotonic timer, excluding I/O.

    ``cfg`` may be a finished ApproxConfig or a (partial) approx mapping; in
    the latter case unset levels are resolved from the partition, inside the
    timed region.
    """
    started = time.perf_counter()
    part = partition_marker(grid, colors)
    if not isinstance(cfg, ApproxConfig):
        cfg = ApproxConfig.from_dict(cfg, grid.width, grid.height, part.longest_side)
    splats = marker_to_splats(part, (grid.width, grid.height), cfg)
    elapsed = time.perf_counter() - started
    logger.info("%r: %d splat(s) from %d rect(s) in %.3fs", grid, len(splats), part.rect_count, elapsed)
    return CountReport(primitive_count=len(splats), construction_time=elapsed, rect_count=part.rect_count)


def summarize_counts(records: Iterable[Mapping[str, Any]]) -> Dict[str, Dict[str, Any]]:
    """
    Per-category means of primitive count and construction time.

    Each record needs ``category`` and ``primitive_count``; ``construction_time``
    is averaged when every record of the category has one.
    """
    grouped: Dict[str, List[Mapping[str, Any]]] = {}
    for record in records:
        grouped.setdefault(str(record["category"]), []).append(record)

    summary = {}
    for category in sorted(grouped):
        group = grouped[category]
        times = [r.get("construction_time") for r in group]
        summary[category] = {
            "markers": len(group),
            "mean_primitive_count": float(np.mean([r["primitive_count"] for r in group])),
            "mean_construction_time": (
                float(np.mean(times)) if all(t is not None for t in times) else None
            ),
        }
    return summary

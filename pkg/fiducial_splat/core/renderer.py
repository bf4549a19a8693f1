"""
CPU Splat Renderer

Renders planar 2D Gaussian splats through a pinhole camera:

    - every pixel casts a ray through its center (i + 0.5, j + 0.5)
    - each splat is evaluated at the ray/splat-plane intersection,
      alpha' = alpha * exp(-q / 2) with q the squared Mahalanobis radius,
      and contributes nothing beyond q > gamma^2
    - hits are sorted front to back by depth (ties by splat index) and
      alpha-blended until the transmittance drops below alpha_epsilon;
      what remains shows the background

Cameras follow the OpenCV convention: x right, y down, z forward, with
world-to-camera pose X_c = R X + t.

Splat/pixel pairs are generated per splat from its projected bounding box and
processed as flat numpy arrays. Compositing only ever touches one pixel at a
time per step, so splitting the image into row bands (``workers``) gives a
bit-identical result.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from ..utils.config import DEFAULT_CONFIG
from ..utils.error_handler import ConfigurationError, ValidationError, create_error_context
from .marker_io import ImageBuffer
from .splat_generator import Gaussian2D, Plane, SplatSet

logger = logging.getLogger(__name__)

PARALLEL_EPSILON = 1e-12
# Splat/pixel pairs evaluated per batch
PAIR_CHUNK = 1 << 22
# 2x2 plane spans this fraction of the smaller image side at theta = 0
DEFAULT_COVERAGE = 0.75


@dataclass(frozen=True)
class RenderConfig:
    background: float = 1.0
    gamma: float = 3.0
    alpha_epsilon: float = 1e-4
    workers: int = 1

    def __post_init__(self) -> None:
        context = create_error_context("RenderConfig", **self.to_dict())
        if not 0.0 <= self.background <= 1.0:
            raise ConfigurationError(f"background must be in [0, 1], got {self.background}", context)
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise ConfigurationError(f"gamma must be positive, got {self.gamma}", context)
        if not 0.0 < self.alpha_epsilon < 1.0:
            raise ConfigurationError(f"alpha_epsilon must be in (0, 1), got {self.alpha_epsilon}", context)
        if isinstance(self.workers, bool) or not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigurationError(f"workers must be an integer >= 1, got {self.workers!r}", context)

    @classmethod
    def from_dict(cls, values: Optional[Mapping[str, Any]] = None) -> "RenderConfig":
        merged = dict(DEFAULT_CONFIG["render"])
        merged.update(values or {})
        return cls(
            background=float(merged["background"]),
            gamma=float(merged["gamma"]),
            alpha_epsilon=float(merged["alpha_epsilon"]),
            workers=int(merged["workers"]),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "background": self.background,
            "gamma": self.gamma,
            "alpha_epsilon": self.alpha_epsilon,
            "workers": self.workers,
        }


class Pose(NamedTuple):
    """World-to-camera rotation and translation."""
    rotation: np.ndarray
    translation: np.ndarray


class Intrinsics(NamedTuple):
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int


@dataclass(frozen=True, eq=False)
class Camera:
    """Pinhole camera, X_c = rotation @ X + translation."""
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3).copy()
        translation = np.asarray(self.translation, dtype=np.float64).reshape(3).copy()
        context = create_error_context("Camera", width=self.width, height=self.height)
        if self.fx <= 0 or self.fy <= 0:
            raise ValidationError(f"Focal lengths must be positive, got ({self.fx}, {self.fy})", context)
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"Image size must be positive, got {self.width}x{self.height}", context)
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise ValidationError(f"Principal point ({self.cx}, {self.cy}) outside the image", context)
        if np.abs(rotation @ rotation.T - np.eye(3)).max() > 1e-9:
            raise ValidationError("Rotation must be orthonormal", context)
        rotation.setflags(write=False)
        translation.setflags(write=False)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def from_parts(cls, intrinsics: Intrinsics, pose: Pose) -> "Camera":
        return cls(
            fx=intrinsics.fx, fy=intrinsics.fy, cx=intrinsics.cx, cy=intrinsics.cy,
            width=intrinsics.width, height=intrinsics.height,
            rotation=pose.rotation, translation=pose.translation,
        )

    @property
    def intrinsics(self) -> Intrinsics:
        return Intrinsics(self.fx, self.fy, self.cx, self.cy, self.width, self.height)

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def center(self) -> np.ndarray:
        """Camera position in world coordinates."""
        return -self.rotation.T @ self.translation

    def pixel_ray(self, i: float, j: float) -> Tuple[np.ndarray, np.ndarray]:
        """Origin and unit direction of the ray through pixel (column i, row j)."""
        d_cam = np.array([(i + 0.5 - self.cx) / self.fx, (j + 0.5 - self.cy) / self.fy, 1.0])
        d_world = self.rotation.T @ d_cam
        return self.center, d_world / np.linalg.norm(d_world)


# ---------------------------------------------------------------------------
# Camera helpers
# ---------------------------------------------------------------------------

def pose_from_view(distance: float, view_angle: float, azimuth: float = 0.0) -> Pose:
    """
    Camera on a sphere around the plane origin, looking at the origin.

    view_angle is the angle between the optical axis and the plane normal
    (+z); azimuth rotates the camera about the normal. The marker's +y axis
    points up in the image.

    Raises:
        ValidationError: If view_angle is outside [0, 90) or distance <= 0
    """
    context = create_error_context("pose_from_view", view_angle=view_angle, distance=distance)
    if not 0.0 <= view_angle < 90.0:
        raise ValidationError(f"view angle must be in [0, 90), got {view_angle}", context)
    if distance <= 0:
        raise ValidationError(f"distance must be positive, got {distance}", context)

    theta, phi = np.radians(view_angle), np.radians(azimuth)
    center = distance * np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    forward = -center / np.linalg.norm(center)
    right = np.cross(forward, [0.0, 1.0, 0.0])
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward])
    return Pose(rotation=rotation, translation=-rotation @ center)


def default_camera(width: int, height: int, distance: float) -> Intrinsics:
    """Intrinsics under which the fronto-parallel 2x2 plane spans 75% of the smaller side."""
    focal = DEFAULT_COVERAGE * min(width, height) * distance / 2.0
    return Intrinsics(fx=focal, fy=focal, cx=width / 2.0, cy=height / 2.0, width=width, height=height)


def make_camera(width: int, height: int, distance: float, view_angle: float = 0.0, azimuth: float = 0.0) -> Camera:
    return Camera.from_parts(default_camera(width, height, distance), pose_from_view(distance, view_angle, azimuth))


def project_points(cam: Camera, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Project (N, 3) world points.

    Returns:
        (pixels, depth): (N, 2) continuous pixel coordinates, where pixel
        (i, j) has its center at (i + 0.5, j + 0.5), and (N,) camera depth.
        Points at or behind the camera get NaN pixels.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    cam_pts = pts @ cam.rotation.T + cam.translation
    depth = cam_pts[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        pixels = np.stack(
            [cam.fx * cam_pts[:, 0] / depth + cam.cx, cam.fy * cam_pts[:, 1] / depth + cam.cy], axis=1
        )
    pixels[depth <= 0] = np.nan
    return pixels, depth


def plane_homography(cam: Camera, plane: Plane) -> np.ndarray:
    """3x3 homography mapping plane coordinates (u, v, 1) to homogeneous pixels."""
    r = cam.rotation
    return cam.K @ np.column_stack([r @ plane.t_u, r @ plane.t_v, r @ plane.origin + cam.translation])


# ---------------------------------------------------------------------------
# Single-splat evaluation
# ---------------------------------------------------------------------------

def ray_splat_intersect(
    origin: np.ndarray, direction: np.ndarray, splat: Gaussian2D
) -> Optional[Tuple[float, float, float]]:
    """
    Intersect a ray with the splat's plane.

    Returns:
        (u, v, depth) with u, v along the splat tangents and depth the
        distance along the (unit) direction, or None when the ray is parallel
        to the plane or the hit lies behind the origin
    """
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    normal = splat.normal
    denom = float(direction @ normal)
    if abs(denom) < PARALLEL_EPSILON:
        return None
    depth = float((splat.center - origin) @ normal) / denom
    if depth <= 0:
        return None
    rel = origin + depth * direction - splat.center
    return float(rel @ splat.t_u), float(rel @ splat.t_v), depth


def splat_alpha(u: float, v: float, splat: Gaussian2D, cfg: RenderConfig) -> float:
    """Opacity modulated by the Gaussian, zero beyond the gamma cutoff."""
    q = (u / splat.s_u) ** 2 + (v / splat.s_v) ** 2
    if q > cfg.gamma ** 2:
        return 0.0
    return float(splat.opacity * np.exp(-0.5 * q))


# ---------------------------------------------------------------------------
# Rasterization
# ---------------------------------------------------------------------------

def _dot3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # fixed summation order keeps results independent of array size
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def _pixel_bounds(splats: SplatSet, cam: Camera, gamma: float) -> np.ndarray:
    """(N, 4) half-open pixel boxes [x0, x1) x [y0, y1) containing each splat's footprint."""
    n = len(splats)
    su = (gamma * splats.scales[:, 0])[:, None, None] * splats.t_u[:, None, :]
    sv = (gamma * splats.scales[:, 1])[:, None, None] * splats.t_v[:, None, :]
    signs = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    corners = (
        splats.centers[:, None, :]
        + signs[None, :, :1] * su
        + signs[None, :, 1:] * sv
    )
    pixels, depth = project_points(cam, corners.reshape(-1, 3))
    pixels = pixels.reshape(n, 4, 2)
    behind = (depth.reshape(n, 4) <= 1e-9).any(axis=1)

    with np.errstate(invalid="ignore"):
        lo = np.floor(np.nanmin(np.where(behind[:, None, None], 0.0, pixels), axis=1) - 0.5) - 1
        hi = np.ceil(np.nanmax(np.where(behind[:, None, None], 0.0, pixels), axis=1) - 0.5) + 2
    limits = np.array([cam.width, cam.height], dtype=np.float64)
    lo = np.clip(lo, 0, limits)
    hi = np.clip(hi, 0, limits)
    lo[behind] = 0
    hi[behind] = limits
    return np.column_stack([lo[:, 0], hi[:, 0], lo[:, 1], hi[:, 1]]).astype(np.int64)


def _gather(
    splats: SplatSet, cam: Camera, cfg: RenderConfig, bounds: np.ndarray, rows: Tuple[int, int]
) -> Tuple[np.ndarray, ...]:
    """All (pixel, depth, splat, alpha, color) entries with alpha > 0 inside a row band."""
    x0, x1 = bounds[:, 0], bounds[:, 1]
    y0 = np.maximum(bounds[:, 2], rows[0])
    y1 = np.minimum(bounds[:, 3], rows[1])
    widths = np.maximum(x1 - x0, 0)
    counts = widths * np.maximum(y1 - y0, 0)

    normals = splats.normals
    plane_offsets = _dot3(normals, splats.centers)
    origin = cam.center
    rot = cam.rotation
    gamma_sq = cfg.gamma ** 2

    active = np.flatnonzero(counts)
    pieces: List[Tuple[np.ndarray, ...]] = []
    start = 0
    while start < len(active):
        total = np.cumsum(counts[active[start:]])
        stop = start + max(1, int(np.searchsorted(total, PAIR_CHUNK, side="right")))
        chunk = active[start:stop]
        start = stop

        n_pairs = counts[chunk]
        k = np.repeat(chunk, n_pairs)
        local = np.arange(n_pairs.sum()) - np.repeat(np.cumsum(n_pairs) - n_pairs, n_pairs)
        px = x0[k] + local % widths[k]
        py = y0[k] + local // widths[k]

        dcx = (px + 0.5 - cam.cx) / cam.fx
        dcy = (py + 0.5 - cam.cy) / cam.fy
        direction = dcx[:, None] * rot[0] + dcy[:, None] * rot[1] + rot[2]

        n_k = normals[k]
        denom = _dot3(direction, n_k)
        with np.errstate(divide="ignore", invalid="ignore"):
            # depth along the camera axis, the ray direction has unit z in camera space
            depth = (plane_offsets[k] - _dot3(n_k, origin)) / denom
        ray_norm = np.sqrt(_dot3(direction, direction))
        hit = (np.abs(denom) >= PARALLEL_EPSILON * ray_norm) & (depth > 0)

        k, px, py, depth, direction = k[hit], px[hit], py[hit], depth[hit], direction[hit]
        rel = origin + depth[:, None] * direction - splats.centers[k]
        u = _dot3(rel, splats.t_u[k]) / splats.scales[k, 0]
        v = _dot3(rel, splats.t_v[k]) / splats.scales[k, 1]
        q = u * u + v * v
        inside = q <= gamma_sq
        k, px, py, depth, q = k[inside], px[inside], py[inside], depth[inside], q[inside]
        alpha = splats.opacities[k] * np.exp(-0.5 * q)
        keep = alpha > 0
        pieces.append((py[keep] * cam.width + px[keep], depth[keep], k[keep], alpha[keep]))

    if not pieces:
        empty_i = np.zeros(0, dtype=np.int64)
        return empty_i, np.zeros(0), empty_i, np.zeros(0)
    return tuple(np.concatenate(parts) for parts in zip(*pieces))


def _composite(
    entries: Tuple[np.ndarray, ...], colors: np.ndarray, cfg: RenderConfig, n_pixels: int, offset: int
) -> np.ndarray:
    pixel, depth, index, alpha = entries
    accum = np.zeros(n_pixels)
    transmittance = np.ones(n_pixels)
    if len(pixel):
        order = np.lexsort((index, depth, pixel))
        pixel = pixel[order] - offset
        alpha = alpha[order]
        color = colors[index[order]]

        first = np.r_[True, pixel[1:] != pixel[:-1]]
        starts = np.flatnonzero(first)
        rank = np.arange(len(pixel)) - starts[np.cumsum(first) - 1]
        by_rank = np.argsort(rank, kind="stable")
        edges = np.searchsorted(rank[by_rank], np.arange(rank.max() + 2))

        for r in range(len(edges) - 1):
            sel = by_rank[edges[r]:edges[r + 1]]
            p = pixel[sel]
            live = transmittance[p] >= cfg.alpha_epsilon
            sel, p = sel[live], p[live]
            if not len(p):
                continue
            a = alpha[sel]
            accum[p] += color[sel] * a * transmittance[p]
            transmittance[p] *= 1.0 - a

    return np.clip(accum + transmittance * cfg.background, 0.0, 1.0)


def render(splats: SplatSet, cam: Camera, cfg: Optional[RenderConfig] = None) -> ImageBuffer:
    """
    Rasterize a splat set to a grayscale image.

    Args:
        splats: Splats to draw
        cam: Pinhole camera
        cfg: Render configuration (defaults apply when None)

    Returns:
        ImageBuffer with one channel, samples in [0, 1]
    """
    cfg = cfg or RenderConfig()
    started = time.perf_counter()
    width, height = cam.width, cam.height

    if not len(splats):
        return ImageBuffer.filled(width, height, cfg.background)

    bounds = _pixel_bounds(splats, cam, cfg.gamma)
    bands = min(cfg.workers, height)
    cuts = np.linspace(0, height, bands + 1).round().astype(int)

    def band(i: int) -> np.ndarray:
        rows = (int(cuts[i]), int(cuts[i + 1]))
        entries = _gather(splats, cam, cfg, bounds, rows)
        return _composite(entries, splats.colors, cfg, (rows[1] - rows[0]) * width, rows[0] * width)

    if bands == 1:
        parts = [band(0)]
    else:
        with ThreadPoolExecutor(max_workers=bands) as pool:
            parts = list(pool.map(band, range(bands)))

    image = np.concatenate(parts).reshape(height, width)
    logger.debug(
        "rendered %d splat(s) at %dx%d in %.3fs", len(splats), width, height, time.perf_counter() - started
    )
    return ImageBuffer.from_array(image)

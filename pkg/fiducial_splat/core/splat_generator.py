"""
Rectangle to Gaussian Splat Expansion

Each rectangle with center c and half-sizes (s_x, s_y) becomes a multi-level
mixture of anisotropic Gaussians:

    level 0      one seed at c, sigma = (s_x, s_y) / gamma, replicated rho times
    level l >= 1 in every quadrant, a corner Gaussian at c +- d_l with
                 sigma = s / (gamma 2^l), d_l = s (1 - 2^-l), plus two arms of
                 2^(l-1) Gaussians each running from the mirror axes to the
                 corner

Every component's gamma-sigma box stays inside its rectangle. The component
layout scales linearly with (s_x, s_y), so it is computed once per level count
as a template in half-size units and applied to all rectangles at once.

Splats are placed on a marker plane and exported as binary PLY (the common
3D Gaussian splatting vertex layout) or as a plain JSON dump.
"""

import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Type, Union

import numpy as np
from plyfile import PlyData, PlyElement

from ..utils.config import DEFAULT_CONFIG, default_levels
from ..utils.error_handler import (
    ConfigurationError,
    DimensionError,
    FiducialSplatError,
    PlySchemaError,
    SplatFileError,
    ValidationError,
    create_error_context,
    handle_error,
    validate_file_path,
)
from .rect_partition import PartitionResult, Rect

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SH_C0 = 0.28209479177387814
OPACITY_LOGIT_CLAMP = 12.0
DEDUP_TOLERANCE = 1e-12
ORTHONORMAL_TOLERANCE = 1e-9
PLANE_TOLERANCE = 1e-9

PLY_PROPERTIES = [
    "x", "y", "z",
    "nx", "ny", "nz",
    "f_dc_0", "f_dc_1", "f_dc_2",
    "opacity",
    "scale_0", "scale_1",
    "rot_0", "rot_1", "rot_2", "rot_3",
]
SPLAT_FILE_SUFFIXES = [".ply", ".json"]
_PLY_COMMENT_PREFIX = "fiducial_splat "


@dataclass(frozen=True)
class ApproxConfig:
    """Parameters of the rectangle mixture."""
    levels: int = 3
    rho: int = 2
    gamma: float = 3.0
    dedup_mirrors: bool = True
    base_opacity: float = 0.999

    def __post_init__(self) -> None:
        context = create_error_context("ApproxConfig", **self.to_dict())
        if isinstance(self.levels, bool) or not isinstance(self.levels, int) or self.levels < 1:
            raise ConfigurationError(f"levels must be an integer >= 1, got {self.levels!r}", context)
        if isinstance(self.rho, bool) or not isinstance(self.rho, int) or self.rho < 1:
            raise ConfigurationError(f"rho must be an integer >= 1, got {self.rho!r}", context)
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise ConfigurationError(f"gamma must be positive, got {self.gamma!r}", context)
        if not 0.0 < self.base_opacity <= 1.0:
            raise ConfigurationError(f"base_opacity must be in (0, 1], got {self.base_opacity!r}", context)

    @classmethod
    def from_dict(
        cls,
        values: Optional[Mapping[str, Any]] = None,
        width: Optional[int] = None,
        height: Optional[int] = None,
        longest_side: int = 1,
    ) -> "ApproxConfig":
        """
        Build from the ``approx`` configuration section.

        ``levels: null`` is resolved with default_levels(width, height,
        longest_side); a marker size is then required.
        """
        merged = dict(DEFAULT_CONFIG["approx"])
        merged.update(values or {})
        levels = merged["levels"]
        if levels is None:
            if width is None or height is None:
                raise ConfigurationError(
                    "levels is unset and no marker size was given",
                    create_error_context("ApproxConfig.from_dict"),
                )
            levels = default_levels(width, height, longest_side)
        return cls(
            levels=levels,
            rho=merged["rho"],
            gamma=float(merged["gamma"]),
            dedup_mirrors=bool(merged["dedup_mirrors"]),
            base_opacity=float(merged["base_opacity"]),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "levels": self.levels,
            "rho": self.rho,
            "gamma": self.gamma,
            "dedup_mirrors": self.dedup_mirrors,
            "base_opacity": self.base_opacity,
        }


class PlanarComponent(NamedTuple):
    """One Gaussian of a rectangle mixture, in the rectangle's own frame."""
    mean: Tuple[float, float]
    sigma: Tuple[float, float]
    color: float
    opacity: float


def _check_frame(t_u: np.ndarray, t_v: np.ndarray, operation: str) -> None:
    norms = np.stack([np.linalg.norm(t_u, axis=-1), np.linalg.norm(t_v, axis=-1)])
    dots = np.einsum("...i,...i->...", t_u, t_v)
    if np.any(np.abs(norms - 1.0) > ORTHONORMAL_TOLERANCE) or np.any(np.abs(dots) > ORTHONORMAL_TOLERANCE):
        raise ValidationError("Tangent vectors must be orthonormal", create_error_context(operation))


@dataclass(frozen=True, eq=False)
class Plane:
    """Marker plane: origin plus orthonormal in-plane basis (u right, v up)."""
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    t_u: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    t_v: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))

    def __post_init__(self) -> None:
        for name in ("origin", "t_u", "t_v"):
            value = np.asarray(getattr(self, name), dtype=np.float64).reshape(3).copy()
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        _check_frame(self.t_u, self.t_v, "Plane")

    @property
    def normal(self) -> np.ndarray:
        return np.cross(self.t_u, self.t_v)

    def to_world(self, uv: np.ndarray) -> np.ndarray:
        """Map (N, 2) plane coordinates to (N, 3) world points."""
        uv = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
        return self.origin + uv[:, :1] * self.t_u + uv[:, 1:] * self.t_v

    def to_plane(self, points: np.ndarray) -> np.ndarray:
        """Project (N, 3) world points to (N, 2) plane coordinates."""
        rel = np.asarray(points, dtype=np.float64).reshape(-1, 3) - self.origin
        return np.stack([rel @ self.t_u, rel @ self.t_v], axis=1)

    def distance(self, points: np.ndarray) -> np.ndarray:
        rel = np.asarray(points, dtype=np.float64).reshape(-1, 3) - self.origin
        return np.abs(rel @ self.normal)

    def to_dict(self) -> Dict[str, List[float]]:
        return {"origin": self.origin.tolist(), "t_u": self.t_u.tolist(), "t_v": self.t_v.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Sequence[float]]) -> "Plane":
        return cls(origin=np.asarray(data["origin"]), t_u=np.asarray(data["t_u"]), t_v=np.asarray(data["t_v"]))


@dataclass(frozen=True, eq=False)
class Gaussian2D:
    """Planar oriented Gaussian: center, tangent frame, std-devs, gray color, opacity."""
    center: np.ndarray
    t_u: np.ndarray
    t_v: np.ndarray
    s_u: float
    s_v: float
    color: float
    opacity: float

    def __post_init__(self) -> None:
        for name in ("center", "t_u", "t_v"):
            value = np.asarray(getattr(self, name), dtype=np.float64).reshape(3).copy()
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        _check_frame(self.t_u, self.t_v, "Gaussian2D")
        if not (np.isfinite(self.s_u) and np.isfinite(self.s_v) and self.s_u > 0 and self.s_v > 0):
            raise ValidationError(
                f"Scales must be positive and finite, got ({self.s_u}, {self.s_v})",
                create_error_context("Gaussian2D"),
            )
        if not 0.0 <= self.color <= 1.0 or not 0.0 < self.opacity <= 1.0:
            raise ValidationError(
                f"color {self.color} or opacity {self.opacity} out of range",
                create_error_context("Gaussian2D"),
            )

    @property
    def normal(self) -> np.ndarray:
        return np.cross(self.t_u, self.t_v)


@dataclass(frozen=True, eq=False)
class SplatSet:
    """
    Ordered splats stored as parallel arrays.

    ``centers``, ``t_u``, ``t_v`` are (N, 3); ``scales`` is (N, 2) holding
    (s_u, s_v); ``colors`` and ``opacities`` are (N,).
    """
    centers: np.ndarray
    t_u: np.ndarray
    t_v: np.ndarray
    scales: np.ndarray
    colors: np.ndarray
    opacities: np.ndarray
    plane: Plane = field(default_factory=Plane)
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        shapes = {"centers": (-1, 3), "t_u": (-1, 3), "t_v": (-1, 3), "scales": (-1, 2), "colors": (-1,), "opacities": (-1,)}
        count = None
        for name, shape in shapes.items():
            value = np.asarray(getattr(self, name), dtype=np.float64).reshape(shape).copy()
            if count is None:
                count = value.shape[0]
            elif value.shape[0] != count:
                raise DimensionError(
                    f"SplatSet.{name} has {value.shape[0]} rows, expected {count}",
                    create_error_context("SplatSet"),
                )
            value.setflags(write=False)
            object.__setattr__(self, name, value)

        context = create_error_context("SplatSet", splats=count)
        _check_frame(self.t_u, self.t_v, "SplatSet")
        if not (np.isfinite(self.scales).all() and (self.scales > 0).all()):
            raise ValidationError("Scales must be positive and finite", context)
        if ((self.colors < 0) | (self.colors > 1)).any() or ((self.opacities <= 0) | (self.opacities > 1)).any():
            raise ValidationError("Colors must be in [0, 1] and opacities in (0, 1]", context)
        if count and self.plane.distance(self.centers).max() > PLANE_TOLERANCE:
            raise ValidationError("Splat centers must lie on the marker plane", context)

    @classmethod
    def empty(cls, plane: Optional[Plane] = None, meta: Optional[Dict[str, Any]] = None) -> "SplatSet":
        return cls(
            centers=np.zeros((0, 3)), t_u=np.zeros((0, 3)), t_v=np.zeros((0, 3)),
            scales=np.zeros((0, 2)), colors=np.zeros(0), opacities=np.zeros(0),
            plane=plane or Plane(), meta=dict(meta or {}),
        )

    @classmethod
    def from_gaussians(
        cls,
        splats: Sequence[Gaussian2D],
        plane: Optional[Plane] = None,
        meta: Optional[Dict[str, Any]] = None,
    ) -> "SplatSet":
        if not splats:
            return cls.empty(plane, meta)
        return cls(
            centers=np.stack([g.center for g in splats]),
            t_u=np.stack([g.t_u for g in splats]),
            t_v=np.stack([g.t_v for g in splats]),
            scales=np.array([[g.s_u, g.s_v] for g in splats]),
            colors=np.array([g.color for g in splats]),
            opacities=np.array([g.opacity for g in splats]),
            plane=plane or Plane(),
            meta=dict(meta or {}),
        )

    @property
    def normals(self) -> np.ndarray:
        return np.cross(self.t_u, self.t_v)

    @property
    def splats(self) -> List[Gaussian2D]:
        return list(self)

    def take(self, indices: Sequence[int]) -> "SplatSet":
        """New set with the splats at ``indices``, in that order."""
        idx = np.asarray(indices, dtype=np.int64)
        return SplatSet(
            centers=self.centers[idx], t_u=self.t_u[idx], t_v=self.t_v[idx],
            scales=self.scales[idx], colors=self.colors[idx], opacities=self.opacities[idx],
            plane=self.plane, meta=dict(self.meta),
        )

    def __len__(self) -> int:
        return int(self.centers.shape[0])

    def __getitem__(self, index: int) -> Gaussian2D:
        return Gaussian2D(
            center=self.centers[index], t_u=self.t_u[index], t_v=self.t_v[index],
            s_u=float(self.scales[index, 0]), s_v=float(self.scales[index, 1]),
            color=float(self.colors[index]), opacity=float(self.opacities[index]),
        )

    def __iter__(self) -> Iterator[Gaussian2D]:
        for i in range(len(self)):
            yield self[i]


# ---------------------------------------------------------------------------
# Mixture construction
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _mixture_template(levels: int, rho: int, dedup_mirrors: bool) -> Tuple[np.ndarray, np.ndarray]:
    """
    Component means and sigmas in half-size units, before dividing sigma by gamma.

    Returns:
        (means, sigmas), both (K, 2) arrays
    """
    means: List[Tuple[float, float]] = [(0.0, 0.0)] * rho
    sigmas: List[Tuple[float, float]] = [(1.0, 1.0)] * rho
    quadrants = ((1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0))

    for level in range(1, levels):
        d = 1.0 - 2.0 ** -level
        thin = 2.0 ** -level
        arms = 2 ** (level - 1)
        offsets = [i * d / arms for i in range(arms)]
        for qx, qy in quadrants:
            means.append((qx * d, qy * d))
            sigmas.append((thin, thin))
            for o in offsets:
                means.append((qx * o, qy * d))
                sigmas.append((1.0 - o, thin))
            for o in offsets:
                means.append((qx * d, qy * o))
                sigmas.append((thin, 1.0 - o))

    mean_arr = np.array(means, dtype=np.float64)
    sigma_arr = np.array(sigmas, dtype=np.float64)
    if dedup_mirrors:
        # the level-0 replicas are intentional, only mirrored copies go
        keep = list(range(rho))
        for i in range(rho, len(mean_arr)):
            kept = mean_arr[keep[rho:]] if len(keep) > rho else np.zeros((0, 2))
            if not len(kept) or np.abs(kept - mean_arr[i]).max(axis=1).min() > DEDUP_TOLERANCE:
                keep.append(i)
        mean_arr, sigma_arr = mean_arr[keep], sigma_arr[keep]

    mean_arr.setflags(write=False)
    sigma_arr.setflags(write=False)
    return mean_arr, sigma_arr


def components_per_rect(cfg: ApproxConfig) -> int:
    """Number of Gaussians each rectangle expands to under ``cfg``."""
    return len(_mixture_template(cfg.levels, cfg.rho, cfg.dedup_mirrors)[0])


def _expand(
    centers: np.ndarray, half_sizes: np.ndarray, cfg: ApproxConfig
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized expansion of (R, 2) centers and half-sizes to (R*K, 2) means and sigmas."""
    t_mean, t_sigma = _mixture_template(cfg.levels, cfg.rho, cfg.dedup_mirrors)
    means = centers[:, None, :] + half_sizes[:, None, :] * t_mean[None, :, :]
    sigmas = half_sizes[:, None, :] * t_sigma[None, :, :] / cfg.gamma
    return means.reshape(-1, 2), sigmas.reshape(-1, 2)


def rect_to_gaussians(r: Rect, cfg: ApproxConfig) -> List[PlanarComponent]:
    """
    Expand one rectangle into its Gaussian mixture.

    Means and sigmas are in the rectangle's own coordinate frame (the lattice
    units of ``r``). The seed comes first (rho copies), followed by each
    level's quadrants in the order (+,+), (-,+), (-,-), (+,-).
    """
    center = np.array([[(r.x0 + r.x1) / 2.0, (r.y0 + r.y1) / 2.0]])
    half = np.array([[r.width / 2.0, r.height / 2.0]])
    means, sigmas = _expand(center, half, cfg)
    return [
        PlanarComponent(
            mean=(float(m[0]), float(m[1])),
            sigma=(float(s[0]), float(s[1])),
            color=r.intensity,
            opacity=cfg.base_opacity,
        )
        for m, s in zip(means, sigmas)
    ]


def marker_to_splats(
    part: PartitionResult,
    grid_dims: Tuple[int, int],
    cfg: ApproxConfig,
    plane: Optional[Plane] = None,
    marker_id: Optional[str] = None,
) -> SplatSet:
    """
    Place every rectangle of a partition on the 2x2 marker plane.

    The grid is centered on the plane origin with cell side 2 / max(width,
    height); row 0 is the top edge (+v) and column 0 the left edge (-u).

    Args:
        part: Partition of the marker
        grid_dims: (width, height) of the marker grid
        cfg: Mixture parameters
        plane: Target plane, the z = 0 plane through the origin by default
        marker_id: Label stored in the set's metadata

    Raises:
        DimensionError: If the partition was computed on a different grid size
    """
    width, height = grid_dims
    if (part.width, part.height) != (width, height):
        raise DimensionError(
            f"Partition is {part.width}x{part.height}, grid is {width}x{height}",
            create_error_context("marker_to_splats"),
        )
    plane = plane or Plane()
    meta = {
        "marker": marker_id or "",
        "width": width,
        "height": height,
        "rects": part.rect_count,
        "partition": part.method,
        "config": cfg.to_dict(),
    }
    rects = part.rects
    if not rects:
        return SplatSet.empty(plane, meta)

    cell = 2.0 / max(width, height)
    boxes = np.array([[r.x0, r.y0, r.x1, r.y1] for r in rects], dtype=np.float64)
    centers = np.stack(
        [
            ((boxes[:, 0] + boxes[:, 2]) / 2.0 - width / 2.0) * cell,
            (height / 2.0 - (boxes[:, 1] + boxes[:, 3]) / 2.0) * cell,
        ],
        axis=1,
    )
    half_sizes = np.stack([(boxes[:, 2] - boxes[:, 0]), (boxes[:, 3] - boxes[:, 1])], axis=1) * (cell / 2.0)

    uv, sigmas = _expand(centers, half_sizes, cfg)
    per_rect = components_per_rect(cfg)
    count = len(uv)
    colors = np.repeat(np.array([r.intensity for r in rects]), per_rect)

    splats = SplatSet(
        centers=plane.to_world(uv),
        t_u=np.broadcast_to(plane.t_u, (count, 3)),
        t_v=np.broadcast_to(plane.t_v, (count, 3)),
        scales=sigmas,
        colors=colors,
        opacities=np.full(count, cfg.base_opacity),
        plane=plane,
        meta=meta,
    )
    logger.info("expanded %d rect(s) into %d splat(s)", len(rects), count)
    return splats


# ---------------------------------------------------------------------------
# PLY / JSON
# ---------------------------------------------------------------------------

def _frames_to_quaternions(t_u: np.ndarray, t_v: np.ndarray) -> np.ndarray:
    """(N, 4) unit quaternions (w, x, y, z) for rotations with columns (t_u, t_v, t_u x t_v)."""
    m = np.stack([t_u, t_v, np.cross(t_u, t_v)], axis=2)
    n = m.shape[0]
    q = np.zeros((n, 4))
    trace = m[:, 0, 0] + m[:, 1, 1] + m[:, 2, 2]

    case_w = trace > 0
    case_x = ~case_w & (m[:, 0, 0] > m[:, 1, 1]) & (m[:, 0, 0] > m[:, 2, 2])
    case_y = ~case_w & ~case_x & (m[:, 1, 1] > m[:, 2, 2])
    case_z = ~(case_w | case_x | case_y)

    k = case_w
    s = np.sqrt(trace[k] + 1.0) * 2.0
    q[k] = np.stack([0.25 * s, (m[k, 2, 1] - m[k, 1, 2]) / s, (m[k, 0, 2] - m[k, 2, 0]) / s, (m[k, 1, 0] - m[k, 0, 1]) / s], axis=1)
    k = case_x
    s = np.sqrt(1.0 + m[k, 0, 0] - m[k, 1, 1] - m[k, 2, 2]) * 2.0
    q[k] = np.stack([(m[k, 2, 1] - m[k, 1, 2]) / s, 0.25 * s, (m[k, 0, 1] + m[k, 1, 0]) / s, (m[k, 0, 2] + m[k, 2, 0]) / s], axis=1)
    k = case_y
    s = np.sqrt(1.0 + m[k, 1, 1] - m[k, 0, 0] - m[k, 2, 2]) * 2.0
    q[k] = np.stack([(m[k, 0, 2] - m[k, 2, 0]) / s, (m[k, 0, 1] + m[k, 1, 0]) / s, 0.25 * s, (m[k, 1, 2] + m[k, 2, 1]) / s], axis=1)
    k = case_z
    s = np.sqrt(1.0 + m[k, 2, 2] - m[k, 0, 0] - m[k, 1, 1]) * 2.0
    q[k] = np.stack([(m[k, 1, 0] - m[k, 0, 1]) / s, (m[k, 0, 2] + m[k, 2, 0]) / s, (m[k, 1, 2] + m[k, 2, 1]) / s, 0.25 * s], axis=1)
    return q


def _quaternions_to_frames(q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    q = q / np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q.T
    t_u = np.stack([1 - 2 * (y * y + z * z), 2 * (x * y + w * z), 2 * (x * z - w * y)], axis=1)
    t_v = np.stack([2 * (x * y - w * z), 1 - 2 * (x * x + z * z), 2 * (y * z + w * x)], axis=1)
    return t_u, t_v


def _inverse_sigmoid(alpha: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        logits = np.log(alpha) - np.log1p(-alpha)
    return np.minimum(logits, OPACITY_LOGIT_CLAMP)


def export_ply(splats: SplatSet, path: PathLike) -> None:
    """
    Write a binary little-endian PLY with one vertex per splat.

    Properties: x y z, nx ny nz (splat normal), f_dc_0..2 (gray DC
    coefficient), opacity (logit, clamped at +12), scale_0 scale_1 (log
    std-devs), rot_0..3 (quaternion w x y z of the frame t_u, t_v, normal).
    The marker plane and metadata ride along as header comments.
    """
    validate_file_path(str(path), "export_ply")
    context = create_error_context("export_ply", file_path=str(path), format="ply")

    n = len(splats)
    vertices = np.empty(n, dtype=[(name, "f4") for name in PLY_PROPERTIES])
    dc = (splats.colors - 0.5) / SH_C0
    columns = np.column_stack([
        splats.centers,
        splats.normals,
        dc, dc, dc,
        _inverse_sigmoid(splats.opacities),
        np.log(splats.scales),
        _frames_to_quaternions(splats.t_u, splats.t_v),
    ]) if n else np.zeros((0, len(PLY_PROPERTIES)))
    for i, name in enumerate(PLY_PROPERTIES):
        vertices[name] = columns[:, i]

    comments = [
        _PLY_COMMENT_PREFIX + "plane " + json.dumps(splats.plane.to_dict(), sort_keys=True),
        _PLY_COMMENT_PREFIX + "meta " + json.dumps(splats.meta, sort_keys=True),
    ]
    try:
        PlyData([PlyElement.describe(vertices, "vertex")], byte_order="<", comments=comments).write(str(path))
    except OSError as e:
        raise handle_error(e, context)
    logger.debug("wrote %d splat(s) to %s", n, path)


def _ply_comment(comments: Sequence[str], key: str) -> Optional[Any]:
    prefix = f"{_PLY_COMMENT_PREFIX}{key} "
    for comment in comments:
        if comment.startswith(prefix):
            return json.loads(comment[len(prefix):])
    return None


def import_ply(path: PathLike) -> SplatSet:
    """
    Read a PLY in the export_ply schema.

    Centers are snapped onto the recorded marker plane, which absorbs the
    float32 storage error. Files without the plane comment use the plane
    of the first splat.

    Raises:
        PlySchemaError: Listing the missing vertex properties
    """
    validate_file_path(str(path), "import_ply")
    context = create_error_context("import_ply", file_path=str(path), format="ply")
    try:
        ply = PlyData.read(str(path))
    except OSError as e:
        raise handle_error(e, context)
    except Exception as e:
        raise SplatFileError(f"Cannot parse PLY: {e}", context)

    if "vertex" not in [element.name for element in ply.elements]:
        raise PlySchemaError(["vertex"], context)
    vertex = ply["vertex"]
    present = {prop.name for prop in vertex.properties}
    missing = [name for name in PLY_PROPERTIES if name not in present and not name.startswith("n")]
    if missing:
        raise PlySchemaError(missing, context)

    def column(name: str) -> np.ndarray:
        return np.asarray(vertex[name], dtype=np.float64)

    centers = np.stack([column("x"), column("y"), column("z")], axis=1)
    t_u, t_v = _quaternions_to_frames(np.stack([column(f"rot_{i}") for i in range(4)], axis=1))
    scales = np.exp(np.stack([column("scale_0"), column("scale_1")], axis=1))
    colors = np.clip(column("f_dc_0") * SH_C0 + 0.5, 0.0, 1.0)
    opacities = 1.0 / (1.0 + np.exp(-column("opacity")))

    plane_data = _ply_comment(ply.comments, "plane")
    if plane_data is not None:
        plane = Plane.from_dict(plane_data)
    elif len(centers):
        plane = Plane(origin=centers[0], t_u=t_u[0], t_v=t_v[0])
    else:
        plane = Plane()
    if len(centers):
        centers = plane.to_world(plane.to_plane(centers))

    meta = _ply_comment(ply.comments, "meta") or {}
    try:
        return SplatSet(centers=centers, t_u=t_u, t_v=t_v, scales=scales, colors=colors,
                        opacities=opacities, plane=plane, meta=meta)
    except (ValidationError, DimensionError) as e:
        raise SplatFileError(f"Invalid splats in PLY: {e}", context)


def export_json(splats: SplatSet, path: PathLike) -> None:
    """Write one plain JSON record per splat, plus the plane and metadata."""
    validate_file_path(str(path), "export_json")
    context = create_error_context("export_json", file_path=str(path), format="json")
    records = [
        {
            "center": splats.centers[i].tolist(),
            "t_u": splats.t_u[i].tolist(),
            "t_v": splats.t_v[i].tolist(),
            "scale": splats.scales[i].tolist(),
            "color": float(splats.colors[i]),
            "opacity": float(splats.opacities[i]),
        }
        for i in range(len(splats))
    ]
    document = {"meta": splats.meta, "plane": splats.plane.to_dict(), "splats": records}
    try:
        Path(path).write_text(json.dumps(document, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    except OSError as e:
        raise handle_error(e, context)


def import_json(path: PathLike) -> SplatSet:
    """Inverse of export_json; exact for values written by it."""
    validate_file_path(str(path), "import_json")
    context = create_error_context("import_json", file_path=str(path), format="json")
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise handle_error(e, context)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise SplatFileError(f"Invalid splat JSON: {e}", context)

    try:
        plane = Plane.from_dict(document["plane"]) if "plane" in document else Plane()
        records = document["splats"]
        if not records:
            return SplatSet.empty(plane, document.get("meta"))
        return SplatSet(
            centers=np.array([r["center"] for r in records]),
            t_u=np.array([r["t_u"] for r in records]),
            t_v=np.array([r["t_v"] for r in records]),
            scales=np.array([r["scale"] for r in records]),
            colors=np.array([r["color"] for r in records]),
            opacities=np.array([r["opacity"] for r in records]),
            plane=plane,
            meta=document.get("meta") or {},
        )
    except (KeyError, TypeError, ValueError, ValidationError, DimensionError) as e:
        raise SplatFileError(f"Malformed splat JSON: {e}", context)


def _suffix(path: PathLike, operation: str, error: Type[FiducialSplatError]) -> str:
    suffix = Path(path).suffix.lower()
    if suffix not in SPLAT_FILE_SUFFIXES:
        raise error(
            f"Unsupported splat file extension '{suffix}'. Allowed: {SPLAT_FILE_SUFFIXES}",
            create_error_context(operation, file_path=str(path)),
        )
    return suffix


def save_splats(splats: SplatSet, path: PathLike) -> None:
    """
    Write .ply or .json depending on the extension.

    Raises:
        ValidationError: On any other extension
    """
    if _suffix(path, "save_splats", ValidationError) == ".ply":
        export_ply(splats, path)
    else:
        export_json(splats, path)


def load_splats(path: PathLike) -> SplatSet:
    """
    Read .ply or .json depending on the extension.

    Raises:
        SplatFileError: On any other extension or unreadable contents
    """
    if _suffix(path, "load_splats", SplatFileError) == ".ply":
        return import_ply(path)
    return import_json(path)

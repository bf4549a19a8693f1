#!/usr/bin/env python3
"""
Command-line interface for Fiducial Splat.

Subcommands:
    partition   marker -> rectangle partition (JSON)
    generate    marker -> splat file (.ply / .json)
    render      splat file -> PGM image
    sweep       splat file + truth marker -> viewing-angle report (JSON)
    metrics     two images -> PSNR / SSIM (and optional bit accuracy)
    counts      markers -> primitive counts and construction times

Exit codes: 0 success, 1 I/O or data error, 2 usage or configuration error.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .core.harness import (
    angle_sweep,
    bit_readback,
    image_metrics,
    report_counts_and_time,
    size_category,
    summarize_counts,
)
from .core.marker_io import load_bitgrid, read_image, write_image
from .core.rect_partition import partition_marker
from .core.renderer import RenderConfig, make_camera, render
from .core.splat_generator import ApproxConfig, Plane, load_splats, marker_to_splats, save_splats
from .utils.config import load_config
from .utils.error_handler import ConfigurationError, FiducialSplatError, ValidationError
from .utils.logging_setup import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {value!r}")


def _parse_resolution(value: str) -> Tuple[int, int]:
    try:
        width, height = (int(part) for part in value.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {value!r}")
    if width < 1 or height < 1:
        raise argparse.ArgumentTypeError(f"resolution must be positive, got {value!r}")
    return width, height


def parse_angles(spec: str) -> List[float]:
    """
    Expand START:STOP:STEP into a list of angles.

    START is always included, STOP only when it lies on the step grid.

    Raises:
        ConfigurationError: On malformed ranges or a non-positive step
    """
    try:
        start, stop, step = (float(part) for part in spec.split(":"))
    except ValueError:
        raise ConfigurationError(f"Angle range must be START:STOP:STEP, got {spec!r}")
    if step <= 0:
        raise ConfigurationError(f"Angle step must be positive, got {step:g}")
    if stop < start:
        raise ConfigurationError(f"Angle range is empty: {spec!r}")
    count = int((stop - start) / step + 1e-9) + 1
    return [round(start + i * step, 9) for i in range(count)]


def _emit(record: Dict[str, Any]) -> None:
    print(json.dumps(record, sort_keys=True))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_partition(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    grid = load_bitgrid(args.input)
    colors = args.colors or config["partition"]["colors"]
    result = partition_marker(grid, colors)
    if args.out:
        Path(args.out).write_text(result.to_json(), encoding="utf-8")
    print(f"components: {len(result.components)}")
    print(f"rects: {result.rect_count}")
    return EXIT_OK


def _approx_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {
        "levels": args.levels,
        "rho": args.rho,
        "gamma": args.gamma,
        "base_opacity": args.opacity,
        "dedup_mirrors": args.dedup,
    }
    return {key: value for key, value in overrides.items() if value is not None}


def cmd_generate(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    grid = load_bitgrid(args.input)
    approx = dict(config["approx"])
    approx.update(_approx_overrides(args))
    colors = args.colors or config["partition"]["colors"]

    started = time.perf_counter()
    part = partition_marker(grid, colors)
    cfg = ApproxConfig.from_dict(approx, grid.width, grid.height, part.longest_side)
    splats = marker_to_splats(part, (grid.width, grid.height), cfg, marker_id=Path(args.input).stem)
    elapsed = time.perf_counter() - started

    save_splats(splats, args.out)
    print(f"rects: {part.rect_count}")
    print(f"splats: {len(splats)}")
    if not args.no_timing:
        print(f"construction_time: {elapsed:.3f}s")
    return EXIT_OK


def _render_config(args: argparse.Namespace, config: Dict[str, Any]) -> RenderConfig:
    values = dict(config["render"])
    if getattr(args, "bg", None) is not None:
        values["background"] = args.bg
    if getattr(args, "workers", None) is not None:
        values["workers"] = args.workers
    return RenderConfig.from_dict(values)


def _distance(args: argparse.Namespace, config: Dict[str, Any]) -> float:
    if args.distance is not None:
        return args.distance
    return 2.0 * 2.0 ** 0.5 * config["sweep"]["distance_factor"]


def cmd_render(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    splats = load_splats(args.splats)
    width, height = args.res or tuple(config["sweep"]["resolution"])
    phi = args.phi if args.phi is not None else config["sweep"]["azimuth"]
    cam = make_camera(width, height, _distance(args, config), args.theta, phi)
    image = render(splats, cam, _render_config(args, config))
    write_image(image if not args.out.lower().endswith(".ppm") else image.to_rgb(), args.out)
    print(f"image: {args.out} ({width}x{height})")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    angles = parse_angles(args.angles)
    splats = load_splats(args.splats)
    truth = load_bitgrid(args.truth)
    resolution = args.res or tuple(config["sweep"]["resolution"])
    threshold = args.threshold if args.threshold is not None else config["sweep"]["decode_threshold"]
    phi = args.phi if args.phi is not None else config["sweep"]["azimuth"]

    report = angle_sweep(
        splats,
        truth,
        angles,
        distance=_distance(args, config),
        azimuth=phi,
        resolution=resolution,
        decode_threshold=threshold,
        render_cfg=_render_config(args, config),
        dump_dir=args.dump_frames,
        progress=args.progress,
    )
    text = report.to_json(include_timing=not args.no_timing)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    theta = report.theta_decode
    # keep stdout pure JSON when the report goes there
    summary = sys.stdout if args.report else sys.stderr
    print(f"theta_decode: {'none' if theta is None else f'{theta:g}'}", file=summary)
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    ref = read_image(args.ref)
    test = read_image(args.test)
    accuracy: Optional[float] = None
    if args.truth:
        truth = load_bitgrid(args.truth)
        phi = args.phi if args.phi is not None else config["sweep"]["azimuth"]
        cam = make_camera(test.width, test.height, _distance(args, config), args.theta, phi)
        accuracy = bit_readback(test, cam, Plane(), (truth.width, truth.height), truth)
    _emit(image_metrics(ref, test, accuracy))
    return EXIT_OK


def cmd_counts(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    records = []
    for path in args.input:
        grid = load_bitgrid(path)
        approx = dict(config["approx"])
        approx.update(_approx_overrides(args))
        report = report_counts_and_time(grid, approx, args.colors or config["partition"]["colors"])
        record: Dict[str, Any] = {
            "marker": Path(path).stem,
            "category": args.category or size_category(grid.width),
            "rect_count": report.rect_count,
            "primitive_count": report.primitive_count,
        }
        if not args.no_timing:
            record["construction_time"] = report.construction_time
        records.append(record)
        _emit(record)
    _emit({"summary": summarize_counts(records)})
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_approx_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--levels", type=int, help="Refinement levels L (default: by marker size)")
    parser.add_argument("--rho", type=int, help="Level-0 replication factor")
    parser.add_argument("--gamma", type=float, help="Gaussian cutoff radius")
    parser.add_argument("--opacity", type=float, help="Base opacity of every splat")
    parser.add_argument("--dedup", type=_parse_bool, help="Drop mirrored duplicate components (true/false)")
    parser.add_argument("--colors", choices=["dark", "both"], help="Components to partition")


def _add_view_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--phi", type=float, help="Camera azimuth in degrees")
    parser.add_argument("--distance", type=float, help="Camera distance (default: plane diagonal x 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiducial-splat",
        description="Compile binary fiducial markers into 2D Gaussian splats",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="YAML configuration file")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--no-color", action="store_true", help="Disable colored log output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="Minimum rectangle partition of a marker")
    p.add_argument("--input", required=True, help="Marker file (PBM or textgrid)")
    p.add_argument("--colors", choices=["dark", "both"])
    p.add_argument("--out", help="Write the partition JSON here")
    p.set_defaults(handler=cmd_partition)

    p = sub.add_parser("generate", help="Generate splats from a marker")
    p.add_argument("--input", required=True, help="Marker file (PBM or textgrid)")
    p.add_argument("--out", required=True, help="Output .ply or .json")
    p.add_argument("--no-timing", action="store_true", help="Omit the construction time")
    _add_approx_flags(p)
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("render", help="Render a splat file")
    p.add_argument("--splats", required=True)
    p.add_argument("--theta", type=float, default=0.0, help="View angle in degrees, [0, 90)")
    p.add_argument("--res", type=_parse_resolution, help="WxH")
    p.add_argument("--bg", type=float, help="Background gray level")
    p.add_argument("--workers", type=int, help="Row bands rendered in parallel")
    p.add_argument("--out", required=True, help="Output .pgm or .ppm")
    _add_view_flags(p)
    p.set_defaults(handler=cmd_render)

    p = sub.add_parser("sweep", help="Viewing-angle readability sweep")
    p.add_argument("--splats", required=True)
    p.add_argument("--truth", required=True, help="Marker file with the expected bits")
    p.add_argument("--angles", default="0:85:5", help="START:STOP:STEP in degrees")
    p.add_argument("--res", type=_parse_resolution, help="WxH")
    p.add_argument("--threshold", type=float, help="Bit accuracy needed to count as decodable")
    p.add_argument("--report", help="Write the JSON report here (default: stdout)")
    p.add_argument("--dump-frames", help="Directory for frame_{theta}.ppm files")
    p.add_argument("--workers", type=int, help="Row bands rendered in parallel")
    p.add_argument("--no-timing", action="store_true", help="Omit timing fields")
    p.add_argument("--progress", action="store_true", help="Show a progress bar")
    _add_view_flags(p)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("metrics", help="PSNR / SSIM between two images")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--truth", help="Marker file; adds bit accuracy of --test")
    p.add_argument("--theta", type=float, default=0.0, help="View angle --test was rendered at")
    _add_view_flags(p)
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser("counts", help="Primitive counts and construction time")
    p.add_argument("--input", required=True, nargs="+", help="Marker files")
    p.add_argument("--category", help="Category label (default: by marker size)")
    p.add_argument("--no-timing", action="store_true", help="Omit timing fields")
    _add_approx_flags(p)
    p.set_defaults(handler=cmd_counts)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, use_color=False if args.no_color else None)

    try:
        config = load_config(args.config)
        return args.handler(args, config)
    except (ConfigurationError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FiducialSplatError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

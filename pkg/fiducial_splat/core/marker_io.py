"""
Marker and Image I/O

This module reads binary marker bitmaps (PBM and the plain-text "textgrid"
format), synthesizes small canonical test grids, and reads/writes 8-bit
PGM/PPM images.

Polarity: a BitGrid cell is 1 for a dark module and 0 for a light one, the
PBM convention. Row 0 is the top row of the marker.
"""

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..utils.error_handler import (
    DimensionError,
    ImageFormatError,
    MarkerParseError,
    ValidationError,
    create_error_context,
    handle_error,
    validate_file_path,
    validate_format,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

BITGRID_FORMATS = ["pbm-ascii", "pbm-binary", "textgrid"]
IMAGE_FORMATS = ["pgm-binary", "ppm-binary"]
TEST_GRID_KINDS = ["solid", "checker", "plus", "l_tromino", "ring"]

_MIN_TEST_GRID_SIZE = {"solid": 1, "checker": 1, "plus": 3, "l_tromino": 2, "ring": 3}
_PNM_MAGIC = {b"P1": "pbm-ascii", b"P4": "pbm-binary", b"P5": "pgm-binary", b"P6": "ppm-binary"}


@dataclass(frozen=True, eq=False)
class BitGrid:
    """Binary marker raster, ``cells[row, col]`` with 1 = dark module."""
    width: int
    height: int
    cells: np.ndarray

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise DimensionError(
                f"BitGrid must be at least 1x1, got {self.width}x{self.height}",
                create_error_context("BitGrid", width=self.width, height=self.height),
            )
        cells = np.asarray(self.cells)
        if cells.size != self.width * self.height:
            raise DimensionError(
                f"BitGrid has {cells.size} cells, expected {self.width * self.height}",
                create_error_context("BitGrid", width=self.width, height=self.height),
            )
        cells = cells.reshape(self.height, self.width)
        if not np.isin(cells, (0, 1)).all():
            raise ValidationError(
                "BitGrid cells must be 0 or 1",
                create_error_context("BitGrid"),
            )
        frozen = cells.astype(np.uint8, copy=True)
        frozen.setflags(write=False)
        object.__setattr__(self, "cells", frozen)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "BitGrid":
        """Build a grid from a 2-D array of 0/1 values (row 0 = top)."""
        array = np.asarray(array)
        if array.ndim != 2:
            raise DimensionError(
                f"Expected a 2-D array, got shape {array.shape}",
                create_error_context("BitGrid.from_array"),
            )
        return cls(width=array.shape[1], height=array.shape[0], cells=array)

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> "BitGrid":
        """Build a grid from textgrid rows such as ``["10", "01"]``."""
        return parse_textgrid("\n".join(rows))

    def to_array(self) -> np.ndarray:
        """Writable uint8 copy of the cells."""
        return self.cells.copy()

    def to_text(self) -> str:
        """Serialize in the textgrid format, one row per line."""
        return "".join("".join(str(int(v)) for v in row) + "\n" for row in self.cells)

    def count(self, color: int = 1) -> int:
        return int(np.count_nonzero(self.cells == color))

    def __getitem__(self, index: Tuple[int, int]) -> int:
        return int(self.cells[index])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitGrid):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.cells, other.cells)
        )

    def __hash__(self) -> int:
        return hash((self.width, self.height, self.cells.tobytes()))

    def __repr__(self) -> str:
        return f"BitGrid({self.width}x{self.height}, dark={self.count(1)})"


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """Grayscale (channels=1) or RGB (channels=3) image with samples in [0, 1]."""
    width: int
    height: int
    channels: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.channels not in (1, 3):
            raise ImageFormatError(
                f"channels must be 1 or 3, got {self.channels}",
                create_error_context("ImageBuffer"),
            )
        samples = np.asarray(self.samples, dtype=np.float64)
        shape = (self.height, self.width) if self.channels == 1 else (self.height, self.width, 3)
        if samples.size != int(np.prod(shape)):
            raise DimensionError(
                f"ImageBuffer has {samples.size} samples, expected shape {shape}",
                create_error_context("ImageBuffer"),
            )
        samples = samples.reshape(shape)
        if not np.isfinite(samples).all() or samples.min(initial=0.0) < 0.0 or samples.max(initial=0.0) > 1.0:
            raise ValidationError(
                "ImageBuffer samples must be finite and within [0, 1]",
                create_error_context("ImageBuffer"),
            )
        frozen = samples.copy()
        frozen.setflags(write=False)
        object.__setattr__(self, "samples", frozen)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "ImageBuffer":
        array = np.asarray(array, dtype=np.float64)
        if array.ndim == 2:
            return cls(width=array.shape[1], height=array.shape[0], channels=1, samples=array)
        if array.ndim == 3 and array.shape[2] == 3:
            return cls(width=array.shape[1], height=array.shape[0], channels=3, samples=array)
        raise DimensionError(
            f"Unsupported image array shape {array.shape}",
            create_error_context("ImageBuffer.from_array"),
        )

    @classmethod
    def filled(cls, width: int, height: int, value: float, channels: int = 1) -> "ImageBuffer":
        shape = (height, width) if channels == 1 else (height, width, 3)
        return cls(width=width, height=height, channels=channels, samples=np.full(shape, value))

    def to_gray(self) -> np.ndarray:
        """Luminance (0.299, 0.587, 0.114) for RGB, the samples themselves for gray."""
        if self.channels == 1:
            return self.samples.copy()
        return self.samples @ np.array([0.299, 0.587, 0.114])

    def to_rgb(self) -> "ImageBuffer":
        if self.channels == 3:
            return self
        return ImageBuffer.from_array(np.repeat(self.samples[:, :, None], 3, axis=2))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.channels == other.channels and np.array_equal(self.samples, other.samples)

    def __hash__(self) -> int:
        return hash((self.width, self.height, self.channels, self.samples.tobytes()))


# ---------------------------------------------------------------------------
# textgrid
# ---------------------------------------------------------------------------

def parse_textgrid(text: str, file_path: Optional[str] = None) -> BitGrid:
    """
    Parse textgrid content: lines of '0'/'1' characters, all the same length.

    Raises:
        MarkerParseError: On any other character (with line and column)
        DimensionError: On ragged rows or empty input
    """
    context = create_error_context("load_bitgrid", file_path=file_path, format="textgrid")
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DimensionError("textgrid is empty", context)

    rows: List[List[int]] = []
    for line_no, line in enumerate(lines, start=1):
        row = []
        for col, char in enumerate(line):
            if char not in "01":
                raise MarkerParseError(
                    f"Unexpected character {char!r} in textgrid",
                    context,
                    line=line_no,
                    offset=col,
                )
            row.append(1 if char == "1" else 0)
        if rows and len(row) != len(rows[0]):
            raise DimensionError(
                f"Ragged textgrid: line {line_no} has {len(row)} cells, expected {len(rows[0])}",
                context,
            )
        rows.append(row)

    if not rows[0]:
        raise DimensionError("textgrid has empty rows", context)
    return BitGrid.from_array(np.array(rows, dtype=np.uint8))


# ---------------------------------------------------------------------------
# PNM header handling
# ---------------------------------------------------------------------------

def _read_pnm_header(data: bytes, n_fields: int, context) -> Tuple[bytes, List[int], int]:
    """
    Tokenize a PNM header: magic, then ``n_fields`` integers, skipping comments.

    Returns:
        (magic, fields, raster_offset) where raster_offset is the byte index
        after the single whitespace that terminates the header
    """
    pos = 0
    line = 1

    def skip_space() -> None:
        nonlocal pos, line
        while pos < len(data):
            ch = data[pos:pos + 1]
            if ch == b"#":
                while pos < len(data) and data[pos:pos + 1] != b"\n":
                    pos += 1
            elif ch.isspace():
                if ch == b"\n":
                    line += 1
                pos += 1
            else:
                break

    magic = data[:2]
    if magic not in _PNM_MAGIC:
        raise MarkerParseError(f"Unknown magic number {magic!r}", context, line=1, offset=0)
    pos = 2

    fields: List[int] = []
    for _ in range(n_fields):
        skip_space()
        start = pos
        while pos < len(data) and data[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise MarkerParseError("Expected an integer in header", context, line=line, offset=start)
        fields.append(int(data[start:pos]))

    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise MarkerParseError("Header must end with whitespace", context, line=line, offset=pos)
    return magic, fields, pos + 1


def _decode_with_pillow(data: bytes, context) -> Image.Image:
    try:
        image = Image.open(io.BytesIO(data))
        image.load()
    except (UnidentifiedImageError, OSError, ValueError, SyntaxError) as e:
        raise MarkerParseError(f"Cannot decode raster: {e}", context)
    return image


def load_bitgrid(path: PathLike, format: Optional[str] = None) -> BitGrid:
    """
    Load a binary marker.

    Args:
        path: Marker file
        format: 'pbm-ascii', 'pbm-binary', 'textgrid', or None to detect from
            the file's magic number (anything without a PBM magic is textgrid)

    Returns:
        BitGrid with 1 where the source pixel is dark

    Raises:
        MarkerParseError, DimensionError: On malformed content
        FiducialSplatError: On I/O failure
    """
    validate_file_path(str(path), "load_bitgrid")
    if format is not None:
        validate_format(format, BITGRID_FORMATS, "load_bitgrid")
    context = create_error_context("load_bitgrid", file_path=str(path), format=format)

    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise handle_error(e, context)

    if format is None:
        format = _PNM_MAGIC.get(data[:2], "textgrid")
        context.format = format

    if format == "textgrid":
        try:
            text = data.decode("ascii")
        except UnicodeDecodeError as e:
            raise MarkerParseError("textgrid must be ASCII", context, offset=e.start)
        grid = parse_textgrid(text, file_path=str(path))
    else:
        magic, (width, height), _ = _read_pnm_header(data, 2, context)
        if _PNM_MAGIC[magic] != format:
            raise MarkerParseError(
                f"Magic {magic!r} does not match declared format {format}", context, line=1, offset=0
            )
        image = _decode_with_pillow(data, context)
        if image.size != (width, height):
            raise DimensionError(f"Header says {width}x{height}, raster is {image.size}", context)
        # Pillow maps PBM 1 (black) to 0
        grid = BitGrid.from_array((np.asarray(image.convert("L")) < 128).astype(np.uint8))

    logger.debug("loaded %r from %s", grid, path)
    return grid


def save_bitgrid(grid: BitGrid, path: PathLike, format: str = "textgrid") -> None:
    """
    Write a marker in one of the formats load_bitgrid reads.

    Raises:
        ValidationError: On unknown format
        FiducialSplatError: On I/O failure
    """
    validate_format(format, BITGRID_FORMATS, "save_bitgrid")
    validate_file_path(str(path), "save_bitgrid")
    context = create_error_context("save_bitgrid", file_path=str(path), format=format)

    try:
        if format == "textgrid":
            Path(path).write_text(grid.to_text(), encoding="ascii")
        elif format == "pbm-ascii":
            # Pillow only writes raw PNM, the plain variant is written directly
            body = "\n".join(" ".join(str(int(v)) for v in row) for row in grid.cells)
            Path(path).write_text(f"P1\n{grid.width} {grid.height}\n{body}\n", encoding="ascii")
        else:
            # mode "1": 0 is black, so dark cells map to 0
            light = np.where(grid.cells == 1, 0, 255).astype(np.uint8)
            Image.fromarray(light).convert("1", dither=Image.Dither.NONE).save(path, format="PPM")
    except OSError as e:
        raise handle_error(e, context)


# ---------------------------------------------------------------------------
# Test grids
# ---------------------------------------------------------------------------

def make_test_grid(kind: str, size: int) -> BitGrid:
    """
    Deterministic canonical bitmap for a named shape on a size x size grid.

    solid      every cell dark
    checker    dark where (row + col) is even
    plus       centered cross with arm thickness max(1, size // 3)
    l_tromino  left column plus bottom row (three cells at size 2)
    ring       dark border around a light interior

    Raises:
        ValidationError: Unknown kind, or size too small for the shape
    """
    validate_format(kind, TEST_GRID_KINDS, "make_test_grid")
    if size < _MIN_TEST_GRID_SIZE[kind]:
        raise ValidationError(
            f"{kind} needs size >= {_MIN_TEST_GRID_SIZE[kind]}, got {size}",
            create_error_context("make_test_grid", kind=kind, size=size),
        )

    cells = np.zeros((size, size), dtype=np.uint8)
    if kind == "solid":
        cells[:] = 1
    elif kind == "checker":
        rows, cols = np.indices((size, size))
        cells[(rows + cols) % 2 == 0] = 1
    elif kind == "plus":
        thickness = max(1, size // 3)
        lo = (size - thickness) // 2
        cells[lo:lo + thickness, :] = 1
        cells[:, lo:lo + thickness] = 1
    elif kind == "l_tromino":
        cells[:, 0] = 1
        cells[size - 1, :] = 1
    elif kind == "ring":
        cells[:] = 1
        cells[1:-1, 1:-1] = 0
    return BitGrid.from_array(cells)


# ---------------------------------------------------------------------------
# Images
# ---------------------------------------------------------------------------

def quantize(samples: np.ndarray) -> np.ndarray:
    """Map [0, 1] samples to bytes with round-half-up."""
    return np.floor(np.asarray(samples) * 255.0 + 0.5).astype(np.uint8)


def write_image(img: ImageBuffer, path: PathLike, format: Optional[str] = None) -> None:
    """
    Write an 8-bit binary PGM (gray) or PPM (RGB).

    Args:
        img: Image to write
        path: Destination
        format: 'pgm-binary' or 'ppm-binary'; None picks from the channel count

    Raises:
        ImageFormatError: Channel count does not match the format
        FiducialSplatError: On I/O failure
    """
    if format is None:
        format = "pgm-binary" if img.channels == 1 else "ppm-binary"
    validate_format(format, IMAGE_FORMATS, "write_image")
    validate_file_path(str(path), "write_image")
    context = create_error_context("write_image", file_path=str(path), format=format)

    expected = 1 if format == "pgm-binary" else 3
    if img.channels != expected:
        raise ImageFormatError(f"{format} needs {expected} channel(s), image has {img.channels}", context)

    try:
        Image.fromarray(quantize(img.samples)).save(path, format="PPM")
    except OSError as e:
        raise handle_error(e, context)


def read_image(path: PathLike) -> ImageBuffer:
    """
    Read a PGM/PPM (or PBM) file; samples are byte / 255.

    Raises:
        MarkerParseError: On malformed content
        ImageFormatError: Unsupported maxval or mode
        FiducialSplatError: On I/O failure
    """
    validate_file_path(str(path), "read_image")
    context = create_error_context("read_image", file_path=str(path))
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise handle_error(e, context)

    magic = data[:2]
    if magic in (b"P5", b"P6"):
        _, (_, _, maxval), _ = _read_pnm_header(data, 3, context)
        if maxval != 255:
            raise ImageFormatError(f"Only maxval 255 is supported, got {maxval}", context)

    image = _decode_with_pillow(data, context)
    if image.mode in ("1", "L"):
        array = np.asarray(image.convert("L"), dtype=np.float64) / 255.0
    elif image.mode == "RGB":
        array = np.asarray(image, dtype=np.float64) / 255.0
    else:
        raise ImageFormatError(f"Unsupported image mode {image.mode}", context)
    return ImageBuffer.from_array(array)

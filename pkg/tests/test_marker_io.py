"""
Marker and Image I/O Tests
==========================

Tests for BitGrid loading/saving, test grids and PGM/PPM images.
"""

import os
import shutil
import tempfile
from pathlib import Path

import cv2
import numpy as np
import pytest

from fiducial_splat.core.marker_io import (
    BitGrid,
    ImageBuffer,
    load_bitgrid,
    make_test_grid,
    parse_textgrid,
    read_image,
    save_bitgrid,
    write_image,
)
from fiducial_splat.utils.error_handler import (
    DimensionError,
    FiducialSplatError,
    ImageFormatError,
    MarkerParseError,
    ValidationError,
)
from tests.oracles import QR_ALIGNMENT_CENTERS, TAG36H11_CODES, qr_version_bits, tag36h11_grid


class TestBitGrid:
    """Tests for the BitGrid value type and textgrid parsing."""

    def test_solid_block(self):
        grid = parse_textgrid("11\n11")
        assert (grid.width, grid.height) == (2, 2)
        assert grid.count(1) == 4

    def test_checkerboard(self):
        grid = parse_textgrid("10\n01\n")
        assert grid.cells.tolist() == [[1, 0], [0, 1]]

    def test_ragged_rows_raise_dimension_error(self):
        with pytest.raises(DimensionError):
            parse_textgrid("101\n01\n")

    def test_bad_character_reports_position(self):
        with pytest.raises(MarkerParseError) as info:
            parse_textgrid("10\n0x\n")
        assert info.value.line == 2

    def test_cells_are_read_only(self):
        grid = BitGrid.from_rows(["10", "01"])
        with pytest.raises(ValueError):
            grid.cells[0, 0] = 0

    def test_non_binary_values_rejected(self):
        with pytest.raises(ValidationError):
            BitGrid.from_array(np.array([[0, 2]]))

    def test_array_round_trip(self):
        array = np.array([[1, 0, 1], [0, 0, 1]], dtype=np.uint8)
        assert np.array_equal(BitGrid.from_array(array).to_array(), array)


class TestBitGridFiles:
    """Tests for load_bitgrid / save_bitgrid."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp(prefix="marker_io_test_")
        self.grid = BitGrid.from_rows(["1100", "0110", "0011"])

    def teardown_method(self):
        if os.path.exists(self.temp_dir):
            shutil.rmtree(self.temp_dir, ignore_errors=True)

    @pytest.mark.parametrize("fmt", ["textgrid", "pbm-ascii", "pbm-binary"])
    def test_save_then_load_is_identity(self, fmt):
        path = Path(self.temp_dir) / f"marker.{fmt}"
        save_bitgrid(self.grid, path, fmt)
        assert load_bitgrid(path) == self.grid
        assert load_bitgrid(path, fmt) == self.grid

    def test_pbm_ascii_keeps_black_is_one(self):
        path = Path(self.temp_dir) / "plain.pbm"
        path.write_text("P1\n# comment\n3 2\n1 0 0\n0 0 1\n", encoding="ascii")
        assert load_bitgrid(path).cells.tolist() == [[1, 0, 0], [0, 0, 1]]

    def test_declared_format_must_match_magic(self):
        path = Path(self.temp_dir) / "plain.pbm"
        save_bitgrid(self.grid, path, "pbm-ascii")
        with pytest.raises(MarkerParseError):
            load_bitgrid(path, "pbm-binary")

    def test_missing_file(self):
        with pytest.raises(FiducialSplatError):
            load_bitgrid(Path(self.temp_dir) / "missing.txt")

    def test_fixture_files(self, test_data_dir, apriltag_grids):
        assert load_bitgrid(test_data_dir / "plus.txt") == make_test_grid("plus", 3)
        assert load_bitgrid(test_data_dir / "solid.txt") == make_test_grid("solid", 2)
        for tag in apriltag_grids:
            assert (tag.width, tag.height) == (10, 10)
            # white quiet border, black ring
            assert tag.cells[0].sum() == 0 and tag.cells[:, 9].sum() == 0
            assert tag.cells[1, 1:9].tolist() == [1] * 8

    def test_apriltags_match_published_codes(self, apriltag_grids):
        for tag_id, tag in enumerate(apriltag_grids):
            assert tag == tag36h11_grid(TAG36H11_CODES[tag_id]), f"tag {tag_id}"

    def test_apriltag_zero_payload(self, apriltag_grids):
        # 0xd5d628584, light cells are set bits
        data = apriltag_grids[0].cells[2:8, 2:8]
        rows = ["".join(str(v) for v in row) for row in data]
        assert rows == ["001010", "100010", "100111", "010111", "101001", "111011"]

    def test_qr_fixture_round_trip(self, qr_small):
        path = Path(self.temp_dir) / "qr_small.pbm"
        save_bitgrid(qr_small, path, "pbm-ascii")
        loaded = load_bitgrid(path)
        assert (loaded.width, loaded.height) == (25, 25)
        assert loaded == qr_small


class TestQrFixtures:
    """Tests for the encoded QR fixtures in tests/data."""

    VERSIONS = (2, 5, 10, 22)

    @pytest.fixture(autouse=True)
    def _grids(self, test_data_dir):
        self.grids = {v: load_bitgrid(test_data_dir / f"qr_v{v}.pbm") for v in self.VERSIONS}

    def test_sizes_follow_version(self, test_data_dir):
        for version, grid in self.grids.items():
            assert (grid.width, grid.height) == (4 * version + 17, 4 * version + 17)
            assert load_bitgrid(test_data_dir / f"qr_v{version}.pbm", "pbm-binary") == grid

    def test_category_fixtures_are_the_files(self, qr_grids):
        assert qr_grids["small"] == self.grids[2]
        assert qr_grids["huge"] == self.grids[22]

    def test_finder_patterns(self):
        finder = np.ones((7, 7), dtype=np.uint8)
        finder[1:6, 1:6] = 0
        finder[2:5, 2:5] = 1
        for grid in self.grids.values():
            n = grid.width
            for r, c in ((0, 0), (0, n - 7), (n - 7, 0)):
                assert np.array_equal(grid.cells[r:r + 7, c:c + 7], finder)
            # separators
            assert grid.cells[7, 0:8].sum() == 0 and grid.cells[0:8, 7].sum() == 0
            assert grid.cells[7, n - 8:].sum() == 0 and grid.cells[n - 8:, 7].sum() == 0

    def test_timing_patterns(self):
        for grid in self.grids.values():
            n = grid.width
            expected = (np.arange(8, n - 8) % 2 == 0).astype(np.uint8)
            assert np.array_equal(grid.cells[6, 8:n - 8], expected)
            assert np.array_equal(grid.cells[8:n - 8, 6], expected)

    def test_alignment_patterns(self):
        pattern = np.ones((5, 5), dtype=np.uint8)
        pattern[1:4, 1:4] = 0
        pattern[2, 2] = 1
        for version, grid in self.grids.items():
            centers = QR_ALIGNMENT_CENTERS[version]
            first, last = centers[0], centers[-1]
            placed = 0
            for r in centers:
                for c in centers:
                    # these three would overlap a finder pattern
                    if (r, c) in ((first, first), (first, last), (last, first)):
                        continue
                    assert np.array_equal(grid.cells[r - 2:r + 3, c - 2:c + 3], pattern), (version, r, c)
                    placed += 1
            assert placed == len(centers) ** 2 - 3

    def test_dark_module(self):
        for version, grid in self.grids.items():
            assert grid[4 * version + 9, 8] == 1

    @pytest.mark.parametrize("version", [10, 22])
    def test_version_information(self, version):
        grid = self.grids[version]
        n = grid.width
        top_right = sum(int(grid[i // 3, n - 11 + i % 3]) << i for i in range(18))
        bottom_left = sum(int(grid[n - 11 + i % 3, i // 3]) << i for i in range(18))
        assert top_right == bottom_left == qr_version_bits(version)

    @pytest.mark.parametrize("version", [2, 5])
    def test_decodes_to_payload(self, version, qr_payloads):
        cells = np.pad(self.grids[version].cells, 4)
        image = np.where(cells == 1, 0, 255).astype(np.uint8)
        image = cv2.resize(image, None, fx=8, fy=8, interpolation=cv2.INTER_NEAREST)
        text, _, _ = cv2.QRCodeDetector().detectAndDecode(image)
        assert text == qr_payloads[version]


class TestTestGrids:
    """Tests for make_test_grid."""

    def test_solid(self):
        assert make_test_grid("solid", 2).to_text() == "11\n11\n"

    def test_plus(self):
        assert make_test_grid("plus", 3).to_text() == "010\n111\n010\n"

    def test_ring(self):
        grid = make_test_grid("ring", 3)
        assert grid.count(1) == 8 and grid[1, 1] == 0

    def test_l_tromino(self):
        assert make_test_grid("l_tromino", 2).to_text() == "10\n11\n"

    @pytest.mark.parametrize("kind,size", [("plus", 2), ("ring", 2), ("solid", 0)])
    def test_too_small(self, kind, size):
        with pytest.raises(ValidationError):
            make_test_grid(kind, size)

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            make_test_grid("triangle", 4)


class TestImages:
    """Tests for write_image / read_image."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp(prefix="image_test_")

    def teardown_method(self):
        if os.path.exists(self.temp_dir):
            shutil.rmtree(self.temp_dir, ignore_errors=True)

    def _raster_bytes(self, path, count):
        return Path(path).read_bytes()[-count:]

    def test_zero_gray_image(self):
        path = Path(self.temp_dir) / "zeros.pgm"
        write_image(ImageBuffer.filled(4, 4, 0.0), path)
        assert Path(path).read_bytes().startswith(b"P5")
        assert self._raster_bytes(path, 16) == bytes(16)
        assert np.array_equal(read_image(path).samples, np.zeros((4, 4)))

    def test_one_gray_image(self):
        path = Path(self.temp_dir) / "ones.pgm"
        write_image(ImageBuffer.filled(3, 2, 1.0), path)
        assert self._raster_bytes(path, 6) == bytes([255] * 6)

    def test_mid_gray_rounds_half_up(self):
        path = Path(self.temp_dir) / "mid.pgm"
        write_image(ImageBuffer.filled(2, 2, 0.5), path)
        assert self._raster_bytes(path, 4) == bytes([128] * 4)

    def test_red_ppm(self):
        path = Path(self.temp_dir) / "red.ppm"
        samples = np.zeros((2, 3, 3))
        samples[..., 0] = 1.0
        write_image(ImageBuffer.from_array(samples), path)
        image = read_image(path)
        assert image.channels == 3
        assert np.array_equal(image.samples[0, 0], [1.0, 0.0, 0.0])

    def test_random_round_trip_error_bound(self):
        rng = np.random.default_rng(7)
        original = ImageBuffer.from_array(rng.random((17, 23)))
        path = Path(self.temp_dir) / "random.pgm"
        write_image(original, path)
        restored = read_image(path)
        assert np.abs(restored.samples - original.samples).max() <= 1.0 / 510 + 1e-12

    def test_channel_format_mismatch(self):
        with pytest.raises(ImageFormatError):
            write_image(ImageBuffer.filled(2, 2, 0.0), Path(self.temp_dir) / "x.ppm", "ppm-binary")

    def test_out_of_range_samples_rejected(self):
        with pytest.raises(ValidationError):
            ImageBuffer.from_array(np.array([[0.0, 1.5]]))

    def test_luminance(self):
        rgb = ImageBuffer.from_array(np.ones((1, 1, 3)) * np.array([1.0, 0.0, 0.0]))
        assert rgb.to_gray()[0, 0] == pytest.approx(0.299)

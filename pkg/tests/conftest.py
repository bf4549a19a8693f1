"""
Pytest configuration for Fiducial Splat tests
"""

import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import pytest

from fiducial_splat.core.marker_io import load_bitgrid

DATA_DIR = project_root / "tests" / "data"

# QR version per size category (25, 37, 57 and 105 modules)
QR_VERSIONS = {"small": 2, "medium": 5, "large": 10, "huge": 22}
APRILTAG_IDS = range(5)


@pytest.fixture
def test_data_dir():
    """Fixture for test data directory."""
    return DATA_DIR


@pytest.fixture
def apriltag_grids(test_data_dir):
    """The five 36h11 tags, ids 0-4."""
    return [load_bitgrid(test_data_dir / f"apriltag_36h11_{i}.txt") for i in APRILTAG_IDS]


@pytest.fixture(scope="session")
def qr_grids():
    """Encoded QR codes (error correction M, no quiet zone), one per size category."""
    return {name: load_bitgrid(DATA_DIR / f"qr_v{version}.pbm") for name, version in QR_VERSIONS.items()}


@pytest.fixture(scope="session")
def qr_payloads():
    """Random alphanumeric string encoded in each QR fixture, by version."""
    payloads = {}
    for line in (DATA_DIR / "qr_payloads.txt").read_text(encoding="ascii").splitlines():
        version, text = line.split(" ", 1)
        payloads[int(version)] = text
    return payloads


@pytest.fixture(scope="session")
def qr_small(qr_grids):
    return qr_grids["small"]

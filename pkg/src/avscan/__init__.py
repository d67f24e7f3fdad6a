"""avscan: Solidity vulnerability scanning via abstract signature matching
plus refined detection rules."""

__version__ = "0.1.0"

from pathlib import Path

DATA_DIR = Path(__file__).parent / "data"


def bundled_store_dir():
    return DATA_DIR / "avs_store"


def fixture_dir():
    return DATA_DIR / "fixtures"

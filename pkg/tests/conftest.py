"""Shared fixtures for magnopurcell tests."""

import pytest

from magnopurcell.physics.model import resonant_system
from magnopurcell.physics.transmission import FrequencyGrid

CAVITY_HZ = 5.33e9

# (alpha, K_c/2pi MHz, g/2pi MHz, beta) for the seven-row damping ladder.
TABLE1 = [
    (1.4e-5, 24.99, 127.3, 4.688e-3),
    (1.4e-4, 24.997, 126.9, 4.7e-3),
    (1.4e-3, 25.15, 122.38, 4.718e-3),
    (7.0e-3, 29.0, 116.61, 5.44e-3),
    (1.4e-2, 39.0, 97.82, 7.317e-3),
    (2.1e-2, 43.5, 76.03, 8.161e-3),
    (2.8e-2, 45.5, 62.6, 8.536e-3),
]


@pytest.fixture
def table1():
    return list(TABLE1)


@pytest.fixture
def table1_verdicts():
    return ["No", "No", "No", "No", "No", "Yes", "Yes"]


@pytest.fixture
def row1_system():
    """Table row 1 at resonance with a visible doublet (photon line coupling only)."""
    return resonant_system(CAVITY_HZ, 1.4e-5, 4.688e-3, 127.3e6, gamma_c_hz=12.5e6)


@pytest.fixture
def row7_system():
    return resonant_system(CAVITY_HZ, 2.8e-2, 8.536e-3, 62.6e6, gamma_c_hz=12.5e6)


@pytest.fixture
def fine_grid():
    return FrequencyGrid(5.0e9, 5.7e9, 14001)


@pytest.fixture
def wide_grid():
    """Span of many linewidths, for clean time-domain transforms."""
    return FrequencyGrid(3.5e9, 7.2e9, 8001)


@pytest.fixture
def tmp_output_dir(tmp_path):
    """Provide a temporary output directory."""
    out = tmp_path / "out"
    out.mkdir()
    return out


@pytest.fixture
def write_config(tmp_path):
    """Write a YAML config text to a temporary file and return its path."""

    def _write(text: str, name: str = "run.yaml"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write

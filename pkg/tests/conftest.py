"""
Fixtures for tests.
"""

import os
import tempfile
from pathlib import Path

import numpy as np
import pytest
import yaml

from facepulse.dsp.signals import Signal1D
from facepulse.facegeom.mesh import build_mesh
from facepulse.io.synthetic import synth_generate
from facepulse.utils.schemas import SyntheticSpec


@pytest.fixture
def temp_config_file():
    """Create a temporary configuration file."""
    with tempfile.NamedTemporaryFile(suffix=".yaml", delete=False, mode="w") as f:
        config = {
            "pipeline": {
                "pipeline": "multi_region",
                "method": "omit",
                "selection": {"grid_n": 9, "max_regions": 32},
                "spectral": {"win_s": 10.0, "step_s": 1.0},
            },
            "reference": {"min_gap_s": 0.5},
            "evaluation": {"max_lag_s": 3.0, "min_common_windows": 10},
            "run": {"jobs": 1, "seed": 0, "out_dir": "/tmp/facepulse-runs"},
        }
        yaml.dump(config, f)

    yield f.name
    os.unlink(f.name)


@pytest.fixture
def temp_dir():
    """Create a temporary directory."""
    with tempfile.TemporaryDirectory() as d:
        yield Path(d)


@pytest.fixture(scope="session")
def mesh():
    """Canonical mesh shared by the whole session."""
    return build_mesh()


@pytest.fixture(scope="session")
def short_video(mesh):
    """Short static synthetic video at 72 bpm."""
    spec = SyntheticSpec(
        duration_s=20.0,
        frame_size=(128, 128),
        hr_trajectory=((0.0, 72.0),),
        amplitude=0.02,
        noise_sigma=1.0,
    )
    return synth_generate(spec, seed=1, mesh=mesh)


@pytest.fixture
def make_sine():
    """Factory for pure sinusoids as Signal1D."""

    def _make(freq_hz: float, fs: float = 30.0, duration_s: float = 20.0, amp: float = 1.0):
        t = np.arange(int(round(duration_s * fs))) / fs
        return Signal1D(amp * np.sin(2 * np.pi * freq_hz * t), fs)

    return _make

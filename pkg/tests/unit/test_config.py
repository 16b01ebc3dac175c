"""
Tests for the configuration utilities.
"""

import os
import tempfile

import pytest
import yaml

from facepulse.utils.config import (
    Config,
    build_pipeline_config,
    default_config_file,
    load_dataset_descriptor,
)
from facepulse.utils.exceptions import ConfigError, ValidationError
from facepulse.utils.schemas import BandpassSpec, PipelineConfig


@pytest.fixture
def config(temp_config_file):
    """Create a test configuration object."""
    return Config(config_file=temp_config_file)


def test_load_config(config):
    """Test loading a valid configuration file."""
    assert config.config is not None
    assert "pipeline" in config.config
    assert config.model.pipeline.method == "omit"
    assert config.model.pipeline.selection.grid_n == 9


def test_defaults_fill_missing_sections(config):
    """Test that sections missing from the file take their defaults."""
    assert config.model.pipeline.bandpass.low_hz == 0.75
    assert config.model.pipeline.bandpass.high_hz == 4.0
    assert config.model.pipeline.bandpass.beta == 25.0
    assert config.model.evaluation.lag_mode == "per_video"


def test_config_file_from_env_file(temp_dir, monkeypatch):
    """Test that FACEPULSE_CONFIG from a .env file picks the configuration path."""
    monkeypatch.chdir(temp_dir)
    monkeypatch.delenv("FACEPULSE_CONFIG", raising=False)
    assert default_config_file() == "config/facepulse.yaml"
    (temp_dir / ".env").write_text("FACEPULSE_CONFIG=alt/run.yaml\n")
    assert default_config_file() == "alt/run.yaml"
    config = Config()
    assert config.config_file == "alt/run.yaml"
    assert (temp_dir / "alt" / "run.yaml").is_file()


def test_empty_file_takes_defaults(temp_dir):
    """Test that an empty configuration file validates to the defaults."""
    path = temp_dir / "empty.yaml"
    path.write_text("")
    config = Config(config_file=str(path))
    assert config.config == {}
    assert config.model.pipeline.selection.dfa_mode == "relative"
    assert config.model.evaluation.min_envelope_sd_bpm == 0.25


def test_validation_error():
    """Test validation error for invalid configuration."""
    with tempfile.NamedTemporaryFile(suffix=".yaml", delete=False, mode="w") as f:
        config = {"pipeline": {"selection": {"grid_n": 1}}}
        yaml.dump(config, f)

    try:
        with pytest.raises(ValidationError):
            Config(config_file=f.name)
    finally:
        os.unlink(f.name)


def test_unknown_key_rejected():
    """Test that unknown keys are rejected rather than ignored."""
    with tempfile.NamedTemporaryFile(suffix=".yaml", delete=False, mode="w") as f:
        yaml.dump({"pipeline": {"grid": 9}}, f)

    try:
        with pytest.raises(ValidationError):
            Config(config_file=f.name)
    finally:
        os.unlink(f.name)


def test_malformed_yaml():
    """Test that unparsable YAML raises ConfigError."""
    with tempfile.NamedTemporaryFile(suffix=".yaml", delete=False, mode="w") as f:
        f.write("pipeline: [unclosed\n")

    try:
        with pytest.raises(ConfigError):
            Config(config_file=f.name)
    finally:
        os.unlink(f.name)


def test_create_default_config(temp_dir):
    """Test creating a default configuration file when none exists."""
    path = temp_dir / "sub" / "facepulse.yaml"
    config = Config(config_file=str(path))
    assert path.exists()
    assert config.model.pipeline.pipeline == "multi_region"
    with open(path) as f:
        assert yaml.safe_load(f)["pipeline"]["method"] == "omit"


def test_2sr_requires_normalized_pipeline():
    """Test that 2SR is rejected on pipelines without a normalized stack."""
    with pytest.raises(ValidationError):
        build_pipeline_config(PipelineConfig(), method="2sr", pipeline="improved")
    cfg = build_pipeline_config(PipelineConfig(), method="2sr", pipeline="normalized_single")
    assert cfg.method == "2sr"


def test_build_pipeline_config_merges_sections():
    """Test that nested overrides merge into the base section."""
    cfg = build_pipeline_config(PipelineConfig(), selection={"grid_n": 6}, method="CHROM")
    assert cfg.selection.grid_n == 6
    assert cfg.selection.max_regions == 32
    assert cfg.method == "chrom"


def test_bandpass_taps_are_odd():
    """Test the derived FIR length at common frame rates."""
    assert BandpassSpec().taps_for(30.0) == 241
    assert BandpassSpec().taps_for(25.0) == 201
    assert BandpassSpec().taps_for(20.0) % 2 == 1
    with pytest.raises(Exception):
        BandpassSpec(num_taps=10)


def test_dataset_descriptor_root_resolved(temp_dir):
    """Test that a relative dataset root resolves against the descriptor folder."""
    path = temp_dir / "dataset.yaml"
    with open(path, "w") as f:
        yaml.dump({"name": "demo", "root": "data", "entries": []}, f)
    descriptor = load_dataset_descriptor(str(path))
    assert descriptor.root == str((temp_dir / "data").resolve())

"""
Tests for frame, landmark, reference and dataset I/O.
"""

import numpy as np
import pytest
import yaml

from facepulse.dsp.signals import Signal1D
from facepulse.facegeom.landmarks import LandmarkFrame, canonical_shape_68
from facepulse.io.datasets import entry_paths, load_dataset, missing_files
from facepulse.io.frames import (
    load_frame_dir,
    load_frames,
    load_raw,
    read_meta,
    write_frame_dir,
    write_raw,
)
from facepulse.io.landmarks import landmark_header, load_landmarks, write_landmarks
from facepulse.io.reference import load_reference, write_reference
from facepulse.utils.exceptions import (
    DataError,
    FrameSourceError,
    LandmarkFormatError,
    ReferenceFormatError,
)


def _frames(n=5, height=8, width=10, seed=0):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, (n, height, width, 3), dtype=np.uint8)


def test_raw_container_roundtrip(temp_dir):
    """Test writing and reading the raw planar container."""
    frames = _frames()
    path = write_raw(frames, 29.97, str(temp_dir / "video.raw"))
    sequence = load_raw(path)
    assert np.array_equal(sequence.frames, frames)
    assert sequence.fs == 29.97
    assert (sequence.width, sequence.height) == (10, 8)
    assert len(load_frames(path)) == 5


def test_raw_container_errors(temp_dir):
    """Test bad magic and truncated bodies."""
    bad = temp_dir / "bad.raw"
    bad.write_bytes(b"NOTRAW1" + b"\0" * 40)
    with pytest.raises(FrameSourceError):
        load_raw(str(bad))

    path = write_raw(_frames(), 30.0, str(temp_dir / "video.raw"))
    data = open(path, "rb").read()
    with open(path, "wb") as f:
        f.write(data[:-10])
    with pytest.raises(FrameSourceError, match="truncated"):
        load_raw(path)
    with pytest.raises(FrameSourceError):
        load_frames(str(temp_dir / "absent.raw"))


def test_frame_dir_roundtrip(temp_dir):
    """Test lossless PNG frame directories with their metadata."""
    frames = _frames(n=3)
    directory = write_frame_dir(frames, 25.0, str(temp_dir / "frames"))
    assert read_meta(directory)["fs"] == 25.0
    sequence = load_frame_dir(directory)
    assert np.array_equal(sequence.frames, frames)
    assert load_frames(directory).fs == 25.0


def test_frame_dir_gap_and_meta(temp_dir):
    """Test numbering gaps and a missing metadata file."""
    directory = write_frame_dir(_frames(n=3), 25.0, str(temp_dir / "frames"))
    (temp_dir / "frames" / "000002.png").unlink()
    with pytest.raises(FrameSourceError, match="Frame 2"):
        load_frame_dir(directory)
    (temp_dir / "frames" / "meta").unlink()
    with pytest.raises(FrameSourceError):
        read_meta(directory)


def test_landmarks_roundtrip_with_missing(temp_dir):
    """Test landmark CSV writing and reading with an absent frame."""
    lm = LandmarkFrame(canonical_shape_68() + 3.0)
    path = write_landmarks([lm, None, lm], str(temp_dir / "lm.csv"))
    loaded = load_landmarks(path)
    assert len(loaded) == 3
    assert loaded[1] is None
    assert np.allclose(loaded[0].points, lm.points, atol=1e-4)
    assert loaded[2].frame_index == 2
    assert len(load_landmarks(path, n_frames=5)) == 5


def test_landmarks_format_errors(temp_dir):
    """Test header checks and line-numbered row errors."""
    path = temp_dir / "lm.csv"
    path.write_text("frame,x0,y0\n0,1,2\n")
    with pytest.raises(LandmarkFormatError):
        load_landmarks(str(path))

    header = ",".join(landmark_header())
    row = ",".join(["0"] + ["1.0"] * 136)
    path.write_text(f"{header}\n{row}\n1,2,3\n")
    with pytest.raises(LandmarkFormatError, match=":3:"):
        load_landmarks(str(path))

    path.write_text(f"{header}\n{row}\n{row}\n")
    with pytest.raises(LandmarkFormatError, match="duplicate"):
        load_landmarks(str(path))


def test_reference_layouts(temp_dir):
    """Test timestamped, value-only and headerless reference files."""
    signal = Signal1D(np.sin(np.arange(120) / 10.0), 60.0)
    timed = write_reference(signal, str(temp_dir / "timed.csv"))
    plain = write_reference(signal, str(temp_dir / "plain.csv"), with_time=False)
    bare = temp_dir / "bare.csv"
    np.savetxt(bare, signal.samples)

    for path in (timed, plain, str(bare)):
        loaded = load_reference(path, fs=60.0)
        assert len(loaded) == 120
        assert np.allclose(loaded.samples, signal.samples, atol=1e-6)


def test_reference_resampled_and_channels(temp_dir):
    """Test non-uniform timestamps and multi-lead channel selection."""
    path = temp_dir / "ref.csv"
    path.write_text("t,value\n0.0,0.0\n0.5,1.0\n1.0,2.0\n")
    loaded = load_reference(str(path), fs=4.0)
    assert loaded.samples.tolist() == [0.0, 0.5, 1.0, 1.5, 2.0]

    path.write_text("t,lead1,lead2\n0.0,1,10\n0.25,2,20\n0.5,3,30\n")
    assert load_reference(str(path), kind="ecg", fs=4.0, channel=1).samples.tolist() == [
        10.0,
        20.0,
        30.0,
    ]
    with pytest.raises(ReferenceFormatError):
        load_reference(str(path), fs=4.0)
    with pytest.raises(ReferenceFormatError):
        load_reference(str(path), fs=4.0, channel=5)


def test_reference_bad_timestamps(temp_dir):
    """Test duplicate and decreasing timestamps."""
    path = temp_dir / "ref.csv"
    path.write_text("t,value\n0.0,1\n0.5,2\n0.5,3\n")
    with pytest.raises(ReferenceFormatError, match="Duplicate"):
        load_reference(str(path), fs=2.0)
    path.write_text("t,value\n0.0,1\n0.5,2\n0.25,3\n")
    with pytest.raises(ReferenceFormatError, match="decrease"):
        load_reference(str(path), fs=2.0)
    with pytest.raises(ReferenceFormatError):
        load_reference(str(temp_dir / "absent.csv"))


def test_dataset_descriptor_missing_files(temp_dir):
    """Test path resolution and missing-file handling."""
    (temp_dir / "ref.csv").write_text("value\n1\n")
    descriptor = {
        "name": "demo",
        "root": ".",
        "entries": [
            {
                "video_id": "v1",
                "frames": "v1.raw",
                "landmarks": "v1.csv",
                "reference": "ref.csv",
                "reference_fs": 60,
            }
        ],
    }
    path = temp_dir / "dataset.yaml"
    with open(path, "w") as f:
        yaml.dump(descriptor, f)

    with pytest.raises(DataError):
        load_dataset(str(path))
    loaded = load_dataset(str(path), strict=False)
    entry = loaded.entries[0]
    assert entry_paths(loaded, entry).reference == str(temp_dir.resolve() / "ref.csv")
    assert len(missing_files(loaded, entry)) == 2

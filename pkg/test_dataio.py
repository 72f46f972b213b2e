"""Feature files, manifests, checkpoints and JSON config loading."""

import json
import struct

import numpy as np
import pytest
from pydantic import BaseModel, ConfigDict

from dataio import (
    CKPT_MAGIC,
    MAGIC,
    FeatureMatrix,
    SampleManifest,
    SampleRecord,
    external_pairs,
    load_config,
    load_manifest,
    read_checkpoint,
    read_features,
    save_manifest,
    write_checkpoint,
    write_features,
)
from guards import (
    BadMagic,
    CheckpointMismatch,
    DanglingRowIndex,
    DataIOError,
    DimensionMismatch,
    DuplicateId,
    InvalidConfig,
    MissingReconPair,
    NonFinite,
    ParseError,
    Truncated,
)


# ═══════════════════════════════════════════════════════════════════════════════
# FEATURE FILES
# ═══════════════════════════════════════════════════════════════════════════════

def test_feature_files_round_trip_bitwise(tmp_path):
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n, d = int(rng.integers(0, 12)), int(rng.integers(1, 9))
        values = rng.normal(scale=10.0, size=(n, d)).astype(np.float32)
        first, second = tmp_path / f"a{seed}.bin", tmp_path / f"b{seed}.bin"
        write_features(values, first)
        loaded = read_features(first)
        assert loaded.values.shape == (n, d)
        assert np.array_equal(loaded.values, values.astype(np.float64))
        write_features(loaded, second)
        assert first.read_bytes() == second.read_bytes()
        assert len(first.read_bytes()) == 16 + 4 * n * d


def test_bad_magic(tmp_path):
    path = tmp_path / "f.bin"
    path.write_bytes(b"NOTMAGIC" + struct.pack("<II", 1, 1) + b"\0\0\0\0")
    with pytest.raises(BadMagic):
        read_features(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "f.bin"
    write_features(np.ones((3, 4)), path)
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(Truncated):
        read_features(path)
    path.write_bytes(MAGIC + b"\0")
    with pytest.raises(Truncated):
        read_features(path)


def test_non_finite_rejected_on_write_and_read(tmp_path):
    with pytest.raises(NonFinite):
        write_features(np.array([[1.0, np.nan]]), tmp_path / "nan.bin")
    with pytest.raises(NonFinite):
        write_features(np.array([[1e300, 0.0]]), tmp_path / "overflow.bin")

    path = tmp_path / "inf.bin"
    path.write_bytes(MAGIC + struct.pack("<II", 1, 2) + np.array([1.0, np.inf], dtype="<f4").tobytes())
    with pytest.raises(NonFinite):
        read_features(path)


def test_zero_dimension(tmp_path):
    with pytest.raises(InvalidConfig):
        write_features(np.zeros((2, 0)), tmp_path / "z.bin")
    path = tmp_path / "z.bin"
    path.write_bytes(MAGIC + struct.pack("<II", 2, 0))
    with pytest.raises(DimensionMismatch):
        read_features(path)


def test_missing_feature_file(tmp_path):
    with pytest.raises(DataIOError):
        read_features(tmp_path / "absent.bin")


# ═══════════════════════════════════════════════════════════════════════════════
# MANIFESTS
# ═══════════════════════════════════════════════════════════════════════════════

def _manifest():
    return SampleManifest(samples=[
        SampleRecord(id="s0", domain="source", feature_row=0, label="benign", role="source"),
        SampleRecord(id="p0", domain="t", feature_row=1, recon_row=3, role="pool"),
        SampleRecord(id="p1", domain="t", feature_row=2, recon_row=4, role="pool"),
    ])


def test_manifest_round_trip(tmp_path):
    path = tmp_path / "m.json"
    save_manifest(_manifest(), path)
    loaded = load_manifest(path, n_rows=5)
    assert loaded == _manifest()
    assert loaded.domains() == ["source", "t"]
    assert loaded.domains("pool") == ["t"]


def test_manifest_errors(tmp_path):
    path = tmp_path / "m.json"
    raw = _manifest().model_dump(mode="json")

    raw["samples"][1]["id"] = "s0"
    path.write_text(json.dumps(raw))
    with pytest.raises(DuplicateId):
        load_manifest(path)

    save_manifest(_manifest(), path)
    with pytest.raises(DanglingRowIndex):
        load_manifest(path, n_rows=4)

    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_manifest(path)

    raw = _manifest().model_dump(mode="json")
    raw["samples"][0]["colour"] = "red"
    path.write_text(json.dumps(raw))
    with pytest.raises(ParseError):
        load_manifest(path)

    with pytest.raises(DataIOError):
        load_manifest(tmp_path / "absent.json")


def test_external_pairs():
    features = FeatureMatrix(np.arange(20, dtype=np.float64).reshape(5, 4))
    pairs = external_pairs(_manifest(), features)
    assert pairs.ids == ("p0", "p1")
    assert np.array_equal(pairs.originals, features.values[[1, 2]])
    assert np.array_equal(pairs.reconstructions, features.values[[3, 4]])

    broken = SampleManifest(samples=[SampleRecord(id="p0", domain="t", feature_row=0)])
    with pytest.raises(MissingReconPair):
        external_pairs(broken, features)


# ═══════════════════════════════════════════════════════════════════════════════
# CHECKPOINTS
# ═══════════════════════════════════════════════════════════════════════════════

def test_checkpoint_round_trip(tmp_path, rng):
    arrays = {"w": rng.normal(size=(3, 4)), "idx": np.arange(5), "scalar": np.array(2.5)}
    write_checkpoint(tmp_path / "a.ckpt", "thing", {"k": 3}, arrays)
    meta, loaded = read_checkpoint(tmp_path / "a.ckpt", "thing")
    assert meta == {"k": 3}
    assert np.array_equal(loaded["w"], arrays["w"])
    assert loaded["idx"].dtype == np.int64
    assert float(loaded["scalar"]) == 2.5

    write_checkpoint(tmp_path / "b.ckpt", "thing", meta, loaded)
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()


def test_checkpoint_errors(tmp_path):
    path = tmp_path / "a.ckpt"
    write_checkpoint(path, "thing", {}, {"w": np.ones(4)})
    with pytest.raises(CheckpointMismatch):
        read_checkpoint(path, "other")

    data = path.read_bytes()
    path.write_bytes(data[:-3])
    with pytest.raises(Truncated):
        read_checkpoint(path, "thing")

    path.write_bytes(CKPT_MAGIC + struct.pack("<II", 99, 0))
    with pytest.raises(CheckpointMismatch):
        read_checkpoint(path, "thing")

    path.write_bytes(b"X" * 32)
    with pytest.raises(BadMagic):
        read_checkpoint(path, "thing")


def _raw_checkpoint(path, header, payload=b""):
    blob = json.dumps(header).encode("utf-8")
    path.write_bytes(struct.pack("<8sII", CKPT_MAGIC, 1, len(blob)) + blob + payload)


@pytest.mark.parametrize(
    "header",
    [
        {"kind": "thing", "meta": {}},
        {"kind": "thing", "arrays": []},
        {"kind": "thing", "meta": {}, "arrays": [{"name": "w", "dtype": "c16", "shape": [1]}]},
        {"kind": "thing", "meta": {}, "arrays": [{"dtype": "f8", "shape": [1]}]},
        {"kind": "thing", "meta": {}, "arrays": [{"name": "w", "dtype": "f8", "shape": [-1]}]},
        {"kind": "thing", "meta": {}, "arrays": ["w"]},
        ["thing"],
    ],
)
def test_malformed_checkpoint_header_is_parse_error(tmp_path, header):
    path = tmp_path / "a.ckpt"
    _raw_checkpoint(path, header, np.ones(1).tobytes())
    with pytest.raises(ParseError):
        read_checkpoint(path, "thing")


# ═══════════════════════════════════════════════════════════════════════════════
# CONFIG
# ═══════════════════════════════════════════════════════════════════════════════

class _Toy(BaseModel):
    model_config = ConfigDict(extra="forbid")
    k: int = 4


def test_load_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"k": 7}')
    assert load_config(path, _Toy).k == 7

    for bad in ('{"k": "many"}', '{"q": 1}', "[1, 2]", "{"):
        path.write_text(bad)
        with pytest.raises(ParseError):
            load_config(path, _Toy)

    with pytest.raises(DataIOError):
        load_config(tmp_path / "absent.json", _Toy)

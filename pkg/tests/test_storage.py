import numpy as np
import pytest

from ionforge.errors import SchemaError
from ionforge.network import Dataset, init_params
from ionforge.storage import (CHECKPOINT_MAGIC, DATASET_MAGIC, config_hash,
                              load_checkpoint, load_dataset, save_checkpoint,
                              save_dataset, write_crosstalk_csv,
                              write_history_csv, write_scaling_csv)


def test_checkpoint_roundtrip(tmp_path):
    params = init_params(5, 16, seed=1)
    trailer = {"train_config": {"epochs": 3}, "chain_fingerprint": "abc",
               "metrics": {"best_val_similarity": 0.5}}
    path = tmp_path / "model.ionnet"
    save_checkpoint(path, params, trailer)
    loaded, meta = load_checkpoint(path)
    for a, b in zip(loaded.arrays(), params.arrays()):
        assert a.tobytes() == b.tobytes()
    assert meta == trailer
    assert loaded.n_ions == 5 and loaded.hidden_dim == 16


def test_checkpoint_layout(tmp_path):
    params = init_params(3, 4, seed=2)
    path = tmp_path / "model.ionnet"
    save_checkpoint(path, params, {})
    blob = path.read_bytes()
    assert blob[:8] == CHECKPOINT_MAGIC
    n = int.from_bytes(blob[8:12], "little")
    hidden = int.from_bytes(blob[12:16], "little")
    assert (n, hidden) == (3, 4)
    # first f64 after the header is w1[0, 0]
    first = np.frombuffer(blob[16:24], dtype="<f8")[0]
    assert first == params.w1[0, 0]


def test_checkpoint_bad_magic(tmp_path):
    path = tmp_path / "bad.ionnet"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
    with pytest.raises(SchemaError):
        load_checkpoint(path)


def test_checkpoint_truncated(tmp_path):
    params = init_params(4, 8, seed=3)
    path = tmp_path / "model.ionnet"
    save_checkpoint(path, params, {})
    path.write_bytes(path.read_bytes()[:40])
    with pytest.raises(SchemaError):
        load_checkpoint(path)


def test_dataset_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    targets = rng.normal(size=(12, 10))
    targets /= np.linalg.norm(targets, axis=1, keepdims=True)
    data = Dataset(targets=targets, seed=99, chain_fingerprint="deadbeef")
    path = tmp_path / "data.iondat"
    save_dataset(path, data)
    blob = path.read_bytes()
    assert blob[:8] == DATASET_MAGIC
    assert int.from_bytes(blob[8:12], "little") == 5  # N from pair count
    assert int.from_bytes(blob[12:16], "little") == 12
    loaded = load_dataset(path)
    assert loaded.targets.tobytes() == targets.tobytes()
    assert loaded.seed == 99
    assert loaded.chain_fingerprint == "deadbeef"


def test_dataset_bad_magic(tmp_path):
    path = tmp_path / "bad.iondat"
    path.write_bytes(b"WRONGMAG" + b"\x00" * 16)
    with pytest.raises(SchemaError):
        load_dataset(path)


def test_history_csv_columns(tmp_path):
    history = [{"epoch": 0, "lr": 1e-3, "train_cost": 0.5,
                "val_similarity": 0.9, "seconds": 1.25, "val_cost": 0.4,
                "floored": 0}]
    path = tmp_path / "hist.csv"
    write_history_csv(path, history)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "epoch,lr,train_cost,val_similarity,seconds"
    assert lines[1].startswith("0,0.001,0.5,0.9,")


def test_crosstalk_csv(tmp_path):
    path = tmp_path / "xtalk.csv"
    write_crosstalk_csv(path, [(0.0, 0.0, 1.0), (0.01, 0.08, 0.997)])
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "epsilon,graph_error,similarity"
    assert len(lines) == 3


def test_scaling_csv(tmp_path):
    recs = [{"n": 8, "F_linear": 0.99, "epoch_seconds": 1.0,
             "j_norm_rad_s": 2 * np.pi * 10.0},
            {"n": 10, "error": "ValueError: boom"}]
    path = tmp_path / "scaling.csv"
    write_scaling_csv(path, recs, ["linear"])
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,F_linear,epoch_seconds,j_norm_hz,error"
    assert lines[1].startswith("8,0.99,1.0,10.0")
    assert "boom" in lines[2]


def test_config_hash_stability():
    a = config_hash({"b": 1, "a": [1, 2]})
    b = config_hash({"a": [1, 2], "b": 1})
    assert a == b and len(a) == 16
    assert config_hash({"a": [1, 3]}) != a

"""On-disk formats: JSON documents, binary checkpoints and datasets, CSV tables.

Binary layouts (all little-endian):

checkpoint  "IONNET01" | u32 N | u32 hidden | w1 | b1 | w2 | b2 | JSON trailer
            arrays are float64 row-major: w1 (hidden x N(N-1)/2), b1 (hidden),
            w2 (N^2 x hidden), b2 (N^2); the trailer carries the training
            config, initialization descriptor, chain fingerprint, and metrics.

dataset     "IONDAT01" | u32 N | u32 count | samples | JSON trailer
            samples are float64 row-major (count x N(N-1)/2) normalized
            target vectors; the trailer carries seed and chain fingerprint.
"""

import hashlib
import json
import struct

import numpy as np

from .errors import SchemaError
from .network import Dataset, NetworkParams

CHECKPOINT_MAGIC = b"IONNET01"
DATASET_MAGIC = b"IONDAT01"


def config_hash(obj) -> str:
    """Stable short hash of a JSON-serializable configuration."""
    payload = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def write_json(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _write_f64(fh, arr):
    fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def save_checkpoint(path, params: NetworkParams, trailer: dict):
    """Write a checkpoint; the trailer is free-form JSON metadata."""
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", params.n_ions, params.hidden_dim))
        for arr in params.arrays():
            _write_f64(fh, arr)
        fh.write(json.dumps(trailer, sort_keys=True).encode())


def load_checkpoint(path):
    """Returns (NetworkParams, trailer dict)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != CHECKPOINT_MAGIC:
        raise SchemaError(f"{path}: bad magic {blob[:8]!r}, expected {CHECKPOINT_MAGIC!r}")
    n, hidden = struct.unpack("<II", blob[8:16])
    npair = n * (n - 1) // 2
    out = n * n
    sizes = [(hidden, npair), (hidden,), (out, hidden), (out,)]
    offset = 16
    arrays = []
    for shape in sizes:
        count = int(np.prod(shape))
        end = offset + 8 * count
        if end > len(blob):
            raise SchemaError(f"{path}: truncated checkpoint")
        arrays.append(np.frombuffer(blob[offset:end], dtype="<f8").reshape(shape).copy())
        offset = end
    try:
        trailer = json.loads(blob[offset:].decode()) if offset < len(blob) else {}
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: corrupt checkpoint trailer: {exc}") from exc
    params = NetworkParams(*arrays)
    return params, trailer


def save_dataset(path, dataset: Dataset):
    count, npair = dataset.targets.shape
    n = int(round((1 + np.sqrt(1 + 8 * npair)) / 2))
    with open(path, "wb") as fh:
        fh.write(DATASET_MAGIC)
        fh.write(struct.pack("<II", n, count))
        _write_f64(fh, dataset.targets)
        fh.write(json.dumps({
            "seed": dataset.seed,
            "chain_fingerprint": dataset.chain_fingerprint,
        }, sort_keys=True).encode())


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != DATASET_MAGIC:
        raise SchemaError(f"{path}: bad magic {blob[:8]!r}, expected {DATASET_MAGIC!r}")
    n, count = struct.unpack("<II", blob[8:16])
    npair = n * (n - 1) // 2
    end = 16 + 8 * count * npair
    if end > len(blob):
        raise SchemaError(f"{path}: truncated dataset")
    targets = np.frombuffer(blob[16:end], dtype="<f8").reshape(count, npair).copy()
    try:
        trailer = json.loads(blob[end:].decode()) if end < len(blob) else {}
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: corrupt dataset trailer: {exc}") from exc
    return Dataset(targets=targets, seed=trailer.get("seed", -1),
                   chain_fingerprint=trailer.get("chain_fingerprint", ""))


def write_history_csv(path, history):
    """Per-epoch training log: epoch, lr, train_cost, val_similarity, seconds."""
    with open(path, "w") as fh:
        fh.write("epoch,lr,train_cost,val_similarity,seconds\n")
        for row in history:
            fh.write(f"{row['epoch']},{row['lr']!r},{row['train_cost']!r},"
                     f"{row['val_similarity']!r},{row['seconds']!r}\n")


def write_crosstalk_csv(path, curve):
    """Crosstalk sweep; all three columns are dimensionless."""
    with open(path, "w") as fh:
        fh.write("epsilon,graph_error,similarity\n")
        for eps, err, f in curve:
            fh.write(f"{eps!r},{err!r},{f!r}\n")


def write_scaling_csv(path, records, kinds):
    """Scaling study table; frequencies are reported as omega / 2 pi in Hz."""
    cols = ["n"] + [f"F_{k}" for k in kinds] + ["epoch_seconds", "j_norm_hz", "error"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for rec in records:
            row = [str(rec["n"])]
            for k in kinds:
                row.append(repr(rec.get(f"F_{k}", float("nan"))))
            row.append(repr(rec.get("epoch_seconds", float("nan"))))
            norm = rec.get("j_norm_rad_s")
            row.append(repr(norm / (2 * np.pi)) if norm is not None else "nan")
            row.append(rec.get("error", ""))
            fh.write(",".join(row) + "\n")

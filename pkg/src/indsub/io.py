"""File formats: datasets, subspace bases, projection models, CSV tables.

Binary files are little-endian with a 4-byte magic and a uint16 version.
Matrices are stored column-major as float64. Every writer goes through
:func:`atomic_write` (temp file + rename).

Dataset::

    magic b"ISDS", version, n (u64), N (u64), K (u64)
    labels   N x int32
    features n*N x float64, column-major

Bases::

    magic b"ISBS", version, n (u64), K (u64), dims K x u64
    basis_1 ... basis_K, each n*d_k x float64, column-major

Model::

    magic b"ISPM", version, header length (u32), JSON header (UTF-8, sorted keys)
    arrays listed in header["arrays"], in order, float64 column-major
"""

from __future__ import annotations

import csv
import io
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .dataset import LabeledDataset
from .ispp import ProjectionModel
from .subspace import Subspace

__all__ = [
    "FormatError",
    "atomic_write",
    "write_dataset",
    "read_dataset",
    "dataset_to_bytes",
    "dataset_from_bytes",
    "read_dataset_csv",
    "write_dataset_csv",
    "write_bases",
    "read_bases",
    "write_model",
    "read_model",
    "model_summary",
    "write_csv",
]

VERSION = 1
_DS = struct.Struct("<4sHQQQ")
_BS = struct.Struct("<4sHQQ")
_PM = struct.Struct("<4sHI")


class FormatError(ValueError):
    """A file does not follow the expected layout."""


def atomic_write(path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _colmajor(a) -> bytes:
    return np.asarray(a, dtype="<f8").tobytes(order="F")


def _take(buf, offset, count, dtype):
    size = np.dtype(dtype).itemsize * count
    if offset + size > len(buf):
        raise FormatError("file is truncated")
    return np.frombuffer(buf, dtype=dtype, count=count, offset=offset), offset + size


def dataset_to_bytes(data: LabeledDataset) -> bytes:
    n, N = data.features.shape
    head = _DS.pack(b"ISDS", VERSION, n, N, data.class_count)
    return head + data.labels.astype("<i4").tobytes() + _colmajor(data.features)


def dataset_from_bytes(buf: bytes) -> LabeledDataset:
    if len(buf) < _DS.size:
        raise FormatError("file too short for a dataset header")
    magic, version, n, N, K = _DS.unpack_from(buf)
    if magic != b"ISDS":
        raise FormatError(f"bad dataset magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported dataset version {version}")
    labels, off = _take(buf, _DS.size, N, "<i4")
    flat, off = _take(buf, off, n * N, "<f8")
    if off != len(buf):
        raise FormatError("trailing bytes after dataset payload")
    features = flat.reshape((n, N), order="F").astype(np.float64)
    return LabeledDataset(features, labels.astype(np.int64), int(K))


def write_dataset(path, data: LabeledDataset):
    atomic_write(path, dataset_to_bytes(data))


def read_dataset(path) -> LabeledDataset:
    return dataset_from_bytes(Path(path).read_bytes())


def read_dataset_csv(path, normalize=True) -> LabeledDataset:
    """Rows are ``label, f1, ..., fn``; an optional non-numeric header row is skipped."""
    labels, rows = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                values = [float(c) for c in row]
            except ValueError:
                if lineno == 1:
                    continue
                raise FormatError(f"{path}:{lineno}: non-numeric field") from None
            if len(values) < 2:
                raise FormatError(f"{path}:{lineno}: need a label and at least one feature")
            if rows and len(values) - 1 != len(rows[0]):
                raise FormatError(f"{path}:{lineno}: expected {len(rows[0])} features, got {len(values) - 1}")
            if values[0] != int(values[0]):
                raise FormatError(f"{path}:{lineno}: label must be an integer")
            labels.append(int(values[0]))
            rows.append(values[1:])
    if not rows:
        raise FormatError(f"{path}: no samples")
    data = LabeledDataset(np.array(rows).T, np.array(labels))
    return data.normalized() if normalize else data


def write_dataset_csv(path, data: LabeledDataset):
    header = ["label"] + [f"f{i + 1}" for i in range(data.ambient_dim)]
    rows = [[int(lbl)] + [repr(float(v)) for v in col] for lbl, col in zip(data.labels, data.features.T)]
    write_csv(path, header, rows)


def write_bases(path, subspaces):
    subspaces = list(subspaces)
    n = subspaces[0].ambient_dim
    head = _BS.pack(b"ISBS", VERSION, n, len(subspaces))
    dims = np.array([s.dim for s in subspaces], dtype="<u8").tobytes()
    atomic_write(path, head + dims + b"".join(_colmajor(s.basis) for s in subspaces))


def read_bases(path) -> list[Subspace]:
    buf = Path(path).read_bytes()
    if len(buf) < _BS.size:
        raise FormatError("file too short for a bases header")
    magic, version, n, K = _BS.unpack_from(buf)
    if magic != b"ISBS" or version != VERSION:
        raise FormatError(f"bad bases header {magic!r} v{version}")
    dims, off = _take(buf, _BS.size, K, "<u8")
    out = []
    for d in dims:
        flat, off = _take(buf, off, int(n * d), "<f8")
        out.append(Subspace(flat.reshape((n, int(d)), order="F").astype(np.float64)))
    if off != len(buf):
        raise FormatError("trailing bytes after bases payload")
    return out


_MODEL_ARRAYS = ("matrix", "mean", "pairs")


def write_model(path, model: ProjectionModel):
    arrays = [(name, getattr(model, name)) for name in _MODEL_ARRAYS if getattr(model, name) is not None]
    header = {
        "method": model.method,
        "lam": model.lam,
        "per_class_cosine": list(model.per_class_cosine),
        "iterations_used": list(model.iterations_used),
        "converged": list(model.converged),
        "seed": model.seed,
        "rank_deficient": model.rank_deficient,
        "extra": model.extra,
        "arrays": [[name, list(np.atleast_2d(a.reshape(a.shape[0], -1)).shape)] for name, a in arrays],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    payload = b"".join(_colmajor(a) for _, a in arrays)
    atomic_write(path, _PM.pack(b"ISPM", VERSION, len(blob)) + blob + payload)


def read_model(path) -> ProjectionModel:
    """Load a model; orthonormality of the projection is re-checked on construction."""
    buf = Path(path).read_bytes()
    if len(buf) < _PM.size:
        raise FormatError("file too short for a model header")
    magic, version, hlen = _PM.unpack_from(buf)
    if magic != b"ISPM" or version != VERSION:
        raise FormatError(f"bad model header {magic!r} v{version}")
    header = json.loads(buf[_PM.size : _PM.size + hlen])
    off = _PM.size + hlen
    arrays = {}
    for name, (rows, cols) in header["arrays"]:
        flat, off = _take(buf, off, rows * cols, "<f8")
        a = flat.reshape((rows, cols), order="F").astype(np.float64)
        arrays[name] = a[:, 0] if name == "mean" else a
    if off != len(buf):
        raise FormatError("trailing bytes after model payload")
    return ProjectionModel(
        arrays["matrix"],
        header["method"],
        lam=header["lam"],
        per_class_cosine=tuple(header["per_class_cosine"]),
        iterations_used=tuple(header["iterations_used"]),
        converged=tuple(header["converged"]),
        seed=header["seed"],
        mean=arrays.get("mean"),
        pairs=arrays.get("pairs"),
        rank_deficient=header["rank_deficient"],
        extra=header["extra"],
    )


def model_summary(model: ProjectionModel) -> str:
    lines = [
        f"method={model.method}",
        f"ambient_dim={model.ambient_dim}",
        f"dim={model.dim}",
        f"lambda={model.lam!r}",
        f"seed={model.seed}",
        f"rank_deficient={str(model.rank_deficient).lower()}",
    ]
    for k, c in enumerate(model.per_class_cosine, start=1):
        it = model.iterations_used[k - 1] if model.iterations_used else ""
        conv = model.converged[k - 1] if model.converged else ""
        lines.append(f"class{k}.gamma={c!r} class{k}.iterations={it} class{k}.converged={str(conv).lower()}")
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    atomic_write(path, buf.getvalue().encode())

"""On-disk formats: logits matrices, datasets, loss histories.

Binary logits layout: magic "GCTC", one version byte, uint32 T and V
(little-endian), then T*V float64 little-endian values row-major. CSV and
JSON carry the same matrix for interop; readers sniff the magic unless a
format is forced.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .vocab import Label

MAGIC = b"GCTC"
VERSION = 1
_HEADER = struct.Struct("<4sBII")


def write_logits(path, matrix: np.ndarray, fmt: str = "binary") -> None:
    matrix = np.ascontiguousarray(np.asarray(matrix, dtype=np.float64))
    if matrix.ndim != 2:
        raise ValueError(f"logits must be 2-D, got shape {matrix.shape}")
    path = Path(path)
    if fmt == "binary":
        T, V = matrix.shape
        payload = _HEADER.pack(MAGIC, VERSION, T, V) + matrix.astype("<f8").tobytes()
        path.write_bytes(payload)
    elif fmt == "csv":
        np.savetxt(path, matrix, delimiter=",", fmt="%.17g")
    elif fmt == "json":
        path.write_text(json.dumps(matrix.tolist()), encoding="utf-8")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_logits(path, fmt: str | None = None) -> np.ndarray:
    """Load a logits matrix; sniffs binary vs text when fmt is None."""
    path = Path(path)
    raw = path.read_bytes()
    if fmt is None:
        if raw[:4] == MAGIC:
            fmt = "binary"
        elif raw.lstrip()[:1] == b"[":
            fmt = "json"
        else:
            fmt = "csv"
    if fmt == "binary":
        if len(raw) < _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, T, V = _HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        expect = _HEADER.size + 8 * T * V
        if len(raw) != expect:
            raise ValueError(f"{path}: expected {expect} bytes, found {len(raw)}")
        return (
            np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
            .reshape(T, V)
            .astype(np.float64)
        )
    if fmt == "json":
        matrix = np.asarray(json.loads(raw.decode("utf-8")), dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError(f"{path}: JSON logits must be a 2-D array")
        return matrix
    if fmt == "csv":
        matrix = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
        return matrix
    raise ValueError(f"unknown format {fmt!r}")


def write_dataset(path, dataset) -> None:
    """JSON lines, one {"features": [[...]], "label": "..."} per sample."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for features, label in dataset:
            rec = {
                "features": np.asarray(features, dtype=np.float64).tolist(),
                "label": str(label),
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_dataset(path) -> list[tuple[np.ndarray, Label]]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                features = np.asarray(rec["features"], dtype=np.float64)
                label = Label(rec["label"])
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}: bad record at line {n}: {exc}") from exc
            if features.ndim != 2:
                raise ValueError(f"{path}: features at line {n} must be 2-D")
            out.append((features, label))
    return out


def write_history(path, losses) -> None:
    """Loss history CSV: header then one "epoch,loss" row per epoch."""
    lines = ["epoch,loss"]
    lines += [f"{epoch},{value:.17g}" for epoch, value in enumerate(losses, start=1)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_history(path) -> list[float]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    out = []
    for line in lines:
        if not line or line.startswith("epoch"):
            continue
        _, value = line.split(",", 1)
        out.append(float(value))
    return out

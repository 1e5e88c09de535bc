"""On-disk formats: headerless CSV and the ``QUED`` little-endian binary."""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .moments import Dataset, as_samples

MAGIC = b"QUED"
_HEADER = struct.Struct("<4sII")


def save_binary(data, path) -> None:
    x = np.ascontiguousarray(as_samples(data), dtype="<f8")
    n, d = x.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, d))
        fh.write(x.tobytes())


def load_binary(path) -> Dataset:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise DataFormatError(f"{path}: too short for a QUED header")
    magic, n, d = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}")
    body = raw[_HEADER.size:]
    if len(body) != 8 * n * d:
        raise DataFormatError(f"{path}: expected {n * d} float64 values, found {len(body) / 8:g}")
    return Dataset(np.frombuffer(body, dtype="<f8").reshape(n, d))


def save_csv(data, path) -> None:
    x = as_samples(data)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in x:
            # repr of a Python float is the shortest round-trip decimal
            writer.writerow([repr(float(v)) for v in row])


def load_csv(path, header: bool = False) -> Dataset:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if header:
            next(reader, None)
        for lineno, row in enumerate(reader, start=2 if header else 1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DataFormatError(f"{path}: no samples")
    if len({len(r) for r in rows}) != 1:
        raise DataFormatError(f"{path}: ragged rows")
    return Dataset(np.array(rows))


def is_binary(path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(4) == MAGIC


def load_dataset(path, header: bool = False) -> Dataset:
    """Load either format, sniffing the magic bytes."""
    if is_binary(path):
        return load_binary(path)
    return load_csv(path, header=header)


def save_dataset(data, path) -> None:
    if str(path).endswith((".bin", ".qued")):
        save_binary(data, path)
    else:
        save_csv(data, path)


def save_labels(labels, path) -> None:
    with open(path, "w") as fh:
        for v in np.asarray(labels, dtype=int):
            fh.write(f"{v}\n")


def load_labels(path, header: bool = False) -> np.ndarray:
    """Read a 0/1 column (the last column if several are present)."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if header:
            next(reader, None)
        for row in reader:
            if not row:
                continue
            v = float(row[-1])
            if v not in (0.0, 1.0):
                raise DataFormatError(f"{path}: label {row[-1]!r} is not 0/1")
            out.append(int(v))
    return np.array(out, dtype=int)


def save_scores(scores, path=None, fmt: str = "csv") -> str:
    scores = np.asarray(scores, dtype=float)
    if fmt == "json":
        text = json.dumps({"scores": [float(s) for s in scores]})
    else:
        text = "index,score\n" + "".join(f"{i},{float(s)!r}\n" for i, s in enumerate(scores))
    if path is not None:
        Path(path).write_text(text)
    return text


def load_scores(path) -> np.ndarray:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        return np.asarray(obj["scores"] if "scores" in obj else obj["tau"], dtype=float)
    rows = list(csv.reader(text.splitlines()))
    if rows and rows[0] and rows[0][0].strip() == "index":
        rows = rows[1:]
    rows = [r for r in rows if r]
    idx = np.array([int(r[0]) for r in rows])
    vals = np.array([float(r[1]) for r in rows])
    out = np.empty(len(rows))
    out[idx] = vals
    return out

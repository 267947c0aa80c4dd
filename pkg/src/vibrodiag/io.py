"""File formats: WAV/CSV records, dataset manifests, the "CBS1" binary tensor
container, and binary PGM heatmaps.
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .dsp import SignalRecord
from .errors import MissingArtifact, ShapeMismatch, UsageError

TENSOR_MAGIC = b"CBS1"


# ---------------------------------------------------------------------------
# CBS1 tensor container
# ---------------------------------------------------------------------------


def save_tensor(path, data: np.ndarray) -> None:
    """Header: "CBS1", u32-LE H, W, C; payload: f32-LE in [C][H][W] order."""
    data = np.asarray(data)
    if data.ndim != 3:
        raise ShapeMismatch(f"expected H x W x C tensor, got shape {data.shape}")
    h, w, c = data.shape
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(struct.pack("<III", h, w, c))
        fh.write(np.ascontiguousarray(data.transpose(2, 0, 1), dtype="<f4").tobytes())


def load_tensor(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f"tensor file not found: {path}")
    raw = path.read_bytes()
    if raw[:4] != TENSOR_MAGIC:
        raise UsageError(f"{path} is not a CBS1 tensor file")
    h, w, c = struct.unpack("<III", raw[4:16])
    values = np.frombuffer(raw[16:], dtype="<f4")
    if values.size != h * w * c:
        raise UsageError(f"{path}: payload size does not match header")
    return values.reshape(c, h, w).transpose(1, 2, 0).astype(np.float64)


# ---------------------------------------------------------------------------
# PGM heatmaps
# ---------------------------------------------------------------------------


def save_pgm(path, plane: np.ndarray) -> None:
    """Binary (P5) graymap; the plane is min-max scaled to 0..255."""
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise ShapeMismatch("PGM output needs a 2-D plane")
    lo, hi = plane.min(), plane.max()
    scaled = np.zeros_like(plane) if hi == lo else (plane - lo) / (hi - lo)
    pixels = (scaled * 255).round().astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{plane.shape[1]} {plane.shape[0]}\n255\n".encode())
        fh.write(pixels.tobytes())


# ---------------------------------------------------------------------------
# Records: WAV / CSV + manifest
# ---------------------------------------------------------------------------


def save_record_wav(path, record: SignalRecord) -> None:
    wavfile.write(path, record.sample_rate, record.samples.astype(np.float32))


def load_record_wav(path, record_id: str, channels: list[str], condition=None) -> SignalRecord:
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f"record file not found: {path}")
    rate, data = wavfile.read(path)
    if data.ndim == 1:
        data = data[:, None]
    if not channels:
        channels = [f"ch{i}" for i in range(data.shape[1])]
    return SignalRecord(
        record_id=record_id,
        sample_rate=int(rate),
        channels=channels,
        samples=data.astype(np.float64),
        condition=condition,
    )


def save_record_csv(path, record: SignalRecord) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(record.channels)
        writer.writerows(record.samples.tolist())


def load_record_csv(path, record_id: str, sample_rate: int, condition=None) -> SignalRecord:
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f"record file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        channels = next(reader)
        samples = np.array([[float(v) for v in row] for row in reader])
    return SignalRecord(
        record_id=record_id,
        sample_rate=sample_rate,
        channels=channels,
        samples=samples,
        condition=condition,
    )


def save_manifest(path, entries: list[dict]) -> None:
    """Entries: {record_id, path, sample_rate, condition?, split?, channels?}."""
    Path(path).write_text(json.dumps({"records": entries}, indent=2) + "\n")


def load_manifest(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f"manifest not found: {path}")
    return json.loads(path.read_text())["records"]


def load_record(entry: dict) -> SignalRecord:
    """Load one manifest entry, dispatching on the file extension."""
    p = Path(entry["path"])
    if p.suffix.lower() == ".wav":
        return load_record_wav(
            p,
            record_id=entry["record_id"],
            channels=entry.get("channels", []),
            condition=entry.get("condition"),
        )
    if p.suffix.lower() == ".csv":
        return load_record_csv(
            p,
            record_id=entry["record_id"],
            sample_rate=entry["sample_rate"],
            condition=entry.get("condition"),
        )
    raise UsageError(f"unsupported record format: {p.suffix}")


def write_csv(path, header: list[str], rows: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)

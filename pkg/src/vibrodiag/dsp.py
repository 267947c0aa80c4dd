"""Signal ingestion and log-Mel spectrogram extraction.

Pipeline: truncate the raw multi-channel record, compute a per-channel
magnitude-squared STFT, apply a triangular Mel filterbank (unit-area
normalized), take log10, and min-max normalize per channel with statistics
fitted on training data only.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConfigInvalid,
    EmptyTrainingSet,
    RecordTooShort,
    ShapeMismatch,
)


@dataclass
class SignalRecord:
    """One multi-channel switching-operation recording."""

    record_id: str
    sample_rate: int
    channels: list[str]
    samples: np.ndarray  # (n_samples, n_channels), float
    condition: str | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2:
            raise ShapeMismatch("samples must be 2-D (n_samples, n_channels)")
        if self.samples.shape[1] != len(self.channels):
            raise ShapeMismatch(
                f"{self.samples.shape[1]} sample columns for "
                f"{len(self.channels)} channel names"
            )
        if self.sample_rate <= 0:
            raise ConfigInvalid("sample_rate must be positive")
        if len(set(self.channels)) != len(self.channels):
            raise ConfigInvalid("channel names must be unique")

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[1]


@dataclass
class MelConfig:
    """STFT + Mel filterbank parameters."""

    mel_bins: int = 128
    hop_length: int = 501
    fft_size: int = 2048
    window: str = "hann"
    f_min: float = 0.0
    f_max: float | None = None  # None -> sample_rate / 2
    log_floor: float = 1e-10

    def validate(self, sample_rate: int) -> None:
        f_max = self.resolve_f_max(sample_rate)
        if self.fft_size < self.hop_length:
            raise ConfigInvalid("fft_size must be >= hop_length")
        if self.mel_bins <= 0 or self.hop_length <= 0 or self.fft_size <= 0:
            raise ConfigInvalid("mel_bins, hop_length, fft_size must be positive")
        if not (0 <= self.f_min < f_max <= sample_rate / 2):
            raise ConfigInvalid(
                f"need 0 <= f_min < f_max <= nyquist, got [{self.f_min}, {f_max}]"
            )
        if self.log_floor <= 0:
            raise ConfigInvalid("log_floor must be positive")
        if self.window != "hann":
            raise ConfigInvalid(f"unsupported window {self.window!r}")

    def resolve_f_max(self, sample_rate: int) -> float:
        return sample_rate / 2 if self.f_max is None else self.f_max

    def to_dict(self) -> dict:
        return {
            "mel_bins": self.mel_bins,
            "hop_length": self.hop_length,
            "fft_size": self.fft_size,
            "window": self.window,
            "f_min": self.f_min,
            "f_max": self.f_max,
            "log_floor": self.log_floor,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MelConfig":
        return cls(**d)


@dataclass
class MelSpectrogram:
    """H x W x C log-Mel tensor plus the normalization stats that produced it."""

    data: np.ndarray  # (mel_bins, frames, channels)
    record_id: str = ""
    condition: str | None = None
    norm_stats: np.ndarray | None = None  # (channels, 2): per-channel (min, max)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3:
            raise ShapeMismatch("spectrogram data must be H x W x C")
        if not np.all(np.isfinite(self.data)):
            raise ShapeMismatch("spectrogram contains NaN/Inf")

    @property
    def mel_bins(self) -> int:
        return self.data.shape[0]

    @property
    def frames(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def truncate(record: SignalRecord, duration_ms: int) -> SignalRecord:
    """Keep the first `duration_ms` of every channel."""
    n_keep = duration_ms * record.sample_rate // 1000
    if record.n_samples < n_keep:
        raise RecordTooShort(
            f"record {record.record_id!r} has {record.n_samples} samples, "
            f"needs {n_keep}"
        )
    return replace(record, samples=record.samples[:n_keep].copy())


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    mel_bins: int, fft_size: int, sample_rate: int, f_min: float, f_max: float
) -> tuple[np.ndarray, np.ndarray]:
    """Triangular unit-area filterbank.

    Returns (weights of shape (mel_bins, fft_size//2 + 1), band center
    frequencies in Hz).
    """
    n_freqs = fft_size // 2 + 1
    fft_freqs = np.linspace(0.0, sample_rate / 2, n_freqs)
    mel_pts = np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), mel_bins + 2)
    hz_pts = mel_to_hz(mel_pts)

    weights = np.zeros((mel_bins, n_freqs))
    for i in range(mel_bins):
        lo, ctr, hi = hz_pts[i], hz_pts[i + 1], hz_pts[i + 2]
        rising = (fft_freqs - lo) / max(ctr - lo, 1e-12)
        falling = (hi - fft_freqs) / max(hi - ctr, 1e-12)
        tri = np.maximum(0.0, np.minimum(rising, falling))
        # Slaney-style: scale each triangle to unit area.
        tri *= 2.0 / (hi - lo)
        weights[i] = tri
    return weights, hz_pts[1:-1]


def _stft_power(x: np.ndarray, cfg: MelConfig) -> np.ndarray:
    """Magnitude-squared STFT with centered frames and reflection padding.

    Returns (fft_size//2 + 1, n_frames) with n_frames = ceil(len(x) / hop).
    """
    n = len(x)
    n_frames = -(-n // cfg.hop_length)
    pad = cfg.fft_size // 2
    xp = np.pad(x, pad, mode="reflect")
    window = np.hanning(cfg.fft_size)
    starts = np.arange(n_frames) * cfg.hop_length
    frames = np.lib.stride_tricks.sliding_window_view(xp, cfg.fft_size)[starts]
    spec = np.fft.rfft(frames * window, axis=1)
    return (spec.real**2 + spec.imag**2).T


def mel_spectrogram(record: SignalRecord, cfg: MelConfig) -> MelSpectrogram:
    """Per-channel log-Mel spectrogram, channels stacked along the last axis."""
    cfg.validate(record.sample_rate)
    f_max = cfg.resolve_f_max(record.sample_rate)
    fb, _ = mel_filterbank(
        cfg.mel_bins, cfg.fft_size, record.sample_rate, cfg.f_min, f_max
    )
    planes = []
    for c in range(record.n_channels):
        power = _stft_power(record.samples[:, c], cfg)
        mel = fb @ power
        planes.append(np.log10(mel + cfg.log_floor))
    data = np.stack(planes, axis=-1)
    return MelSpectrogram(
        data=data, record_id=record.record_id, condition=record.condition
    )


def fit_normalizer(train: list[MelSpectrogram]) -> np.ndarray:
    """Per-channel global (min, max) over all training spectrograms.

    Returns an array of shape (channels, 2).
    """
    if not train:
        raise EmptyTrainingSet("no training spectrograms")
    shape = train[0].data.shape
    for s in train:
        if s.data.shape != shape:
            raise ShapeMismatch(f"shape {s.data.shape} != {shape}")
    stacked = np.stack([s.data for s in train])  # (N, H, W, C)
    mins = stacked.min(axis=(0, 1, 2))
    maxs = stacked.max(axis=(0, 1, 2))
    return np.stack([mins, maxs], axis=1)


def normalize(spec: MelSpectrogram, stats: np.ndarray) -> MelSpectrogram:
    """Affine map to [0, 1] per channel, clamped; degenerate channels -> 0."""
    stats = np.asarray(stats, dtype=np.float64)
    if stats.shape != (spec.channels, 2):
        raise ShapeMismatch(
            f"stats shape {stats.shape} does not match {spec.channels} channels"
        )
    mins = stats[:, 0]
    span = stats[:, 1] - stats[:, 0]
    out = np.zeros_like(spec.data)
    ok = span > 0
    out[:, :, ok] = (spec.data[:, :, ok] - mins[ok]) / span[ok]
    np.clip(out, 0.0, 1.0, out=out)
    return MelSpectrogram(
        data=out,
        record_id=spec.record_id,
        condition=spec.condition,
        norm_stats=stats.copy(),
    )

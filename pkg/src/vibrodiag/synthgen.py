"""Synthetic multi-channel switching-operation signals with five planted
spring/damper conditions (nSnD, nSdD, hSnD, lSnD, lSdD).

Each record is a sum of exponentially damped multi-sine bursts per channel,
plus white noise and per-record jitter. The waveform constants are generator
parameters only; they are not claims about real switchgear. The condition
signatures follow the qualitative physics: a stiffer spring stores more
energy, so it acts sooner and hits harder with faster ring-down and a
brighter spectrum; a degraded damper adds a broadband event near 200 ms; a
weak spring spreads late energy and boosts high frequencies.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .dsp import SignalRecord

DEFAULT_CHANNELS = ["hor", "ver", "axi", "mic"]

# Burst carrier frequencies (Hz) and their base weights.
CARRIER_FREQS = np.array([800.0, 2000.0, 5000.0, 9000.0, 15000.0, 22000.0])
CARRIER_WEIGHTS = np.array([1.0, 0.9, 0.8, 0.7, 0.5, 0.3])
HIGH_FREQ_MASK = CARRIER_FREQS >= 9000.0

# Per-channel gains per carrier: accelerometers emphasize different bands,
# the microphone attenuates everything above ~15 kHz.
CHANNEL_GAINS = np.array(
    [
        [1.0, 1.0, 0.9, 0.8, 0.7, 0.6],  # hor
        [0.9, 1.1, 1.0, 0.9, 0.8, 0.5],  # ver
        [1.1, 0.9, 1.0, 1.0, 0.9, 0.7],  # axi
        [0.7, 0.8, 0.6, 0.5, 0.3, 0.1],  # mic
    ]
)


@dataclass
class ConditionSpec:
    name: str
    # (time_ms, amplitude_scale, damping_rate_per_second)
    events: list[tuple[float, float, float]]
    # Broadband extra event from a degraded damper: (time_ms, amplitude).
    extra_event: tuple[float, float] | None = None
    high_freq_bias: float = 0.0  # added weight on carriers >= 9 kHz
    noise_std: float = 0.02
    time_jitter_ms: float = 2.0
    amp_jitter: float = 0.05


_BASE_EVENTS = [
    (5.0, 1.0, 30.0),
    (60.0, 0.8, 35.0),
    (120.0, 0.6, 30.0),
    (300.0, 0.5, 25.0),
]

CONDITIONS: dict[str, ConditionSpec] = {
    "nSnD": ConditionSpec(name="nSnD", events=list(_BASE_EVENTS)),
    "nSdD": ConditionSpec(
        name="nSdD",
        events=list(_BASE_EVENTS),
        extra_event=(200.0, 0.9),
    ),
    "hSnD": ConditionSpec(
        name="hSnD",
        events=[(0.75 * t, 1.6 * a, 1.3 * lam) for t, a, lam in _BASE_EVENTS],
        high_freq_bias=0.4,
    ),
    "lSnD": ConditionSpec(
        name="lSnD",
        events=[
            (5.0, 1.15, 22.0),
            (60.0, 0.9, 26.0),
            (200.0, 0.8, 22.0),
            (300.0, 0.25, 45.0),
        ],
        high_freq_bias=0.4,
    ),
    "lSdD": ConditionSpec(
        name="lSdD",
        events=[
            (5.0, 1.15, 22.0),
            (60.0, 0.9, 26.0),
            (200.0, 0.8, 22.0),
            (300.0, 0.25, 45.0),
        ],
        extra_event=(205.0, 0.9),
        high_freq_bias=0.4,
    ),
}

CONDITION_NAMES = list(CONDITIONS)


def _burst(
    t: np.ndarray,
    t0_s: float,
    amp: float,
    lam: float,
    weights: np.ndarray,
    gains: np.ndarray,
    phases: np.ndarray,
) -> np.ndarray:
    """One damped multi-sine event on a single channel."""
    dt = t - t0_s
    active = dt >= 0
    out = np.zeros_like(t)
    if not active.any():
        return out
    env = amp * np.exp(-lam * dt[active])
    carriers = np.sin(
        2.0 * np.pi * CARRIER_FREQS[None, :] * dt[active, None] + phases[None, :]
    )
    out[active] = env * (carriers @ (weights * gains))
    return out


def generate(
    spec: ConditionSpec,
    n_records: int,
    channels: list[str] | None = None,
    sample_rate: int = 100_000,
    duration_ms: int = 550,
    seed: int = 0,
) -> list[SignalRecord]:
    """Seed-deterministic labeled records for one condition."""
    channels = channels or list(DEFAULT_CHANNELS)
    n = duration_ms * sample_rate // 1000
    t = np.arange(n) / sample_rate
    records = []
    for i in range(n_records):
        rng = np.random.default_rng([seed, zlib.crc32(spec.name.encode()), i])
        weights = CARRIER_WEIGHTS + spec.high_freq_bias * HIGH_FREQ_MASK
        samples = np.zeros((n, len(channels)))
        events = list(spec.events)
        if spec.extra_event is not None:
            t0, amp = spec.extra_event
            # Degraded damper: broadband, all carriers weighted equally.
            events = events + [(t0, amp, 45.0)]
        for k, (t0_ms, amp, lam) in enumerate(events):
            t0 = (t0_ms + rng.uniform(-spec.time_jitter_ms, spec.time_jitter_ms)) / 1000
            t0 = max(t0, 0.0)
            a = amp * (1.0 + rng.uniform(-spec.amp_jitter, spec.amp_jitter))
            broadband = spec.extra_event is not None and k == len(events) - 1
            w = np.ones_like(CARRIER_WEIGHTS) if broadband else weights
            for c in range(len(channels)):
                gains = CHANNEL_GAINS[c % CHANNEL_GAINS.shape[0]]
                phases = rng.uniform(0, 2 * np.pi, size=len(CARRIER_FREQS))
                samples[:, c] += _burst(t, t0, a, lam, w, gains, phases)
        samples += rng.normal(0.0, spec.noise_std, size=samples.shape)
        records.append(
            SignalRecord(
                record_id=f"{spec.name}-{seed}-{i:03d}",
                sample_rate=sample_rate,
                channels=list(channels),
                samples=samples,
                condition=spec.name,
            )
        )
    return records


def generate_scenario(
    counts: dict[str, int],
    sample_rate: int = 100_000,
    duration_ms: int = 550,
    channels: list[str] | None = None,
    seed: int = 0,
) -> list[SignalRecord]:
    """Generate records for several conditions in a fixed, seeded order."""
    records = []
    for name in CONDITION_NAMES:
        if counts.get(name, 0) > 0:
            records.extend(
                generate(
                    CONDITIONS[name],
                    counts[name],
                    channels=channels,
                    sample_rate=sample_rate,
                    duration_ms=duration_ms,
                    seed=seed,
                )
            )
    return records

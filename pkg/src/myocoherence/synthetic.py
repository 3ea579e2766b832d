"""Synthetic multichannel recordings with controllable coupling structure.

Real gesture data cannot ship with the package, so end-to-end behavior is
exercised on generated recordings built to have the one property the
pipeline measures: channels that share an underlying source are coherent,
channels that do not are not.  Each synthetic "gesture" partitions the 12
channels into contiguous groups; every group shares one band-limited noise
source plus independent per-channel noise, giving block-structured
coherence matrices.  The 17 partitions (and per-gesture source bands) are
pairwise distinct, so a classifier that reads coherence structure can tell
the gestures apart, while per-trial noise keeps repetitions from being
copies of each other.

Recordings mimic the acquisition layout: rest gaps (stimulus 0) between
movement spans, a per-sample repetition stream, a common 50 Hz mains
component for the notch stage to remove, all at 2000 Hz.
"""

from __future__ import annotations

import numpy as np

from .datamodel import (
    N_CHANNELS,
    N_GESTURES,
    N_REPETITIONS,
    SAMPLE_RATE_HZ,
    SubjectDataset,
)
from .errors import ConfigError

# Group sizes per gesture (contiguous channel blocks, summing to 12).
GESTURE_PARTITIONS: tuple[tuple[int, ...], ...] = (
    (12,),
    (6, 6),
    (4, 4, 4),
    (3, 3, 3, 3),
    (2, 2, 2, 2, 2, 2),
    (1, 11),
    (2, 10),
    (3, 9),
    (4, 8),
    (5, 7),
    (1, 2, 9),
    (1, 3, 8),
    (2, 3, 7),
    (1, 4, 7),
    (2, 4, 6),
    (3, 4, 5),
    (1, 5, 6),
)
assert len(GESTURE_PARTITIONS) == N_GESTURES
assert all(sum(p) == N_CHANNELS for p in GESTURE_PARTITIONS)


def channel_groups(gesture: int) -> list[np.ndarray]:
    """Channel index blocks sharing a source under the given gesture."""
    if not 1 <= gesture <= N_GESTURES:
        raise ConfigError(f"gesture must be 1..{N_GESTURES}, got {gesture}")
    sizes = GESTURE_PARTITIONS[gesture - 1]
    edges = np.cumsum((0,) + sizes)
    return [np.arange(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]


def source_band(gesture: int) -> tuple[float, float]:
    """Per-gesture source band (Hz), inside the 10-900 Hz passband."""
    low = 20.0 + 8.0 * (gesture - 1)
    return low, low + 120.0


def _bandlimited_noise(rng: np.random.Generator, n: int, fs: float, low: float, high: float):
    """Unit-variance Gaussian noise confined to [low, high] Hz."""
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.arange(spectrum.size) * (fs / n)
    spectrum[(freqs < low) | (freqs > high)] = 0
    x = np.fft.irfft(spectrum, n)
    return x / x.std()


def generate_trial(
    gesture: int,
    rng: np.random.Generator,
    n_samples: int,
    sample_rate_hz: float = SAMPLE_RATE_HZ,
    noise_scale: float = 0.35,
) -> np.ndarray:
    """One movement span, shape (n_samples, 12)."""
    low, high = source_band(gesture)
    emg = np.empty((n_samples, N_CHANNELS))
    for group in channel_groups(gesture):
        source = _bandlimited_noise(rng, n_samples, sample_rate_hz, low, high)
        for channel in group:
            emg[:, channel] = source + noise_scale * rng.standard_normal(n_samples)
    return emg


def generate_subject(
    subject_id: int = 1,
    seed: int = 0,
    move_seconds: float = 5.0,
    rest_seconds: float = 0.5,
    sample_rate_hz: float = SAMPLE_RATE_HZ,
    noise_scale: float = 0.35,
    mains_amplitude: float = 0.15,
) -> SubjectDataset:
    """A complete recording: 17 gestures x 6 repetitions plus rest gaps.

    Deterministic in (seed, subject_id).  Movement spans are laid out
    gesture-major with a rest span before each, matching how trials are
    segmented downstream.
    """
    if move_seconds <= 0 or rest_seconds < 0:
        raise ConfigError("move_seconds must be positive and rest_seconds nonnegative")
    rng = np.random.default_rng([int(seed), int(subject_id)])
    n_move = int(round(move_seconds * sample_rate_hz))
    n_rest = int(round(rest_seconds * sample_rate_hz))

    emg_blocks, stim_blocks, rep_blocks = [], [], []

    def _rest():
        if n_rest == 0:
            return
        emg_blocks.append(0.05 * rng.standard_normal((n_rest, N_CHANNELS)))
        stim_blocks.append(np.zeros(n_rest, dtype=np.int64))
        rep_blocks.append(np.zeros(n_rest, dtype=np.int64))

    for gesture in range(1, N_GESTURES + 1):
        for repetition in range(1, N_REPETITIONS + 1):
            _rest()
            emg_blocks.append(
                generate_trial(gesture, rng, n_move, sample_rate_hz, noise_scale)
            )
            stim_blocks.append(np.full(n_move, gesture, dtype=np.int64))
            rep_blocks.append(np.full(n_move, repetition, dtype=np.int64))
    _rest()

    emg = np.concatenate(emg_blocks)
    if mains_amplitude:
        t = np.arange(emg.shape[0]) / sample_rate_hz
        phase = rng.uniform(0, 2 * np.pi)
        emg += (mains_amplitude * np.sin(2 * np.pi * 50.0 * t + phase))[:, None]
    return SubjectDataset(
        subject_id=subject_id,
        emg=emg,
        stimulus=np.concatenate(stim_blocks),
        repetition=np.concatenate(rep_blocks),
        sample_rate_hz=sample_rate_hz,
    )


def generate_dataset(n_subjects: int, seed: int = 0, **kwargs) -> list[SubjectDataset]:
    """Independent subjects 1..n (same structure, per-subject noise)."""
    return [
        generate_subject(subject_id=sid, seed=seed, **kwargs)
        for sid in range(1, n_subjects + 1)
    ]

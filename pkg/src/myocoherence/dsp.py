"""Filtering and normalization for raw sEMG.

Preprocessing order is fixed: Butterworth bandpass (10-900 Hz), 50 Hz
notch, then per-channel z-scoring with statistics fitted on the training
repetitions only.  All filtering is zero-phase (forward-backward), so the
effective magnitude response is the square of the single-pass response and
the net phase response is zero.

Designs are delegated to scipy.signal (analog Butterworth prototype,
lowpass-to-bandpass transform, prewarped bilinear transform, factored into
second-order sections); this module owns the parameter contracts, the
stability check and the cascade metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as _signal

from .datamodel import ChannelSignal, N_CHANNELS, TrialSegment
from .errors import DegenerateChannelError, FilterDesignError, SignalLengthError


@dataclass(frozen=True)
class IirFilter:
    """A digital IIR filter as a cascade of second-order sections.

    ``sections`` has shape (n_sections, 6) with rows (b0, b1, b2, a0, a1, a2),
    a0 normalized to 1.  Evaluation order is row order.
    """

    sections: np.ndarray
    kind: str
    band_hz: tuple[float, ...]
    prototype_order: int
    sample_rate_hz: float

    def __post_init__(self):
        sections = np.atleast_2d(np.asarray(self.sections, dtype=np.float64))
        object.__setattr__(self, "sections", sections)
        if sections.shape[1] != 6:
            raise FilterDesignError(f"sections must be (n, 6), got {sections.shape}")
        if not np.allclose(sections[:, 3], 1.0):
            raise FilterDesignError("sections must be normalized to a0 == 1")
        margin = 1.0 - np.abs(self.poles())
        if np.any(margin < 1e-9):
            raise FilterDesignError(
                f"unstable design: pole radius {np.abs(self.poles()).max():.12f}"
            )

    @property
    def order(self) -> int:
        """Total filter order (two poles per section)."""
        return 2 * self.sections.shape[0]

    def poles(self) -> np.ndarray:
        return np.concatenate(
            [np.roots(row[3:]) for row in self.sections]
        )

    def response(self, freqs_hz) -> np.ndarray:
        """Complex single-pass frequency response at the given frequencies."""
        _, h = _signal.sosfreqz(
            self.sections, worN=np.atleast_1d(np.asarray(freqs_hz, dtype=np.float64)),
            fs=self.sample_rate_hz,
        )
        return h


def design_butterworth_bandpass(
    low_hz: float = 10.0,
    high_hz: float = 900.0,
    fs_hz: float = 2000.0,
    prototype_order: int = 4,
) -> IirFilter:
    """Design a Butterworth bandpass with -3 dB points at the band edges.

    ``prototype_order`` is the order of the analog lowpass prototype; the
    bandpass transform doubles it (order 4 gives an 8-pole filter), which
    is the dominant scientific-computing convention for a "fourth-order
    Butterworth bandpass".
    """
    if not 0 < low_hz < high_hz < fs_hz / 2:
        raise FilterDesignError(
            f"band edges must satisfy 0 < low < high < fs/2, "
            f"got ({low_hz}, {high_hz}) at fs {fs_hz}"
        )
    if prototype_order < 1:
        raise FilterDesignError(f"prototype_order must be >= 1, got {prototype_order}")
    sos = _signal.butter(
        prototype_order, [low_hz, high_hz], btype="bandpass", output="sos", fs=fs_hz
    )
    return IirFilter(sos, "butterworth_bandpass", (low_hz, high_hz), prototype_order, fs_hz)


def design_notch(f0_hz: float = 50.0, fs_hz: float = 2000.0, quality: float = 30.0) -> IirFilter:
    """Design a single-biquad notch: zero gain at ``f0_hz``, unity at DC/Nyquist.

    ``quality`` sets the -3 dB bandwidth to approximately f0/Q.
    """
    if not 0 < f0_hz < fs_hz / 2:
        raise FilterDesignError(f"notch frequency {f0_hz} outside (0, fs/2)")
    if not quality > 0:
        raise FilterDesignError(f"quality must be positive, got {quality}")
    b, a = _signal.iirnotch(f0_hz, quality, fs=fs_hz)
    sos = np.hstack([b, a]).reshape(1, 6)
    return IirFilter(sos, "notch", (f0_hz,), 2, fs_hz)


def filtfilt(filt: IirFilter, x) -> np.ndarray:
    """Zero-phase filter: forward pass, reverse, second pass, reverse.

    Edges are extended by odd reflection over 3x the total filter order
    and the extension is removed from the output, so output length equals
    input length.  Initial conditions per section are the steady-state
    response scaled by the padded edge value.  Accepts a 1-D signal or a
    (channels, n_samples) array filtered along the last axis.
    """
    values = x.samples if isinstance(x, ChannelSignal) else np.asarray(x, dtype=np.float64)
    padlen = 3 * filt.order
    if values.shape[-1] <= padlen:
        raise SignalLengthError(
            f"signal length {values.shape[-1]} must exceed 3x filter order ({padlen})"
        )
    return _signal.sosfiltfilt(filt.sections, values, axis=-1, padtype="odd", padlen=padlen)


def filter_segment(segment: TrialSegment, filters: list[IirFilter]) -> TrialSegment:
    """Apply a filter cascade (zero-phase, in order) to every channel."""
    data = segment.data
    for filt in filters:
        data = filtfilt(filt, data)
    return TrialSegment(segment.gesture, segment.repetition, data, segment.sample_rate_hz)


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel mean and standard deviation fitted on training data."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)
        if mean.shape != (N_CHANNELS,) or std.shape != (N_CHANNELS,):
            raise DegenerateChannelError(
                f"stats must have shape ({N_CHANNELS},), got {mean.shape} and {std.shape}"
            )
        if not np.all(std > 0):
            bad = np.flatnonzero(~(std > 0)).tolist()
            raise DegenerateChannelError(f"zero-variance channel(s): {bad}")


def zscore_fit(train_segments: list[TrialSegment]) -> ChannelStats:
    """Fit per-channel mean/std over the concatenated training segments.

    Uses the population standard deviation (divide by N).  Raises
    :class:`DegenerateChannelError` for constant channels.
    """
    if not train_segments:
        raise DegenerateChannelError("cannot fit normalization on an empty training set")
    stacked = np.concatenate([s.data for s in train_segments], axis=1)
    return ChannelStats(mean=stacked.mean(axis=1), std=stacked.std(axis=1))


def zscore_apply(stats: ChannelStats, segment: TrialSegment) -> TrialSegment:
    """Standardize every channel: (x - mean) / std, shape preserved."""
    data = (segment.data - stats.mean[:, None]) / stats.std[:, None]
    return TrialSegment(segment.gesture, segment.repetition, data, segment.sample_rate_hz)

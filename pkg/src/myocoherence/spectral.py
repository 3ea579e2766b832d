"""Welch spectral estimation and magnitude-squared coherence.

Conventions (fixed across the package and mirrored by the test oracle):

* segments of ``window_samples`` starting every ``hop_samples``, any
  trailing partial segment discarded;
* per-segment mean removal, then the taper (periodic form), then the DFT;
* one-sided densities scaled by 1/(fs * sum(taper^2)) with interior bins
  doubled (DC and, for even nfft, Nyquist are not);
* cross-spectrum P_xy = mean over segments of conj(X) * Y.

MSC(f) = |P_xy(f)|^2 / (P_xx(f) * P_yy(f)), which makes the scaling cancel;
bins with a zero denominator report MSC = 0.  A single-segment estimate is
identically 1 at every bin (ratio of identical products) — callers that
care about estimator variance must supply several segments.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .datamodel import ChannelSignal, N_CHANNELS, SAMPLE_RATE_HZ, TrialSegment
from .errors import ConfigError, SampleRateMismatchError, SignalLengthError
from .netfeat import CoherenceMatrix

_MSC_SLACK = 1e-12


@dataclass(frozen=True)
class WelchParams:
    """Segmentation and taper choices for Welch estimates.

    ``overlap_fraction`` is the fractional overlap between consecutive
    segments (0.5 means a hop of half the window).  ``nfft`` defaults to the
    window length (no zero padding).
    """

    window_samples: int = 600
    overlap_fraction: float = 0.5
    taper: str = "hann"
    nfft: int | None = None

    def __post_init__(self):
        if self.window_samples < 2:
            raise ConfigError(f"window must span >= 2 samples, got {self.window_samples}")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ConfigError(f"overlap fraction must be in [0, 1), got {self.overlap_fraction}")
        if self.taper not in ("hann", "hamming", "rectangular"):
            raise ConfigError(f"unknown taper {self.taper!r}")
        if self.nfft is not None and self.nfft < self.window_samples:
            raise ConfigError(f"nfft {self.nfft} shorter than window {self.window_samples}")
        if self.hop_samples < 1:
            raise ConfigError("overlap fraction leaves a hop of zero samples")

    @property
    def hop_samples(self) -> int:
        return self.window_samples - int(round(self.window_samples * self.overlap_fraction))

    @property
    def nfft_actual(self) -> int:
        return self.nfft if self.nfft is not None else self.window_samples

    @property
    def n_frequencies(self) -> int:
        return self.nfft_actual // 2 + 1

    def frequencies(self, sample_rate_hz: float = SAMPLE_RATE_HZ) -> np.ndarray:
        """One-sided frequency grid, DC..Nyquist, spacing fs/nfft."""
        return np.arange(self.n_frequencies) * (sample_rate_hz / self.nfft_actual)

    def taper_values(self) -> np.ndarray:
        return _taper_values(self.taper, self.window_samples)

    def n_segments(self, n_samples: int) -> int:
        if n_samples < self.window_samples:
            return 0
        return (n_samples - self.window_samples) // self.hop_samples + 1


@lru_cache(maxsize=8)
def _taper_values(name: str, n: int) -> np.ndarray:
    grid = 2.0 * np.pi * np.arange(n) / n
    if name == "hann":
        values = 0.5 - 0.5 * np.cos(grid)
    elif name == "hamming":
        values = 0.54 - 0.46 * np.cos(grid)
    else:
        values = np.ones(n)
    values.flags.writeable = False
    return values


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectral density on a strictly increasing Hz grid."""

    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        _coerce_grid(self, np.float64)
        if np.any(self.values < 0):
            raise ConfigError("PSD values must be nonnegative")


@dataclass(frozen=True)
class CrossSpectrum:
    """One-sided complex cross-spectral density."""

    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        _coerce_grid(self, np.complex128)


@dataclass(frozen=True)
class CoherenceSpectrum:
    """Per-bin magnitude-squared coherence, each value in [0, 1]."""

    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        _coerce_grid(self, np.float64)
        if self.values.size and (
            self.values.min() < 0 or self.values.max() > 1 + _MSC_SLACK
        ):
            raise ConfigError(
                f"MSC outside [0, 1]: min {self.values.min()!r}, max {self.values.max()!r}"
            )


def _coerce_grid(spec, value_dtype) -> None:
    frequencies = np.asarray(spec.frequencies, dtype=np.float64)
    values = np.asarray(spec.values, dtype=value_dtype)
    object.__setattr__(spec, "frequencies", frequencies)
    object.__setattr__(spec, "values", values)
    if frequencies.shape != values.shape or frequencies.ndim != 1:
        raise ConfigError(
            f"grid/value shape mismatch: {frequencies.shape} vs {values.shape}"
        )
    if frequencies.size > 1 and np.any(np.diff(frequencies) <= 0):
        raise ConfigError("frequency grid must be strictly increasing")


def _coerce(x, sample_rate_hz: float | None) -> tuple[np.ndarray, float]:
    if isinstance(x, ChannelSignal):
        return x.samples, x.sample_rate_hz
    values = np.asarray(x, dtype=np.float64)
    if values.ndim != 1:
        raise SignalLengthError(f"expected a 1-D signal, got shape {values.shape}")
    return values, SAMPLE_RATE_HZ if sample_rate_hz is None else float(sample_rate_hz)


def _check_pair(x, y, params: WelchParams, sample_rate_hz: float | None):
    xv, fsx = _coerce(x, sample_rate_hz)
    yv, fsy = _coerce(y, sample_rate_hz)
    if xv.shape != yv.shape:
        raise SignalLengthError(f"signal lengths differ: {xv.shape[-1]} vs {yv.shape[-1]}")
    if fsx != fsy:
        raise SampleRateMismatchError(f"sample rates differ: {fsx} vs {fsy}")
    if xv.shape[-1] < params.window_samples:
        raise SignalLengthError(
            f"need at least one full window ({params.window_samples} samples), "
            f"got {xv.shape[-1]}"
        )
    return xv, yv, fsx


def segment_ffts(values: np.ndarray, params: WelchParams) -> np.ndarray:
    """Tapered, mean-removed segment DFTs, shape (..., n_segments, n_freqs).

    Shared by every estimator in this module, so pairwise calls and the
    12-channel matrix fast path produce bit-identical numbers.
    """
    window = params.window_samples
    n = values.shape[-1]
    if n < window:
        raise SignalLengthError(f"signal of {n} samples shorter than window {window}")
    starts = range(0, n - window + 1, params.hop_samples)
    segments = np.stack([values[..., s:s + window] for s in starts], axis=-2)
    segments = segments - segments.mean(axis=-1, keepdims=True)
    return np.fft.rfft(segments * params.taper_values(), n=params.nfft_actual, axis=-1)


def _mean_products(fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
    return (np.conj(fx) * fy).mean(axis=-2)


def _msc_from_ffts(fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
    pxy = _mean_products(fx, fy)
    pxx = _mean_products(fx, fx).real
    pyy = _mean_products(fy, fy).real
    numerator = pxy.real * pxy.real + pxy.imag * pxy.imag
    denominator = pxx * pyy
    out = np.zeros_like(denominator)
    nonzero = denominator > 0
    out[nonzero] = numerator[nonzero] / denominator[nonzero]
    return out


def _density_scale(params: WelchParams, fs: float) -> np.ndarray:
    taper = params.taper_values()
    factor = np.full(params.n_frequencies, 2.0)
    factor[0] = 1.0
    if params.nfft_actual % 2 == 0:
        factor[-1] = 1.0
    return factor / (fs * np.sum(taper * taper))


def welch(
    x, y, params: WelchParams = WelchParams(), sample_rate_hz: float | None = None
) -> tuple[Spectrum, Spectrum, CrossSpectrum]:
    """One-sided Welch densities (P_xx, P_yy, P_xy) for a signal pair.

    Accepts :class:`ChannelSignal` values (carrying their sample rate) or
    plain 1-D arrays with ``sample_rate_hz`` (default 2000).  For x = y the
    cross-spectrum's real part equals P_xx bit for bit and its imaginary
    part is multiplication roundoff (~1e-16 relative).
    """
    xv, yv, fs = _check_pair(x, y, params, sample_rate_hz)
    fx = segment_ffts(xv, params)
    fy = segment_ffts(yv, params)
    scale = _density_scale(params, fs)
    grid = params.frequencies(fs)
    pxx = Spectrum(grid, _mean_products(fx, fx).real * scale)
    pyy = Spectrum(grid, _mean_products(fy, fy).real * scale)
    pxy = CrossSpectrum(grid, _mean_products(fx, fy) * scale)
    return pxx, pyy, pxy


def msc(
    x, y, params: WelchParams = WelchParams(), sample_rate_hz: float | None = None
) -> CoherenceSpectrum:
    """Magnitude-squared coherence |P_xy|^2 / (P_xx * P_yy) per bin."""
    xv, yv, fs = _check_pair(x, y, params, sample_rate_hz)
    fx = segment_ffts(xv, params)
    fy = segment_ffts(yv, params)
    return CoherenceSpectrum(params.frequencies(fs), _msc_from_ffts(fx, fy))


def coherence_matrix(segment: TrialSegment, params: WelchParams = WelchParams()) -> CoherenceMatrix:
    """Frequency-averaged MSC for all 66 channel pairs of one trial.

    Each off-diagonal entry is the mean of the pair's MSC over the full
    one-sided grid; the matrix is filled symmetrically and the diagonal is
    set to 0.  Channel DFTs are computed once and reused across pairs, which
    is bit-identical to calling :func:`msc` pair by pair.
    """
    ffts = segment_ffts(segment.data, params)
    values = np.zeros((N_CHANNELS, N_CHANNELS))
    for i in range(N_CHANNELS):
        for j in range(i + 1, N_CHANNELS):
            mean_msc = _msc_from_ffts(ffts[i], ffts[j]).mean()
            values[i, j] = mean_msc
            values[j, i] = mean_msc
    return CoherenceMatrix(values, segment.gesture, segment.repetition)

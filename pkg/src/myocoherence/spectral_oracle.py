"""Reference MSC computed by explicit DFT sums, for cross-checking.

This deliberately re-derives everything :mod:`.spectral` computes — taper
values, segment starts, mean removal, the DFT itself (an explicit
O(N^2) sum against complex exponentials, never an FFT), the averaged
products and the final ratio — sharing only the parameter container and
the result type.  Keeping the two implementations disjoint is the point:
agreement between them validates the fast path.

Orders of magnitude slower than :func:`myocoherence.spectral.msc`; use in
tests only.
"""

from __future__ import annotations

import numpy as np

from .datamodel import ChannelSignal, SAMPLE_RATE_HZ
from .errors import SampleRateMismatchError, SignalLengthError
from .spectral import CoherenceSpectrum, WelchParams


def _as_values(x, sample_rate_hz):
    if isinstance(x, ChannelSignal):
        return np.asarray(x.samples, dtype=np.float64), x.sample_rate_hz
    rate = SAMPLE_RATE_HZ if sample_rate_hz is None else float(sample_rate_hz)
    return np.asarray(x, dtype=np.float64), rate


def _taper(name: str, window: int) -> np.ndarray:
    phase = 2.0 * np.pi * np.arange(window) / window
    if name == "hann":
        return 0.5 - 0.5 * np.cos(phase)
    if name == "hamming":
        return 0.54 - 0.46 * np.cos(phase)
    if name == "rectangular":
        return np.ones(window)
    raise ValueError(f"unknown taper {name!r}")


def msc_bruteforce_oracle(
    x, y, params: WelchParams = WelchParams(), sample_rate_hz: float | None = None
) -> CoherenceSpectrum:
    """Magnitude-squared coherence via brute-force DFT sums.

    Same contract as :func:`myocoherence.spectral.msc`: one-sided grid,
    zero-denominator bins report 0, a single segment degenerates to 1.
    """
    xv, fsx = _as_values(x, sample_rate_hz)
    yv, fsy = _as_values(y, sample_rate_hz)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise SignalLengthError(
            f"need equal-length 1-D signals, got {xv.shape} and {yv.shape}"
        )
    if fsx != fsy:
        raise SampleRateMismatchError(f"sample rates differ: {fsx} vs {fsy}")

    window = params.window_samples
    if xv.size < window:
        raise SignalLengthError(f"signal of {xv.size} samples shorter than window {window}")
    hop = window - int(round(window * params.overlap_fraction))
    nfft = window if params.nfft is None else params.nfft
    n_freqs = nfft // 2 + 1
    taper = _taper(params.taper, window)

    # X[k] = sum_n x[n] * exp(-2*pi*i*k*n/nfft), evaluated as explicit sums
    # over an outer-product phase matrix (no FFT anywhere).
    bins = np.arange(n_freqs)
    samples = np.arange(window)
    dft = np.exp(-2j * np.pi * np.outer(bins, samples) / nfft)

    sum_xx = np.zeros(n_freqs)
    sum_yy = np.zeros(n_freqs)
    sum_xy = np.zeros(n_freqs, dtype=np.complex128)
    for start in range(0, xv.size - window + 1, hop):
        xs = xv[start:start + window]
        ys = yv[start:start + window]
        xs = (xs - xs.sum() / window) * taper
        ys = (ys - ys.sum() / window) * taper
        fx = dft @ xs
        fy = dft @ ys
        sum_xx += fx.real * fx.real + fx.imag * fx.imag
        sum_yy += fy.real * fy.real + fy.imag * fy.imag
        sum_xy += np.conj(fx) * fy

    # Segment counts and density scaling cancel in the ratio.
    values = np.zeros(n_freqs)
    denominator = sum_xx * sum_yy
    nonzero = denominator > 0
    values[nonzero] = (
        sum_xy.real[nonzero] ** 2 + sum_xy.imag[nonzero] ** 2
    ) / denominator[nonzero]
    grid = np.arange(n_freqs) * (fsx / nfft)
    return CoherenceSpectrum(grid, values)

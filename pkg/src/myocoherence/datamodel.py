"""Core domain types for multichannel sEMG gesture recordings.

The conventions here follow the NinaPro DB2 acquisition protocol: 12
electrode channels sampled at 2000 Hz, 17 gestures (exercise set B)
performed for roughly 5 seconds each, 6 repetitions per gesture.  A
per-sample ``stimulus`` stream labels the active gesture (0 = rest) and a
parallel ``repetition`` stream labels the repetition number (0 = rest).

All types are immutable after construction and safe to share across
parallel workers; the operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SegmentTooShortError, ShapeError, StructuralError

N_CHANNELS = 12
N_GESTURES = 17
N_REPETITIONS = 6
SAMPLE_RATE_HZ = 2000.0

# Trials shorter than two analysis windows (600 samples each) would make the
# coherence estimate degenerate (a single Welch segment gives MSC == 1), so
# segmentation rejects them instead of padding.
MIN_SEGMENT_SAMPLES = 1200


@dataclass(frozen=True)
class ChannelSignal:
    """One channel of a recording: amplitude samples plus their rate."""

    samples: np.ndarray
    sample_rate_hz: float = SAMPLE_RATE_HZ

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1:
            raise ShapeError(f"channel samples must be 1-D, got shape {samples.shape}")
        if not self.sample_rate_hz > 0:
            raise ShapeError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class SubjectDataset:
    """Full continuous recording for one subject.

    ``emg`` is (n_samples, 12) with channels in electrode order;
    ``stimulus`` and ``repetition`` are per-sample integer label streams of
    the same length.
    """

    subject_id: int
    emg: np.ndarray
    stimulus: np.ndarray
    repetition: np.ndarray
    sample_rate_hz: float = SAMPLE_RATE_HZ

    def __post_init__(self):
        emg = np.asarray(self.emg, dtype=np.float64)
        stim = np.asarray(self.stimulus, dtype=np.int64).ravel()
        rep = np.asarray(self.repetition, dtype=np.int64).ravel()
        object.__setattr__(self, "emg", emg)
        object.__setattr__(self, "stimulus", stim)
        object.__setattr__(self, "repetition", rep)
        if emg.ndim != 2 or emg.shape[1] != N_CHANNELS:
            raise ShapeError(
                f"emg must have shape (n_samples, {N_CHANNELS}), got {emg.shape}"
            )
        n = emg.shape[0]
        if stim.shape[0] != n or rep.shape[0] != n:
            raise ShapeError(
                f"label streams must match emg length {n}: "
                f"stimulus has {stim.shape[0]}, repetition has {rep.shape[0]}"
            )
        if stim.size and (stim.min() < 0 or stim.max() > N_GESTURES):
            raise StructuralError(
                f"stimulus labels must lie in 0..{N_GESTURES}, "
                f"found range {stim.min()}..{stim.max()}"
            )
        if rep.size and (rep.min() < 0 or rep.max() > N_REPETITIONS):
            raise StructuralError(
                f"repetition labels must lie in 0..{N_REPETITIONS}, "
                f"found range {rep.min()}..{rep.max()}"
            )
        if np.any((stim != 0) & (rep == 0)):
            bad = int(np.flatnonzero((stim != 0) & (rep == 0))[0])
            raise StructuralError(
                f"active stimulus with repetition 0 at sample {bad}; "
                "every movement sample needs a repetition label"
            )
        if not self.sample_rate_hz > 0:
            raise ShapeError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")

    @property
    def n_samples(self) -> int:
        return self.emg.shape[0]

    def channel(self, index: int) -> ChannelSignal:
        return ChannelSignal(self.emg[:, index], self.sample_rate_hz)


@dataclass(frozen=True)
class TrialSegment:
    """One (gesture, repetition) span of 12-channel signal.

    ``data`` is channel-major, shape (12, n_samples).  The constructor
    checks shape and label consistency only; the minimum-length requirement
    for spectral analysis is enforced where segments are produced
    (:func:`segment_trials`) and consumed (coherence estimation), so that
    short hand-built segments remain usable in normalization arithmetic.
    """

    gesture: int
    repetition: int
    data: np.ndarray
    sample_rate_hz: float = SAMPLE_RATE_HZ

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        object.__setattr__(self, "data", data)
        if data.ndim != 2 or data.shape[0] != N_CHANNELS:
            raise ShapeError(
                f"segment data must have shape ({N_CHANNELS}, n_samples), got {data.shape}"
            )
        if data.shape[1] == 0:
            raise ShapeError("segment must contain at least one sample")
        if not 1 <= self.gesture <= N_GESTURES:
            raise StructuralError(f"gesture must lie in 1..{N_GESTURES}, got {self.gesture}")
        if not 1 <= self.repetition <= N_REPETITIONS:
            raise StructuralError(
                f"repetition must lie in 1..{N_REPETITIONS}, got {self.repetition}"
            )

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def channel(self, index: int) -> ChannelSignal:
        return ChannelSignal(self.data[index], self.sample_rate_hz)


@dataclass(frozen=True)
class SplitSpec:
    """Repetition-based train/test split.

    The standard DB2 protocol trains on repetitions {1, 3, 4, 6} and tests
    on {2, 5}.
    """

    train_repetitions: frozenset = field(default_factory=lambda: frozenset({1, 3, 4, 6}))
    test_repetitions: frozenset = field(default_factory=lambda: frozenset({2, 5}))

    def __post_init__(self):
        train = frozenset(int(r) for r in self.train_repetitions)
        test = frozenset(int(r) for r in self.test_repetitions)
        object.__setattr__(self, "train_repetitions", train)
        object.__setattr__(self, "test_repetitions", test)
        valid = set(range(1, N_REPETITIONS + 1))
        if not train or not test:
            raise StructuralError("train and test repetition sets must both be nonempty")
        if not train <= valid or not test <= valid:
            raise StructuralError(
                f"repetitions must be subsets of 1..{N_REPETITIONS}, "
                f"got train={sorted(train)}, test={sorted(test)}"
            )
        if train & test:
            raise StructuralError(
                f"train and test repetitions overlap: {sorted(train & test)}"
            )


def segment_trials(
    dataset: SubjectDataset,
    min_samples: int = MIN_SEGMENT_SAMPLES,
) -> list[TrialSegment]:
    """Cut a continuous recording into labeled movement trials.

    Each maximal contiguous run where stimulus == g != 0 and
    repetition == r != 0 becomes one :class:`TrialSegment` with exactly the
    labeled span (real runs deviate from the nominal 5 s by tens of
    milliseconds, so no truncation or padding is applied).  Rest samples
    (stimulus 0) belong to no segment.  Segments are returned in temporal
    order.

    Raises
    ------
    SegmentTooShortError
        If a labeled run is shorter than ``min_samples``.
    StructuralError
        If a run's label streams are mutually inconsistent.
    """
    stim = dataset.stimulus
    rep = dataset.repetition
    n = stim.shape[0]
    if n == 0:
        return []

    # Boundaries wherever the (stimulus, repetition) pair changes.
    change = np.flatnonzero((np.diff(stim) != 0) | (np.diff(rep) != 0))
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change + 1, [n]))

    segments = []
    for start, end in zip(starts, ends):
        g = int(stim[start])
        r = int(rep[start])
        if g == 0:
            continue  # rest span, regardless of the repetition stream
        if r == 0:
            raise StructuralError(
                f"run at samples {start}..{end} has stimulus {g} but repetition 0"
            )
        length = end - start
        if length < min_samples:
            raise SegmentTooShortError(
                f"trial (gesture {g}, repetition {r}) at samples {start}..{end} has "
                f"{length} samples, below the minimum {min_samples}"
            )
        segments.append(
            TrialSegment(
                gesture=g,
                repetition=r,
                data=dataset.emg[start:end].T.copy(),
                sample_rate_hz=dataset.sample_rate_hz,
            )
        )
    return segments


def missing_trial_pairs(
    segments: list[TrialSegment],
    n_gestures: int = N_GESTURES,
    n_repetitions: int = N_REPETITIONS,
) -> list[tuple[int, int]]:
    """Return the (gesture, repetition) combinations absent from ``segments``."""
    present = {(s.gesture, s.repetition) for s in segments}
    return [
        (g, r)
        for g in range(1, n_gestures + 1)
        for r in range(1, n_repetitions + 1)
        if (g, r) not in present
    ]

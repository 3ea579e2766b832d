import numpy as np
import pytest

from myocoherence.datamodel import (
    ChannelSignal,
    SplitSpec,
    SubjectDataset,
    TrialSegment,
    missing_trial_pairs,
    segment_trials,
)
from myocoherence.errors import SegmentTooShortError, ShapeError, StructuralError

from conftest import make_dataset


def test_channel_signal_coerces_and_validates():
    sig = ChannelSignal([1, 2, 3])
    assert sig.samples.dtype == np.float64
    assert len(sig) == 3
    with pytest.raises(ShapeError):
        ChannelSignal(np.zeros((2, 2)))
    with pytest.raises(ShapeError):
        ChannelSignal([1.0], sample_rate_hz=0.0)


def test_dataset_shape_checks():
    good = SubjectDataset(1, np.zeros((10, 12)), np.zeros(10, int), np.zeros(10, int))
    assert good.n_samples == 10
    assert good.channel(3).samples.shape == (10,)
    with pytest.raises(ShapeError):
        SubjectDataset(1, np.zeros((10, 11)), np.zeros(10, int), np.zeros(10, int))
    with pytest.raises(ShapeError):
        SubjectDataset(1, np.zeros((10, 12)), np.zeros(9, int), np.zeros(10, int))


def test_dataset_label_ranges():
    stim = np.zeros(5, int)
    stim[2] = 18  # only 17 gestures exist
    with pytest.raises(StructuralError):
        SubjectDataset(1, np.zeros((5, 12)), stim, np.zeros(5, int))
    rep = np.zeros(5, int)
    rep[1] = 7
    with pytest.raises(StructuralError):
        SubjectDataset(1, np.zeros((5, 12)), np.zeros(5, int), rep)


def test_active_stimulus_requires_repetition():
    stim = np.array([0, 3, 3, 0])
    rep = np.array([0, 1, 0, 0])  # second active sample lost its repetition
    with pytest.raises(StructuralError, match="sample 2"):
        SubjectDataset(1, np.zeros((4, 12)), stim, rep)


def test_trial_segment_validation():
    seg = TrialSegment(gesture=5, repetition=2, data=np.zeros((12, 30)))
    assert seg.n_samples == 30
    assert seg.channel(0).sample_rate_hz == 2000.0
    with pytest.raises(ShapeError):
        TrialSegment(1, 1, np.zeros((11, 30)))
    with pytest.raises(StructuralError):
        TrialSegment(0, 1, np.zeros((12, 30)))
    with pytest.raises(StructuralError):
        TrialSegment(1, 7, np.zeros((12, 30)))


def test_segment_trials_boundaries_and_order():
    ds = make_dataset(trial_samples=1500, gestures=(1, 2), repetitions=(1, 2))
    segments = segment_trials(ds)
    assert [(s.gesture, s.repetition) for s in segments] == [
        (1, 1), (1, 2), (2, 1), (2, 2)
    ]
    for seg in segments:
        assert seg.data.shape == (12, 1500)
    # the segment carries exactly the labeled span
    first = segments[0]
    np.testing.assert_array_equal(first.data.T, ds.emg[100:1600])


def test_segment_trials_skips_rest_and_rejects_short():
    ds = make_dataset(trial_samples=1500)
    assert all(s.gesture != 0 for s in segment_trials(ds))
    short = make_dataset(trial_samples=1100)
    with pytest.raises(SegmentTooShortError, match="1100"):
        segment_trials(short)
    # a caller may relax the minimum explicitly
    assert len(segment_trials(short, min_samples=1000)) == 4


def test_segment_trials_empty_dataset():
    ds = SubjectDataset(1, np.zeros((0, 12)), np.zeros(0, int), np.zeros(0, int))
    assert segment_trials(ds) == []


def test_back_to_back_trials_split_on_label_change():
    # no rest between the two trials: the (stimulus, repetition) change is
    # still a boundary
    emg = np.random.default_rng(0).standard_normal((3000, 12))
    stim = np.full(3000, 4)
    rep = np.concatenate([np.full(1500, 1), np.full(1500, 2)])
    ds = SubjectDataset(1, emg, stim, rep)
    segments = segment_trials(ds)
    assert [(s.gesture, s.repetition) for s in segments] == [(4, 1), (4, 2)]


def test_missing_trial_pairs():
    ds = make_dataset(trial_samples=1500, gestures=(1, 2), repetitions=(1, 2))
    segments = segment_trials(ds)
    missing = missing_trial_pairs(segments, n_gestures=2, n_repetitions=3)
    assert missing == [(1, 3), (2, 3)]
    assert missing_trial_pairs(segments, n_gestures=2, n_repetitions=2) == []


def test_split_spec_defaults_and_validation():
    spec = SplitSpec()
    assert spec.train_repetitions == frozenset({1, 3, 4, 6})
    assert spec.test_repetitions == frozenset({2, 5})
    with pytest.raises(StructuralError):
        SplitSpec(train_repetitions={1, 2}, test_repetitions={2, 5})
    with pytest.raises(StructuralError):
        SplitSpec(train_repetitions={0, 1}, test_repetitions={2})
    with pytest.raises(StructuralError):
        SplitSpec(train_repetitions=set(), test_repetitions={2})

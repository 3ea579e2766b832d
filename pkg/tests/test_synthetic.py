import numpy as np
import pytest

from myocoherence.errors import ConfigError
from myocoherence.spectral import WelchParams, msc
from myocoherence.datamodel import ChannelSignal, segment_trials
from myocoherence.synthetic import (
    GESTURE_PARTITIONS,
    channel_groups,
    generate_dataset,
    generate_subject,
    generate_trial,
    source_band,
)


def test_partitions_are_distinct_and_cover_all_channels():
    assert len(GESTURE_PARTITIONS) == 17
    assert len(set(GESTURE_PARTITIONS)) == 17
    for sizes in GESTURE_PARTITIONS:
        assert sum(sizes) == 12


def test_channel_groups_tile_the_channel_range():
    for gesture in range(1, 18):
        groups = channel_groups(gesture)
        flat = np.concatenate(groups)
        np.testing.assert_array_equal(flat, np.arange(12))
        assert [len(g) for g in groups] == list(GESTURE_PARTITIONS[gesture - 1])
    with pytest.raises(ConfigError):
        channel_groups(0)
    with pytest.raises(ConfigError):
        channel_groups(18)


def test_source_bands_sit_inside_the_passband():
    bands = [source_band(g) for g in range(1, 18)]
    assert len(set(bands)) == 17
    for low, high in bands:
        assert 10.0 < low < high < 900.0


def test_trial_shape_and_within_group_coherence():
    rng = np.random.default_rng(0)
    emg = generate_trial(5, rng, n_samples=6000)
    assert emg.shape == (6000, 12)
    params = WelchParams()
    # gesture 5 partitions channels into six pairs: (0,1) share a source,
    # (0,2) do not; the shared source lives inside the gesture's band
    low, high = source_band(5)
    same = msc(emg[:, 0], emg[:, 1], params)
    different = msc(emg[:, 0], emg[:, 2], params)
    band = (same.frequencies >= low) & (same.frequencies <= high)
    assert same.values[band].mean() > 0.5
    assert different.values[band].mean() < 0.15
    # outside the band the paired channels carry only independent noise
    assert same.values[~band].mean() < 0.15


def test_subject_layout_and_segmentation():
    dataset = generate_subject(seed=1, move_seconds=1.0, rest_seconds=0.25)
    assert dataset.emg.shape[1] == 12
    assert dataset.sample_rate_hz == 2000.0
    assert set(np.unique(dataset.stimulus)) == set(range(18))
    segments = segment_trials(dataset, min_samples=1200)
    assert len(segments) == 102
    assert [s.gesture for s in segments] == list(np.repeat(np.arange(1, 18), 6))
    assert [s.repetition for s in segments] == list(np.tile(np.arange(1, 7), 17))
    for segment in segments:
        assert segment.data.shape == (12, 2000)
    # rest spans are labeled zero in both streams
    resting = dataset.stimulus == 0
    assert resting.sum() == 103 * 500  # one gap before each trial plus one after
    assert np.all(dataset.repetition[resting] == 0)


def test_determinism_and_subject_independence():
    a = generate_subject(subject_id=1, seed=7, move_seconds=0.7)
    b = generate_subject(subject_id=1, seed=7, move_seconds=0.7)
    np.testing.assert_array_equal(a.emg, b.emg)
    np.testing.assert_array_equal(a.stimulus, b.stimulus)
    c = generate_subject(subject_id=2, seed=7, move_seconds=0.7)
    assert not np.array_equal(a.emg, c.emg)
    d = generate_subject(subject_id=1, seed=8, move_seconds=0.7)
    assert not np.array_equal(a.emg, d.emg)


def test_mains_component_is_present_and_removable():
    # measure on the opening rest span, where the 50 Hz line is the only
    # strong component (movement spans bury it under in-band source power)
    dataset = generate_subject(seed=3, move_seconds=1.0, mains_amplitude=0.2)
    rest_len = int(np.flatnonzero(dataset.stimulus != 0)[0])
    x = dataset.emg[:rest_len, 0]
    spectrum = np.abs(np.fft.rfft(x * np.hanning(x.size)))
    freqs = np.fft.rfftfreq(x.size, d=1 / 2000.0)
    mains_bin = int(np.argmin(np.abs(freqs - 50.0)))
    assert int(np.argmax(spectrum)) in (mains_bin - 1, mains_bin, mains_bin + 1)
    continuum = np.median(spectrum[(freqs > 80) & (freqs < 400)])
    assert spectrum[mains_bin] > 10 * continuum
    quiet = generate_subject(seed=3, move_seconds=1.0, mains_amplitude=0.0)
    spectrum_quiet = np.abs(
        np.fft.rfft(quiet.emg[:rest_len, 0] * np.hanning(rest_len))
    )
    assert spectrum[mains_bin] > 10 * spectrum_quiet[mains_bin]


def test_generate_dataset_ids_and_count():
    subjects = generate_dataset(3, seed=0, move_seconds=0.7)
    assert [s.subject_id for s in subjects] == [1, 2, 3]
    assert not np.array_equal(subjects[0].emg, subjects[1].emg)


def test_generation_parameter_validation():
    with pytest.raises(ConfigError):
        generate_subject(move_seconds=0.0)
    with pytest.raises(ConfigError):
        generate_subject(rest_seconds=-1.0)

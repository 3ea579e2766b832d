"""Shared fixtures.

The synthetic-subject fixtures are session-scoped because segmenting,
filtering, and estimating coherence for 102 trials is the expensive part
of the suite; every consumer treats them as read-only.
"""

import numpy as np
import pytest

import myocoherence as mc
from myocoherence.report import (
    RunConfig,
    evaluate_subject,
    preprocess_subject,
    subject_coherence,
    train_subject,
)


@pytest.fixture(scope="session")
def small_config():
    # 2-second movements keep the fixture fast; everything else is default.
    return RunConfig(synthetic_subjects=1, synthetic_move_seconds=2.0, seed=0)


@pytest.fixture(scope="session")
def small_subject(small_config):
    return mc.generate_subject(subject_id=1, seed=0, move_seconds=2.0)


@pytest.fixture(scope="session")
def small_prepared(small_subject, small_config):
    """(trial segments, channel stats) after filtering and normalization."""
    return preprocess_subject(small_subject, small_config)


@pytest.fixture(scope="session")
def small_matrices(small_prepared, small_config):
    segments, _ = small_prepared
    return subject_coherence(segments, small_config)


@pytest.fixture(scope="session")
def small_table(small_matrices):
    return mc.build_feature_table(small_matrices)


@pytest.fixture(scope="session")
def small_trained(small_table, small_config, small_prepared):
    model, params, train, test = train_subject(
        small_table, small_config, small_prepared[1]
    )
    report = evaluate_subject(model, test, subject_id=1)
    return {
        "model": model,
        "params": params,
        "train": train,
        "test": test,
        "report": report,
    }


def make_dataset(trial_samples=1500, gestures=(1, 2), repetitions=(1, 2),
                 rest_samples=100, seed=0, fs=2000.0):
    """Small hand-assembled continuous recording for segmentation tests."""
    rng = np.random.default_rng(seed)
    emg_parts, stim_parts, rep_parts = [], [], []

    def rest(n):
        emg_parts.append(rng.standard_normal((n, 12)) * 0.01)
        stim_parts.append(np.zeros(n, dtype=int))
        rep_parts.append(np.zeros(n, dtype=int))

    rest(rest_samples)
    for g in gestures:
        for r in repetitions:
            emg_parts.append(rng.standard_normal((trial_samples, 12)))
            stim_parts.append(np.full(trial_samples, g))
            rep_parts.append(np.full(trial_samples, r))
            rest(rest_samples)
    return mc.SubjectDataset(
        subject_id=1,
        emg=np.concatenate(emg_parts),
        stimulus=np.concatenate(stim_parts),
        repetition=np.concatenate(rep_parts),
        sample_rate_hz=fs,
    )

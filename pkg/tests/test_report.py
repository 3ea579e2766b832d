import dataclasses
import json

import numpy as np
import pytest

from myocoherence.errors import ConfigError, FormatError
from myocoherence.netfeat import pair_names
from myocoherence.report import (
    OUTPUT_DIR_ENV,
    RunConfig,
    load_matrices,
    run_from_manifest,
    run_pipeline,
    save_matrices,
    subject_coherence,
)

FAST = dict(
    synthetic_subjects=1,
    synthetic_move_seconds=1.0,
    synthetic_rest_seconds=0.25,
    seed=0,
)


@pytest.fixture(scope="module")
def fast_run(tmp_path_factory):
    """One complete 1-second-trial run shared by the artifact tests."""
    config = RunConfig(**FAST)
    root = tmp_path_factory.mktemp("fast") / "artifacts"
    return config, run_pipeline(config, output_dir=root)


# ---------------------------------------------------------------- config


def test_config_defaults_match_protocol():
    config = RunConfig()
    assert config.window_samples == 600
    assert config.overlap_fraction == 0.5
    assert config.taper == "hann"
    assert (config.bandpass_low_hz, config.bandpass_high_hz) == (10.0, 900.0)
    assert config.notch_hz == 50.0 and config.apply_notch
    assert config.train_repetitions == (1, 3, 4, 6)
    assert config.test_repetitions == (2, 5)
    assert (config.degree, config.c) == (2, 10.0)
    assert config.gamma == "scale"
    assert config.strategy == "ovo"


def test_config_round_trip(tmp_path):
    config = RunConfig(**FAST, degree=3, taper="hamming", subjects=(1, 2))
    assert RunConfig.from_dict(config.to_dict()) == config
    path = tmp_path / "config.json"
    config.save(path)
    assert RunConfig.load(path) == config


def test_config_load_failures(tmp_path):
    with pytest.raises(ConfigError, match="unknown config key"):
        RunConfig.from_dict({"bogus": 1})
    path = tmp_path / "bad.json"
    path.write_text("{")
    with pytest.raises(ConfigError, match="invalid config JSON"):
        RunConfig.load(path)
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="JSON object"):
        RunConfig.load(path)
    with pytest.raises(ConfigError, match="cannot read"):
        RunConfig.load(tmp_path / "absent.json")


@pytest.mark.parametrize(
    "overrides",
    [
        {"workers": 0},
        {"synthetic_subjects": -1},
        {"min_segment_samples": 599},
        {"strategy": "tournament"},
        {"taper": "boxcar"},
        {"overlap_fraction": 1.0},
        {"degree": 0},
        {"c": 0.0},
        {"gamma": "auto"},
        {"train_repetitions": (1, 2), "test_repetitions": (2, 5)},
        {"test_repetitions": ()},
    ],
)
def test_config_validates_every_stage(overrides):
    with pytest.raises(ConfigError):
        RunConfig(**overrides)


# ---------------------------------------------------- per-subject stages


def test_preprocess_normalizes_on_training_repetitions(small_prepared, small_config):
    segments, stats = small_prepared
    assert len(segments) == 102
    assert stats.mean.shape == (12,) and np.all(stats.std > 0)
    train_reps = set(small_config.train_repetitions)
    train_data = np.hstack(
        [s.data for s in segments if s.repetition in train_reps]
    )
    np.testing.assert_allclose(train_data.mean(axis=1), 0.0, atol=1e-10)
    np.testing.assert_allclose(train_data.std(axis=1), 1.0, rtol=1e-10)


def test_parallel_coherence_is_bit_identical(small_prepared, small_config):
    segments, _ = small_prepared
    subset = segments[:8]
    serial = subject_coherence(subset, small_config, workers=1)
    threaded = subject_coherence(subset, small_config, workers=3)
    assert len(serial) == len(threaded) == 8
    for a, b in zip(serial, threaded):
        assert (a.gesture, a.repetition) == (b.gesture, b.repetition)
        assert np.array_equal(a.values, b.values)


def test_train_subject_contract(small_trained, small_table):
    model = small_trained["model"]
    assert small_trained["train"].n_rows == 68
    assert small_trained["test"].n_rows == 34
    assert len(model.binaries) == 136
    assert model.column_names == small_table.column_names == pair_names()
    assert model.channel_stats is not None
    assert model.converged


def test_evaluate_subject_report(small_trained):
    report = small_trained["report"]
    assert report.subject_id == 1
    assert report.classes == tuple(range(1, 18))
    np.testing.assert_array_equal(report.confusion.sum(axis=1), np.full(17, 2.0))


def test_matrices_round_trip(small_matrices, small_config, tmp_path):
    path = tmp_path / "m.json"
    save_matrices(small_matrices[:5], 4, small_config, path)
    back, sid = load_matrices(path)
    assert sid == 4
    assert len(back) == 5
    for a, b in zip(small_matrices[:5], back):
        assert np.array_equal(a.values, b.values)
        assert (a.gesture, a.repetition) == (b.gesture, b.repetition)
    tampered = path.read_text().replace('"format_version": 1', '"format_version": 2')
    path.write_text(tampered)
    with pytest.raises(FormatError, match="version"):
        load_matrices(path)
    path.write_text("nonsense")
    with pytest.raises(FormatError):
        load_matrices(path)


# ------------------------------------------------------------- pipeline


def test_pipeline_writes_complete_artifact_tree(fast_run):
    config, result = fast_run
    root = result.output_dir
    assert len(result.results) == 1 and not result.failures
    subject = result.results[0]
    assert subject.subject_id == 1
    assert subject.n_trials == 102
    assert subject.table.n_rows == 102

    manifest = json.loads(result.manifest_path.read_text())
    assert manifest["format_version"] == 1
    assert manifest["config"] == config.to_dict()
    assert manifest["subjects"][0]["status"] == "ok"
    assert manifest["subjects"][0]["n_trials"] == 102
    assert manifest["subjects"][0]["converged"] is True
    assert manifest["artifacts"] == sorted(manifest["artifacts"])
    for relative in manifest["artifacts"]:
        assert (root / relative).is_file(), relative

    expected = {
        "features/subject_01.csv",
        "features/subject_01.csv.meta.json",
        "models/subject_01.model",
        "metrics/subject_01.json",
        "metrics/mean.json",
        "metrics/summary.csv",
        "figures/subject_01_confusion.svg",
        "figures/confusion_mean.svg",
    }
    for gesture in range(1, 18):
        expected.add(f"figures/subject_01_gesture_{gesture:02d}_heatmap.svg")
        expected.add(f"figures/subject_01_gesture_{gesture:02d}_network.svg")
    assert set(manifest["artifacts"]) == expected

    # a single-subject aggregate is just that subject's report
    assert result.aggregate.overall_accuracy == subject.report.overall_accuracy


def test_pipeline_env_var_and_byte_determinism(fast_run, tmp_path, monkeypatch):
    config, first = fast_run
    env_root = tmp_path / "from_env"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(env_root))
    second = run_pipeline(config)  # no explicit dir: env variable decides
    assert second.output_dir == env_root
    manifest = json.loads(second.manifest_path.read_text())
    for relative in manifest["artifacts"] + ["manifest.json"]:
        a = (first.output_dir / relative).read_bytes()
        b = (env_root / relative).read_bytes()
        assert a == b, f"{relative} differs between identical runs"


def test_run_from_manifest_reproduces_metrics(fast_run, tmp_path):
    _, first = fast_run
    rerun = run_from_manifest(first.manifest_path, output_dir=tmp_path / "rerun")
    assert len(rerun.results) == 1
    for relative in ("metrics/subject_01.json", "metrics/mean.json", "manifest.json"):
        assert (tmp_path / "rerun" / relative).read_bytes() == (
            first.output_dir / relative
        ).read_bytes()


def test_run_from_manifest_failures(tmp_path):
    with pytest.raises(FormatError, match="cannot read"):
        run_from_manifest(tmp_path / "absent.json")
    path = tmp_path / "m.json"
    path.write_text("{")
    with pytest.raises(FormatError, match="invalid manifest"):
        run_from_manifest(path)
    path.write_text(json.dumps({"format_version": 99}))
    with pytest.raises(FormatError, match="version"):
        run_from_manifest(path)
    path.write_text(json.dumps({"format_version": 1}))
    with pytest.raises(FormatError, match="config"):
        run_from_manifest(path)


def test_pipeline_continues_past_a_failing_subject(tmp_path):
    bad = tmp_path / "s9_junk.csv"
    bad.write_text("this,is,not,a,recording\n1,2,3\n")
    config = RunConfig(**FAST, data_files=(str(bad),), write_figures=False)
    result = run_pipeline(config, output_dir=tmp_path / "out")
    assert [r.subject_id for r in result.results] == [1]
    assert len(result.failures) == 1
    failure = result.failures[0]
    assert failure.subject_id == 9  # inferred from the file name
    assert failure.stage == "ingest"
    assert result.aggregate is not None
    manifest = json.loads(result.manifest_path.read_text())
    statuses = {s["subject_id"]: s["status"] for s in manifest["subjects"]}
    assert statuses == {1: "ok", 9: "failed"}
    assert (tmp_path / "out" / "metrics" / "subject_01.json").exists()


def test_pipeline_input_validation(tmp_path):
    target = tmp_path / "never"
    with pytest.raises(ConfigError, match="no input"):
        run_pipeline(RunConfig(), output_dir=target)
    assert not target.exists()  # inputs are validated before any writes
    with pytest.raises(ConfigError, match="does not exist"):
        run_pipeline(
            RunConfig(data_files=(str(tmp_path / "ghost.mat"),)), output_dir=target
        )
    with pytest.raises(ConfigError, match="subject selection"):
        run_pipeline(RunConfig(**FAST, subjects=(5,)), output_dir=target)


def test_pipeline_without_figures(tmp_path):
    config = dataclasses.replace(RunConfig(**FAST), write_figures=False)
    result = run_pipeline(config, output_dir=tmp_path / "out")
    assert not (tmp_path / "out" / "figures").exists()
    assert (tmp_path / "out" / "metrics" / "summary.csv").exists()
    manifest = json.loads(result.manifest_path.read_text())
    assert not any(a.startswith("figures/") for a in manifest["artifacts"])

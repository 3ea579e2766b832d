import csv
import math

import numpy as np
import pytest

from myocoherence.errors import DataError, ShapeError
from myocoherence.evalmetrics import (
    METRIC_NAMES,
    MetricsReport,
    classification_metrics,
    confusion,
    evaluate_predictions,
    load_report_json,
    mean_report,
    roc_auc,
    save_report_json,
    save_summary_csv,
)


def test_confusion_counts_by_hand():
    truths = [1, 1, 1, 1, 2, 2, 2, 2, 2, 2]
    preds = [1, 1, 1, 2, 1, 1, 2, 2, 2, 2]
    counts = confusion(truths, preds, classes=(1, 2))
    np.testing.assert_array_equal(counts, [[3, 1], [2, 4]])
    assert counts.dtype == np.int64


def test_confusion_rejects_bad_input():
    with pytest.raises(ShapeError):
        confusion([1, 2], [1], classes=(1, 2))
    with pytest.raises(DataError, match="outside"):
        confusion([1, 3], [1, 1], classes=(1, 2))


def test_metrics_on_hand_confusion():
    # [[3, 1], [2, 4]]: P = (3/5, 4/5), R = (3/4, 2/3),
    # F1 = (2/3, 8/11), overall = 7/10
    report = classification_metrics(np.array([[3, 1], [2, 4]]), classes=(1, 2))
    np.testing.assert_allclose(report.precision, [3 / 5, 4 / 5], rtol=1e-15)
    np.testing.assert_allclose(report.recall, [3 / 4, 2 / 3], rtol=1e-15)
    np.testing.assert_allclose(report.f1, [2 / 3, 8 / 11], rtol=1e-15)
    assert report.overall_accuracy == pytest.approx(0.7, rel=1e-15)
    # per-class accuracy is the per-class correct rate, i.e. recall
    np.testing.assert_array_equal(report.accuracy, report.recall)
    assert np.all(np.isnan(report.auc))
    assert report.flags == ()


def test_metrics_match_pure_python_loops():
    rng = np.random.default_rng(0)
    counts = rng.integers(0, 20, size=(5, 5))
    report = classification_metrics(counts, classes=range(5))
    for i in range(5):
        tp = counts[i, i]
        p = tp / counts[:, i].sum() if counts[:, i].sum() else 0.0
        r = tp / counts[i, :].sum() if counts[i, :].sum() else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        assert report.precision[i] == pytest.approx(p, abs=1e-15)
        assert report.recall[i] == pytest.approx(r, abs=1e-15)
        assert report.f1[i] == pytest.approx(f, abs=1e-15)
    assert report.overall_accuracy == pytest.approx(
        counts.trace() / counts.sum(), rel=1e-15
    )


def test_zero_denominators_are_flagged_not_nan():
    # class 2 never predicted: precision undefined; its recall is a real 0
    report = classification_metrics(np.array([[2, 0], [3, 0]]), classes=(1, 2))
    assert report.precision[1] == 0.0
    assert report.recall[1] == 0.0
    assert any("never predicted" in f for f in report.flags)
    assert any("F1 undefined" in f for f in report.flags)
    # class 2 absent from the test set: recall undefined
    report = classification_metrics(np.array([[4, 1], [0, 0]]), classes=(1, 2))
    assert any("absent from test set" in f for f in report.flags)


def test_report_shape_validation():
    ok = dict(
        accuracy=[1.0, 1.0], precision=[1.0, 1.0], recall=[1.0, 1.0],
        f1=[1.0, 1.0], auc=[np.nan, np.nan], overall_accuracy=1.0,
    )
    MetricsReport(classes=(1, 2), confusion=np.eye(2), **ok)
    with pytest.raises(ShapeError):
        MetricsReport(classes=(1, 2), confusion=np.eye(3), **ok)
    bad = dict(ok, recall=[1.0, 1.0, 1.0])
    with pytest.raises(ShapeError):
        MetricsReport(classes=(1, 2), confusion=np.eye(2), **bad)


# ------------------------------------------------------------------- AUC


def test_auc_by_hand():
    # positives score (0.35, 0.8) against negatives (0.1, 0.4):
    # 3 of 4 pairs ranked correctly
    truths = np.array([1, 1, 2, 2])
    scores = np.array([[0.0, 0.1], [0.0, 0.4], [0.0, 0.35], [0.0, 0.8]])
    auc, flags = roc_auc(scores, truths, classes=(1, 2))
    assert auc[1] == pytest.approx(0.75, abs=1e-15)
    assert flags == ()


def test_auc_ties_count_half():
    truths = np.array([1, 1, 2, 2])
    scores = np.full((4, 2), 0.5)
    auc, _ = roc_auc(scores, truths, classes=(1, 2))
    np.testing.assert_allclose(auc, [0.5, 0.5], atol=1e-15)


def test_auc_perfect_and_inverted():
    truths = np.array([1, 1, 2, 2])
    scores = np.array([[9.0, 0.0], [8.0, 1.0], [0.0, 8.0], [1.0, 9.0]])
    auc, _ = roc_auc(scores, truths, classes=(1, 2))
    np.testing.assert_allclose(auc, [1.0, 1.0], atol=1e-15)
    auc, _ = roc_auc(scores[::-1], truths, classes=(1, 2))
    np.testing.assert_allclose(auc, [0.0, 0.0], atol=1e-15)


def test_auc_matches_pair_counting_oracle():
    rng = np.random.default_rng(1)
    truths = rng.integers(1, 4, size=40)
    scores = rng.standard_normal((40, 3))
    auc, _ = roc_auc(scores, truths, classes=(1, 2, 3))
    for idx, c in enumerate((1, 2, 3)):
        pos = scores[truths == c, idx]
        neg = scores[truths != c, idx]
        wins = sum(float(p > n) + 0.5 * float(p == n) for p in pos for n in neg)
        assert auc[idx] == pytest.approx(wins / (len(pos) * len(neg)), rel=1e-12)


def test_auc_undefined_for_one_sided_truths():
    # every sample is class 1: class 2 has no positives and class 1 has
    # no negatives, so both AUCs are undefined
    truths = np.array([1, 1, 1])
    scores = np.zeros((3, 2))
    auc, flags = roc_auc(scores, truths, classes=(1, 2))
    assert np.all(np.isnan(auc))
    assert sum("one-sided" in f for f in flags) == 2
    # with both classes present only the absent class is undefined
    auc, flags = roc_auc(np.zeros((3, 3)), np.array([1, 1, 2]), classes=(1, 2, 3))
    np.testing.assert_array_equal(np.isnan(auc), [False, False, True])


def test_auc_shape_validation():
    with pytest.raises(ShapeError):
        roc_auc(np.zeros((3, 3)), np.array([1, 2]), classes=(1, 2))


def test_evaluate_predictions_combines_everything():
    truths = [1, 1, 2, 2, 3, 3]
    preds = [1, 1, 2, 3, 3, 3]
    scores = np.eye(3)[np.array(preds) - 1] * 2.0
    report = evaluate_predictions(truths, preds, scores, classes=(1, 2, 3), subject_id=7)
    np.testing.assert_array_equal(report.confusion, [[2, 0, 0], [0, 1, 1], [0, 0, 2]])
    assert report.subject_id == 7
    assert report.overall_accuracy == pytest.approx(5 / 6)
    assert not np.any(np.isnan(report.auc))


# ----------------------------------------------------------- aggregation


def _simple_report(subject, overall, auc1):
    return MetricsReport(
        classes=(1, 2),
        confusion=np.array([[4.0, 0.0], [0.0, 4.0]]) * overall,
        accuracy=[overall, overall],
        precision=[overall, overall],
        recall=[overall, overall],
        f1=[overall, overall],
        auc=[auc1, np.nan],
        overall_accuracy=overall,
        subject_id=subject,
        flags=(f"note {subject}",),
    )


def test_mean_report_arithmetic():
    mean = mean_report([_simple_report(1, 0.8, 0.9), _simple_report(2, 0.6, 0.7)])
    assert mean.n_subjects == 2
    assert mean.subject_id is None
    assert mean.overall_accuracy == pytest.approx(0.7, rel=1e-15)
    np.testing.assert_allclose(mean.precision, [0.7, 0.7], rtol=1e-15)
    np.testing.assert_allclose(mean.confusion, [[2.8, 0.0], [0.0, 2.8]], rtol=1e-15)
    # NaN-aware: class-1 AUC averages the defined values, class-2 stays NaN
    assert mean.auc[0] == pytest.approx(0.8, rel=1e-15)
    assert np.isnan(mean.auc[1])
    assert "subject 1: note 1" in mean.flags and "subject 2: note 2" in mean.flags


def test_mean_report_partial_nan_auc():
    a = _simple_report(1, 0.5, 0.9)
    b = MetricsReport(
        classes=(1, 2), confusion=np.eye(2), accuracy=[1, 1], precision=[1, 1],
        recall=[1, 1], f1=[1, 1], auc=[np.nan, 0.4], overall_accuracy=1.0,
        subject_id=2,
    )
    mean = mean_report([a, b])
    np.testing.assert_allclose(mean.auc, [0.9, 0.4], rtol=1e-15)


def test_mean_report_validation():
    with pytest.raises(DataError):
        mean_report([])
    other = MetricsReport(
        classes=(1, 3), confusion=np.eye(2), accuracy=[1, 1], precision=[1, 1],
        recall=[1, 1], f1=[1, 1], auc=[np.nan, np.nan], overall_accuracy=1.0,
    )
    with pytest.raises(DataError, match="class set"):
        mean_report([_simple_report(1, 0.5, 0.5), other])


def test_macro_skips_nan():
    report = _simple_report(1, 0.8, 0.9)
    assert report.macro("precision") == pytest.approx(0.8, rel=1e-15)
    assert report.macro("auc") == pytest.approx(0.9, rel=1e-15)  # NaN excluded
    all_nan = MetricsReport(
        classes=(1, 2), confusion=np.eye(2), accuracy=[1, 1], precision=[1, 1],
        recall=[1, 1], f1=[1, 1], auc=[np.nan, np.nan], overall_accuracy=1.0,
    )
    assert math.isnan(all_nan.macro("auc"))


# --------------------------------------------------------------- files


def test_report_json_round_trip(tmp_path):
    truths = [1, 1, 2, 2, 2]
    preds = [1, 2, 2, 2, 1]
    rng = np.random.default_rng(2)
    report = evaluate_predictions(
        truths, preds, rng.standard_normal((5, 2)), classes=(1, 2), subject_id=3
    )
    path = tmp_path / "r.json"
    save_report_json(report, path)
    back = load_report_json(path)
    assert back.classes == report.classes
    assert back.subject_id == 3
    assert back.overall_accuracy == report.overall_accuracy
    np.testing.assert_array_equal(back.confusion, report.confusion)
    for name in METRIC_NAMES:
        np.testing.assert_array_equal(getattr(back, name), getattr(report, name))
    assert back.flags == report.flags
    # NaN AUC survives as JSON null, not the string "NaN"
    one_sided = evaluate_predictions([1, 1], [1, 1], np.zeros((2, 2)), classes=(1, 2))
    save_report_json(one_sided, path)
    assert "NaN" not in path.read_text()
    assert np.isnan(load_report_json(path).auc[1])


def test_report_json_bytes_are_deterministic(tmp_path):
    report = _simple_report(1, 0.8, 0.9)
    save_report_json(report, tmp_path / "a.json")
    save_report_json(report, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_summary_csv_layout_and_round_trip(tmp_path):
    reports = [_simple_report(5, 0.8, 0.9), _simple_report(2, 0.6, 0.7)]
    aggregate = mean_report(reports)
    path = tmp_path / "summary.csv"
    save_summary_csv(reports, aggregate, path)
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == [
        "subject", "overall_accuracy", "macro_accuracy", "macro_precision",
        "macro_recall", "macro_f1", "macro_auc",
    ]
    # subjects sorted numerically, aggregate labeled "mean" last
    assert [r[0] for r in rows[1:]] == ["2", "5", "mean"]
    assert float(rows[2][1]) == 0.8  # repr round-trips exactly
    assert float(rows[3][1]) == aggregate.overall_accuracy
    assert float(rows[1][6]) == 0.7  # macro AUC with the NaN class excluded

"""Confusion matrices, per-class rates, and one-vs-rest AUC.

Per-class "accuracy" is the per-class correct-classification rate, i.e.
the same quantity as recall under this protocol; both are reported so the
summary table carries the conventional column set (accuracy, precision,
recall, F1, AUC) per gesture plus macro averages.

Zero-denominator rates (a class never predicted, or absent from the test
set) are reported as 0 with an explanatory flag; an AUC is undefined when
a class has no positives or no negatives and is stored as NaN and excluded
from the macro average.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .errors import DataError, ShapeError

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "auc")


def confusion(truths, predictions, classes) -> np.ndarray:
    """Count matrix with rows = true class, columns = predicted class."""
    truths = np.asarray(truths).ravel()
    predictions = np.asarray(predictions).ravel()
    if truths.shape != predictions.shape:
        raise ShapeError(
            f"{truths.size} truths vs {predictions.size} predictions"
        )
    classes = [int(c) for c in classes]
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(truths, predictions):
        if int(t) not in index or int(p) not in index:
            raise DataError(f"label outside class set: true {t}, predicted {p}")
        counts[index[int(t)], index[int(p)]] += 1
    return counts


@dataclass(frozen=True)
class MetricsReport:
    """Everything reported for one evaluation (or an across-subject mean).

    ``confusion`` is float64 so averaged reports can hold fractional mean
    counts.  Per-class arrays align with ``classes``; AUC entries may be
    NaN (undefined).  ``flags`` collects human-readable notes about any
    zero-denominator or undefined value.
    """

    classes: tuple[int, ...]
    confusion: np.ndarray
    accuracy: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    auc: np.ndarray
    overall_accuracy: float
    flags: tuple[str, ...] = ()
    subject_id: int | None = None
    n_subjects: int = 1

    def __post_init__(self):
        k = len(self.classes)
        object.__setattr__(self, "confusion", np.asarray(self.confusion, dtype=np.float64))
        for name in METRIC_NAMES:
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.confusion.shape != (k, k):
            raise ShapeError(f"confusion must be ({k}, {k}), got {self.confusion.shape}")
        for name in METRIC_NAMES:
            if getattr(self, name).shape != (k,):
                raise ShapeError(f"per-class {name} must have length {k}")

    def macro(self, name: str) -> float:
        """Unweighted mean over classes; NaN entries (undefined AUC) excluded."""
        values = getattr(self, name)
        defined = values[~np.isnan(values)]
        return float(defined.mean()) if defined.size else float("nan")

    def to_dict(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "n_subjects": self.n_subjects,
            "classes": list(self.classes),
            "confusion": self.confusion.tolist(),
            "per_class": {
                name: [None if np.isnan(v) else float(v) for v in getattr(self, name)]
                for name in METRIC_NAMES
            },
            "macro": {name: _none_if_nan(self.macro(name)) for name in METRIC_NAMES},
            "overall_accuracy": self.overall_accuracy,
            "flags": list(self.flags),
        }


def _none_if_nan(value: float):
    return None if np.isnan(value) else float(value)


def report_from_dict(raw: dict) -> MetricsReport:
    per_class = {
        name: np.array(
            [np.nan if v is None else v for v in raw["per_class"][name]], dtype=np.float64
        )
        for name in METRIC_NAMES
    }
    return MetricsReport(
        classes=tuple(int(c) for c in raw["classes"]),
        confusion=np.array(raw["confusion"], dtype=np.float64),
        overall_accuracy=float(raw["overall_accuracy"]),
        flags=tuple(raw.get("flags", ())),
        subject_id=raw.get("subject_id"),
        n_subjects=int(raw.get("n_subjects", 1)),
        **per_class,
    )


def classification_metrics(
    counts: np.ndarray,
    classes,
    auc: np.ndarray | None = None,
    subject_id: int | None = None,
    extra_flags: tuple[str, ...] = (),
) -> MetricsReport:
    """Per-class precision/recall/F1 (and accuracy = per-class correct rate).

    ``auc`` may be supplied from :func:`roc_auc`; otherwise it is NaN.
    Overall accuracy is exactly trace/total.
    """
    counts = np.asarray(counts, dtype=np.float64)
    classes = tuple(int(c) for c in classes)
    k = len(classes)
    if counts.shape != (k, k) or k == 0:
        raise ShapeError(f"need a nonempty ({k}, {k}) confusion matrix, got {counts.shape}")
    flags = list(extra_flags)
    tp = np.diagonal(counts)
    row_sums = counts.sum(axis=1)
    col_sums = counts.sum(axis=0)
    precision = np.zeros(k)
    recall = np.zeros(k)
    f1 = np.zeros(k)
    for idx, c in enumerate(classes):
        if col_sums[idx] > 0:
            precision[idx] = tp[idx] / col_sums[idx]
        else:
            flags.append(f"class {c}: precision undefined (never predicted), reported 0")
        if row_sums[idx] > 0:
            recall[idx] = tp[idx] / row_sums[idx]
        else:
            flags.append(f"class {c}: recall undefined (absent from test set), reported 0")
        if precision[idx] + recall[idx] > 0:
            f1[idx] = 2 * precision[idx] * recall[idx] / (precision[idx] + recall[idx])
        else:
            flags.append(f"class {c}: F1 undefined, reported 0")
    total = counts.sum()
    overall = float(np.trace(counts) / total) if total > 0 else 0.0
    if auc is None:
        auc = np.full(k, np.nan)
    return MetricsReport(
        classes=classes,
        confusion=counts,
        accuracy=recall.copy(),
        precision=precision,
        recall=recall,
        f1=f1,
        auc=np.asarray(auc, dtype=np.float64),
        overall_accuracy=overall,
        flags=tuple(flags),
        subject_id=subject_id,
    )


def roc_auc(scores: np.ndarray, truths, classes) -> tuple[np.ndarray, tuple[str, ...]]:
    """One-vs-rest AUC per class from per-class score columns.

    Uses the rank-statistic formulation (ties contribute 1/2): with ranks
    R of the class's scores over all samples, AUC = (sum of positive ranks
    - n_pos(n_pos+1)/2) / (n_pos * n_neg).  Classes with no positives or no
    negatives get NaN plus a flag.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truths = np.asarray(truths).ravel()
    classes = tuple(int(c) for c in classes)
    if scores.ndim != 2 or scores.shape != (truths.size, len(classes)):
        raise ShapeError(
            f"scores must be (n_samples, n_classes) = ({truths.size}, {len(classes)}), "
            f"got {scores.shape}"
        )
    auc = np.full(len(classes), np.nan)
    flags = []
    for idx, c in enumerate(classes):
        positive = truths == c
        n_pos = int(positive.sum())
        n_neg = truths.size - n_pos
        if n_pos == 0 or n_neg == 0:
            flags.append(f"class {c}: AUC undefined (one-sided test set)")
            continue
        ranks = rankdata(scores[:, idx])
        auc[idx] = (ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    return auc, tuple(flags)


def evaluate_predictions(
    truths, predictions, scores, classes, subject_id: int | None = None
) -> MetricsReport:
    """Confusion + rates + AUC in one step (the per-subject test report)."""
    counts = confusion(truths, predictions, classes)
    auc, auc_flags = roc_auc(scores, truths, classes)
    return classification_metrics(
        counts, classes, auc=auc, subject_id=subject_id, extra_flags=auc_flags
    )


def mean_report(reports: list[MetricsReport]) -> MetricsReport:
    """Unweighted across-subject mean (mean counts, mean per-class rates).

    AUC means ignore NaN entries; a class undefined everywhere stays NaN.
    """
    if not reports:
        raise DataError("cannot average zero reports")
    classes = reports[0].classes
    if any(r.classes != classes for r in reports):
        raise DataError("reports disagree on the class set")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN AUC columns
        per_class = {
            name: np.nanmean(np.stack([getattr(r, name) for r in reports]), axis=0)
            for name in METRIC_NAMES
        }
    flags = tuple(
        f"subject {r.subject_id}: {flag}" for r in reports for flag in r.flags
    )
    return MetricsReport(
        classes=classes,
        confusion=np.mean([r.confusion for r in reports], axis=0),
        overall_accuracy=float(np.mean([r.overall_accuracy for r in reports])),
        flags=flags,
        subject_id=None,
        n_subjects=len(reports),
        **per_class,
    )


def save_report_json(report: MetricsReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n")


def load_report_json(path) -> MetricsReport:
    return report_from_dict(json.loads(Path(path).read_text()))


def save_summary_csv(reports: list[MetricsReport], aggregate: MetricsReport | None, path) -> None:
    """One row per subject plus a final "mean" row of the aggregate."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["subject", "overall_accuracy", "macro_accuracy", "macro_precision",
             "macro_recall", "macro_f1", "macro_auc"]
        )
        def _row(label, r):
            writer.writerow(
                [label, repr(r.overall_accuracy)]
                + [repr(r.macro(name)) for name in METRIC_NAMES]
            )
        for r in sorted(reports, key=lambda r: (r.subject_id is None, r.subject_id)):
            _row(r.subject_id, r)
        if aggregate is not None:
            _row("mean", aggregate)

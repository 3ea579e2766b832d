"""End-to-end orchestration: config, per-subject pipeline, artifacts.

A run takes each subject through segment -> filter -> normalize ->
coherence matrices -> feature table -> split -> (optional grid search) ->
train -> evaluate, then writes features, models, metrics, and figures
under one output directory together with a manifest that records every
parameter needed to reproduce the run byte for byte.

Subjects are independent: a failing subject is recorded (stage + reason)
and the run continues with the rest.  With ``workers > 1`` subjects are
processed concurrently (or, for a single subject, its 102 trials are);
results are joined in subject-id order, so parallel runs emit identical
bytes to serial ones.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dsp, evalmetrics, figures, netfeat, spectral, svm, synthetic
from .datamodel import (
    MIN_SEGMENT_SAMPLES,
    SplitSpec,
    SubjectDataset,
    TrialSegment,
    segment_trials,
)
from .errors import ConfigError, FormatError, MyocoherenceError
from .ingest import load_subject_file, subject_id_from_path
from .netfeat import CoherenceMatrix, FeatureTable

OUTPUT_DIR_ENV = "MYOCOHERENCE_OUTPUT_DIR"
MANIFEST_FORMAT_VERSION = 1

try:
    from importlib.metadata import version as _dist_version

    PACKAGE_VERSION = _dist_version("myocoherence")
except Exception:  # pragma: no cover - only hit when not installed
    PACKAGE_VERSION = "0.0.0"


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a full run; defaults match the reference protocol.

    Input comes from ``data_files`` (``.mat``/``.csv`` recordings, one
    subject each) and/or ``synthetic_subjects`` generated recordings.
    ``subjects`` optionally restricts which subject ids are processed.
    ``gamma`` may be "scale" or a positive number.
    """

    data_files: tuple[str, ...] = ()
    subjects: tuple[int, ...] = ()
    synthetic_subjects: int = 0
    output_dir: str = "results"
    seed: int = 0
    workers: int = 1
    # signal conditioning
    bandpass_low_hz: float = 10.0
    bandpass_high_hz: float = 900.0
    bandpass_order: int = 4
    notch_hz: float = 50.0
    notch_quality: float = 30.0
    apply_notch: bool = True
    min_segment_samples: int = MIN_SEGMENT_SAMPLES
    # spectral estimation
    window_samples: int = 600
    overlap_fraction: float = 0.5
    taper: str = "hann"
    # split
    train_repetitions: tuple[int, ...] = (1, 3, 4, 6)
    test_repetitions: tuple[int, ...] = (2, 5)
    # classifier
    degree: int = 2
    c: float = 10.0
    gamma: float | str = "scale"
    coef0: float = 0.0
    tolerance: float = 1e-3
    strategy: str = "ovo"
    grid_search: bool = False
    grid_degrees: tuple[int, ...] = (1, 2, 3)
    grid_cs: tuple[float, ...] = (0.1, 1.0, 10.0, 100.0)
    cv_folds: int = 3
    # synthetic input shape
    synthetic_move_seconds: float = 5.0
    synthetic_rest_seconds: float = 0.5
    write_figures: bool = True

    def __post_init__(self):
        for name in ("data_files",):
            object.__setattr__(self, name, tuple(str(v) for v in getattr(self, name)))
        for name in ("subjects", "train_repetitions", "test_repetitions", "grid_degrees"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        object.__setattr__(self, "grid_cs", tuple(float(v) for v in self.grid_cs))
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.synthetic_subjects < 0:
            raise ConfigError("synthetic_subjects must be >= 0")
        if self.min_segment_samples < self.window_samples:
            raise ConfigError(
                "min_segment_samples must cover at least one analysis window"
            )
        # Constructing the stage parameter objects validates their ranges;
        # surface any complaint as a configuration error.
        try:
            self.welch_params()
            self.split_spec()
            self.svm_params()
        except MyocoherenceError as exc:
            raise ConfigError(str(exc)) from exc
        if self.strategy not in ("ovo", "ovr"):
            raise ConfigError(f"strategy must be 'ovo' or 'ovr', got {self.strategy!r}")

    def welch_params(self) -> spectral.WelchParams:
        return spectral.WelchParams(
            window_samples=self.window_samples,
            overlap_fraction=self.overlap_fraction,
            taper=self.taper,
        )

    def split_spec(self) -> SplitSpec:
        return SplitSpec(
            train_repetitions=frozenset(self.train_repetitions),
            test_repetitions=frozenset(self.test_repetitions),
        )

    def svm_params(self) -> svm.SvmHyperParams:
        return svm.SvmHyperParams(
            degree=self.degree,
            c=self.c,
            gamma=self.gamma,
            coef0=self.coef0,
            tolerance=self.tolerance,
        )

    def filters(self) -> list[dsp.IirFilter]:
        cascade = [
            dsp.design_butterworth_bandpass(
                self.bandpass_low_hz,
                self.bandpass_high_hz,
                fs_hz=2000.0,
                prototype_order=self.bandpass_order,
            )
        ]
        if self.apply_notch:
            cascade.append(
                dsp.design_notch(self.notch_hz, fs_hz=2000.0, quality=self.notch_quality)
            )
        return cascade

    def to_dict(self) -> dict:
        raw = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in raw.items()}

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        return cls(**raw)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid config JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(raw)


@dataclass(frozen=True)
class SubjectResult:
    subject_id: int
    report: evalmetrics.MetricsReport
    model: svm.TrainedModel
    table: FeatureTable
    params: svm.SvmHyperParams
    n_trials: int


@dataclass(frozen=True)
class SubjectFailure:
    subject_id: int | None
    stage: str
    error: str


@dataclass(frozen=True)
class PipelineResult:
    output_dir: Path
    results: tuple[SubjectResult, ...]
    failures: tuple[SubjectFailure, ...]
    aggregate: evalmetrics.MetricsReport | None
    manifest_path: Path | None


def preprocess_subject(
    dataset: SubjectDataset, config: RunConfig
) -> tuple[list[TrialSegment], dsp.ChannelStats]:
    """Segment, filter (zero-phase cascade), and z-score one recording.

    Normalization statistics come from the training repetitions only and
    are applied to every trial.
    """
    segments = segment_trials(dataset, config.min_segment_samples)
    cascade = config.filters()
    filtered = [dsp.filter_segment(s, cascade) for s in segments]
    train_reps = set(config.train_repetitions)
    stats = dsp.zscore_fit([s for s in filtered if s.repetition in train_reps])
    return [dsp.zscore_apply(stats, s) for s in filtered], stats


def subject_coherence(
    segments: list[TrialSegment], config: RunConfig, workers: int = 1
) -> list[CoherenceMatrix]:
    """One coherence matrix per trial, in trial order.

    Trials are independent; with ``workers > 1`` they are computed on a
    thread pool whose order-preserving map keeps output identical to the
    serial path.
    """
    params = config.welch_params()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda s: spectral.coherence_matrix(s, params), segments))
    return [spectral.coherence_matrix(s, params) for s in segments]


def train_subject(
    table: FeatureTable, config: RunConfig, stats: dsp.ChannelStats | None = None
) -> tuple[svm.TrainedModel, svm.SvmHyperParams, FeatureTable, FeatureTable]:
    """Split the table, optionally grid-search, and fit the classifier."""
    train, test = netfeat.split(table, config.split_spec())
    params = config.svm_params()
    if config.grid_search:
        params = svm.grid_search_cv(
            train.features,
            train.gestures,
            degrees=config.grid_degrees,
            cs=config.grid_cs,
            folds=config.cv_folds,
            seed=config.seed,
            base_params=params,
            strategy=config.strategy,
        )
    trainer = svm.ovo_train if config.strategy == "ovo" else svm.ovr_train
    model = trainer(
        train.features,
        train.gestures,
        params,
        column_names=table.column_names,
        channel_stats=stats,
    )
    return model, params, train, test


def evaluate_subject(
    model: svm.TrainedModel, test: FeatureTable, subject_id: int | None = None
) -> evalmetrics.MetricsReport:
    predicted, scores = svm.predict(model, test.features)
    return evalmetrics.evaluate_predictions(
        test.gestures, predicted, scores, model.classes, subject_id=subject_id
    )


def save_matrices(
    matrices: list[CoherenceMatrix], subject_id: int, config: RunConfig, path
) -> None:
    """Store labeled coherence matrices (the ``coherence`` stage artifact)."""
    payload = {
        "format_version": 1,
        "subject_id": subject_id,
        "welch": {
            "window_samples": config.window_samples,
            "overlap_fraction": config.overlap_fraction,
            "taper": config.taper,
        },
        "matrices": [
            {"gesture": m.gesture, "repetition": m.repetition, "values": m.values.tolist()}
            for m in matrices
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def load_matrices(path) -> tuple[list[CoherenceMatrix], int]:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid matrices JSON ({exc})") from exc
    if payload.get("format_version") != 1:
        raise FormatError(f"{path}: unsupported matrices format version")
    matrices = [
        CoherenceMatrix(
            np.array(m["values"], dtype=np.float64), m["gesture"], m["repetition"]
        )
        for m in payload["matrices"]
    ]
    return matrices, int(payload["subject_id"])


def _features_metadata(config: RunConfig, stats: dsp.ChannelStats) -> dict:
    return {
        "welch": {
            "window_samples": config.window_samples,
            "overlap_fraction": config.overlap_fraction,
            "taper": config.taper,
        },
        "filters": {
            "bandpass_hz": [config.bandpass_low_hz, config.bandpass_high_hz],
            "bandpass_order": config.bandpass_order,
            "notch_hz": config.notch_hz if config.apply_notch else None,
            "notch_quality": config.notch_quality if config.apply_notch else None,
        },
        "normalization": {"mean": stats.mean.tolist(), "std": stats.std.tolist()},
    }


class _Artifacts:
    """Records every file written, as paths relative to the run root."""

    def __init__(self, root: Path):
        self.root = root
        self.paths: list[str] = []

    def write_text(self, relative: str, text: str) -> Path:
        path = self.root / relative
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.paths.append(relative)
        return path

    def note(self, relative: str) -> Path:
        path = self.root / relative
        path.parent.mkdir(parents=True, exist_ok=True)
        self.paths.append(relative)
        return path


def _write_subject_artifacts(
    out: _Artifacts,
    result: SubjectResult,
    matrices: list[CoherenceMatrix],
    stats: dsp.ChannelStats,
    config: RunConfig,
) -> None:
    sid = result.subject_id
    tag = f"subject_{sid:02d}"
    netfeat.save_feature_table(
        result.table,
        out.note(f"features/{tag}.csv"),
        metadata=_features_metadata(config, stats),
    )
    out.paths.append(f"features/{tag}.csv.meta.json")
    svm.save_model(result.model, out.note(f"models/{tag}.model"))
    evalmetrics.save_report_json(result.report, out.note(f"metrics/{tag}.json"))
    if config.write_figures:
        out.write_text(
            f"figures/{tag}_confusion.svg",
            figures.render_confusion(
                result.report.confusion,
                result.report.classes,
                title=f"subject {sid}: confusion (test reps {list(config.test_repetitions)})",
            ),
        )
        by_gesture: dict[int, list[CoherenceMatrix]] = {}
        for m in matrices:
            by_gesture.setdefault(m.gesture, []).append(m)
        for gesture in sorted(by_gesture):
            median = netfeat.median_matrix(by_gesture[gesture])
            out.write_text(
                f"figures/{tag}_gesture_{gesture:02d}_heatmap.svg",
                figures.render_heatmap(
                    median, title=f"subject {sid} gesture {gesture}: median coherence"
                ),
            )
            out.write_text(
                f"figures/{tag}_gesture_{gesture:02d}_network.svg",
                figures.render_network(
                    median, title=f"subject {sid} gesture {gesture}: muscle network"
                ),
            )


def _run_one(subject_hint, loader, config: RunConfig, workers: int, out: _Artifacts):
    stage = "ingest"
    try:
        dataset = loader()
        stage = "preprocess"
        segments, stats = preprocess_subject(dataset, config)
        stage = "coherence"
        matrices = subject_coherence(segments, config, workers=workers)
        stage = "features"
        table = netfeat.build_feature_table(matrices)
        stage = "train"
        model, params, train, test = train_subject(table, config, stats=stats)
        stage = "evaluate"
        report = evaluate_subject(model, test, subject_id=dataset.subject_id)
        result = SubjectResult(
            subject_id=dataset.subject_id,
            report=report,
            model=model,
            table=table,
            params=params,
            n_trials=len(segments),
        )
        stage = "write"
        _write_subject_artifacts(out, result, matrices, stats, config)
        return result
    except MyocoherenceError as exc:
        return SubjectFailure(subject_hint, stage, str(exc))


def _resolve_inputs(config: RunConfig):
    """(subject-id hint, loader) pairs; validates paths before any writes."""
    entries = []
    for sid in range(1, config.synthetic_subjects + 1):
        entries.append(
            (
                sid,
                lambda sid=sid: synthetic.generate_subject(
                    subject_id=sid,
                    seed=config.seed,
                    move_seconds=config.synthetic_move_seconds,
                    rest_seconds=config.synthetic_rest_seconds,
                ),
            )
        )
    for raw_path in config.data_files:
        path = Path(raw_path)
        if not path.exists():
            raise ConfigError(f"dataset path does not exist: {path}")
        hint = subject_id_from_path(path)
        entries.append((hint, lambda path=path: load_subject_file(path)))
    if not entries:
        raise ConfigError("no input: provide data_files or synthetic_subjects")
    if config.subjects:
        wanted = set(config.subjects)
        entries = [(sid, loader) for sid, loader in entries if sid is None or sid in wanted]
        if not entries:
            raise ConfigError(f"no inputs match subject selection {sorted(wanted)}")
    return entries


def run_pipeline(config: RunConfig, output_dir=None) -> PipelineResult:
    """Execute the full pipeline and write all artifacts.

    Output location precedence: explicit argument, then the
    ``MYOCOHERENCE_OUTPUT_DIR`` environment variable, then the config.
    """
    entries = _resolve_inputs(config)
    root = Path(output_dir or os.environ.get(OUTPUT_DIR_ENV) or config.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    out = _Artifacts(root)

    if config.workers > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(
                pool.map(lambda e: _run_one(e[0], e[1], config, 1, out), entries)
            )
    else:
        inner = config.workers if len(entries) == 1 else 1
        outcomes = [_run_one(sid, loader, config, inner, out) for sid, loader in entries]

    results = sorted(
        (o for o in outcomes if isinstance(o, SubjectResult)), key=lambda r: r.subject_id
    )
    failures = tuple(o for o in outcomes if isinstance(o, SubjectFailure))
    seen: dict[int, int] = {}
    for r in results:
        seen[r.subject_id] = seen.get(r.subject_id, 0) + 1
    duplicates = sorted(sid for sid, count in seen.items() if count > 1)
    if duplicates:
        raise ConfigError(f"duplicate subject id(s) across inputs: {duplicates}")

    aggregate = None
    if results:
        reports = [r.report for r in results]
        aggregate = evalmetrics.mean_report(reports)
        evalmetrics.save_report_json(aggregate, out.note("metrics/mean.json"))
        evalmetrics.save_summary_csv(reports, aggregate, out.note("metrics/summary.csv"))
        if config.write_figures:
            out.write_text(
                "figures/confusion_mean.svg",
                figures.render_confusion(
                    aggregate.confusion,
                    aggregate.classes,
                    title=f"mean confusion across {len(reports)} subject(s)",
                ),
            )

    manifest_path = _write_manifest(out, config, results, failures)
    return PipelineResult(root, tuple(results), failures, aggregate, manifest_path)


def _write_manifest(out, config, results, failures) -> Path:
    subjects = [
        {
            "subject_id": r.subject_id,
            "status": "ok",
            "n_trials": r.n_trials,
            "overall_accuracy": r.report.overall_accuracy,
            "macro_f1": r.report.macro("f1"),
            "degree": r.params.degree,
            "c": r.params.c,
            "converged": r.model.converged,
        }
        for r in results
    ] + [
        {
            "subject_id": f.subject_id,
            "status": "failed",
            "stage": f.stage,
            "error": f.error,
        }
        for f in sorted(failures, key=lambda f: (f.subject_id is None, f.subject_id or 0))
    ]
    manifest = {
        "format_version": MANIFEST_FORMAT_VERSION,
        "package": {"name": "myocoherence", "version": PACKAGE_VERSION},
        "config": config.to_dict(),
        "subjects": subjects,
        "artifacts": sorted(out.paths),
    }
    return out.write_text(
        "manifest.json", json.dumps(manifest, indent=1, sort_keys=True) + "\n"
    )


def run_from_manifest(manifest_path, output_dir=None) -> PipelineResult:
    """Re-run a finished pipeline from its manifest alone."""
    try:
        manifest = json.loads(Path(manifest_path).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read manifest {manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{manifest_path}: invalid manifest JSON ({exc})") from exc
    if manifest.get("format_version") != MANIFEST_FORMAT_VERSION:
        raise FormatError(f"{manifest_path}: unsupported manifest format version")
    if "config" not in manifest:
        raise FormatError(f"{manifest_path}: manifest has no config block")
    config = RunConfig.from_dict(manifest["config"])
    return run_pipeline(config, output_dir=output_dir)

"""Command-line interface.

Subcommands mirror the pipeline stages — ``ingest``, ``coherence``,
``features``, ``train``, ``evaluate``, ``report`` — plus ``run-all`` which
chains everything.  Every subcommand reads the same JSON config
(``--config``); command-line flags override individual config keys.  The
staged commands hand artifacts to each other through the output directory
(``matrices/`` -> ``features/`` -> ``models/`` -> ``metrics/`` ->
``figures/``), so a long run can be resumed or inspected stage by stage.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 partial failure (some subjects succeeded, some failed).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import evalmetrics, figures, netfeat, svm
from .errors import ConfigError, DataError, MyocoherenceError
from .report import (
    OUTPUT_DIR_ENV,
    RunConfig,
    _features_metadata,
    _resolve_inputs,
    evaluate_subject,
    load_matrices,
    preprocess_subject,
    run_pipeline,
    save_matrices,
    subject_coherence,
    train_subject,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this project reserves 2 for data."""

    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _subject_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _gamma(text: str):
    if text == "scale":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"gamma must be a number or 'scale', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument(
        "--data", action="append", metavar="FILE", help="subject recording (.mat or .csv); repeatable"
    )
    common.add_argument(
        "--synthetic", type=int, metavar="N", help="generate N synthetic subjects"
    )
    common.add_argument(
        "--subjects", type=_subject_list, metavar="IDS", help="restrict to these subject ids (comma-separated)"
    )
    common.add_argument("--output-dir", metavar="DIR", help=f"artifact root (or ${OUTPUT_DIR_ENV})")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--degree", type=int, help="polynomial kernel degree")
    common.add_argument("--c", type=float, help="SVM regularization C")
    common.add_argument("--gamma", type=_gamma)
    common.add_argument("--coef0", type=float)
    common.add_argument("--strategy", choices=("ovo", "ovr"))
    common.add_argument("--grid-search", action="store_true", default=None)
    common.add_argument("--window-samples", type=int)
    common.add_argument("--overlap", type=float, dest="overlap_fraction")
    common.add_argument("--taper", choices=("hann", "hamming", "rectangular"))
    common.add_argument("--no-notch", action="store_true", default=None)
    common.add_argument("--no-figures", action="store_true", default=None)

    parser = _Parser(
        prog="myocoherence",
        description="Gesture classification from coherence-based muscle networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    stages = (
        ("ingest", "validate inputs and summarize each recording", _cmd_ingest),
        ("coherence", "compute per-trial coherence matrices", _cmd_coherence),
        ("features", "assemble per-subject feature tables", _cmd_features),
        ("train", "fit classifiers from feature tables", _cmd_train),
        ("evaluate", "score trained models on the test repetitions", _cmd_evaluate),
        ("report", "render figures and summary from existing artifacts", _cmd_report),
        ("run-all", "full pipeline: ingest through report", _cmd_run_all),
    )
    for name, help_text, func in stages:
        stage = sub.add_parser(name, parents=[common], help=help_text)
        stage.set_defaults(func=func)
    return parser


_OVERRIDES = (
    ("data", "data_files"),
    ("synthetic", "synthetic_subjects"),
    ("subjects", "subjects"),
    ("output_dir", "output_dir"),
    ("seed", "seed"),
    ("workers", "workers"),
    ("degree", "degree"),
    ("c", "c"),
    ("gamma", "gamma"),
    ("coef0", "coef0"),
    ("strategy", "strategy"),
    ("window_samples", "window_samples"),
    ("overlap_fraction", "overlap_fraction"),
    ("taper", "taper"),
)


def config_from_args(args) -> RunConfig:
    base = RunConfig.load(args.config) if args.config else RunConfig()
    raw = base.to_dict()
    for arg_name, key in _OVERRIDES:
        value = getattr(args, arg_name, None)
        if value is not None:
            raw[key] = list(value) if isinstance(value, tuple) else value
    if args.grid_search:
        raw["grid_search"] = True
    if args.no_notch:
        raw["apply_notch"] = False
    if args.no_figures:
        raw["write_figures"] = False
    return RunConfig.from_dict(raw)


def _out_root(config: RunConfig) -> Path:
    import os

    root = Path(os.environ.get(OUTPUT_DIR_ENV) or config.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    return root


def _exit_code(n_ok: int, failures: list) -> int:
    if not failures:
        return EXIT_OK
    return EXIT_PARTIAL if n_ok else EXIT_DATA


def _for_each_subject(config: RunConfig, action) -> int:
    """Load each input and apply ``action(dataset)``; report per subject."""
    failures = []
    n_ok = 0
    for hint, loader in _resolve_inputs(config):
        try:
            dataset = loader()
            message = action(dataset)
            n_ok += 1
            print(f"subject {dataset.subject_id}: {message}")
        except MyocoherenceError as exc:
            failures.append((hint, exc))
            print(f"subject {hint}: FAILED: {exc}", file=sys.stderr)
    return _exit_code(n_ok, failures)


def _cmd_ingest(config: RunConfig, args) -> int:
    def describe(dataset):
        from .datamodel import missing_trial_pairs, segment_trials

        segments = segment_trials(dataset, config.min_segment_samples)
        missing = missing_trial_pairs(segments)
        note = f", missing {len(missing)} trial(s)" if missing else ""
        return (
            f"{dataset.n_samples} samples, {len(segments)} trials, "
            f"{len({s.gesture for s in segments})} gestures{note}"
        )

    return _for_each_subject(config, describe)


def _cmd_coherence(config: RunConfig, args) -> int:
    root = _out_root(config)

    def compute(dataset):
        segments, _ = preprocess_subject(dataset, config)
        matrices = subject_coherence(segments, config, workers=config.workers)
        path = root / "matrices" / f"subject_{dataset.subject_id:02d}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        save_matrices(matrices, dataset.subject_id, config, path)
        return f"{len(matrices)} coherence matrices -> {path}"

    return _for_each_subject(config, compute)


def _cmd_features(config: RunConfig, args) -> int:
    root = _out_root(config)
    matrix_files = sorted((root / "matrices").glob("subject_*.json"))
    (root / "features").mkdir(parents=True, exist_ok=True)
    if matrix_files:
        failures = []
        n_ok = 0
        for path in matrix_files:
            try:
                matrices, sid = load_matrices(path)
                if config.subjects and sid not in config.subjects:
                    continue
                table = netfeat.build_feature_table(matrices)
                out = root / "features" / f"subject_{sid:02d}.csv"
                netfeat.save_feature_table(table, out)
                n_ok += 1
                print(f"subject {sid}: {table.n_rows}x{table.features.shape[1]} -> {out}")
            except MyocoherenceError as exc:
                failures.append((path, exc))
                print(f"{path.name}: FAILED: {exc}", file=sys.stderr)
        return _exit_code(n_ok, failures)

    def compute(dataset):
        segments, stats = preprocess_subject(dataset, config)
        matrices = subject_coherence(segments, config, workers=config.workers)
        table = netfeat.build_feature_table(matrices)
        out = root / "features" / f"subject_{dataset.subject_id:02d}.csv"
        netfeat.save_feature_table(table, out, metadata=_features_metadata(config, stats))
        return f"{table.n_rows}x{table.features.shape[1]} -> {out}"

    return _for_each_subject(config, compute)


def _subject_id_from_artifact(path: Path) -> int:
    match = re.search(r"subject_(\d+)", path.name)
    if not match:
        raise DataError(f"cannot infer subject id from {path.name}")
    return int(match.group(1))


def _artifact_files(root: Path, subdir: str, suffix: str, config: RunConfig) -> list[Path]:
    files = sorted((root / subdir).glob(f"subject_*{suffix}"))
    if config.subjects:
        files = [f for f in files if _subject_id_from_artifact(f) in config.subjects]
    if not files:
        raise DataError(
            f"no {subdir}/subject_*{suffix} artifacts under {root} "
            f"(run the earlier stages first)"
        )
    return files


def _cmd_train(config: RunConfig, args) -> int:
    root = _out_root(config)
    failures = []
    n_ok = 0
    (root / "models").mkdir(parents=True, exist_ok=True)
    for path in _artifact_files(root, "features", ".csv", config):
        sid = _subject_id_from_artifact(path)
        try:
            table, _ = netfeat.load_feature_table(path)
            model, params, _, _ = train_subject(table, config)
            out = root / "models" / f"subject_{sid:02d}.model"
            svm.save_model(model, out)
            n_ok += 1
            print(
                f"subject {sid}: {len(model.binaries)} binary models "
                f"(degree {params.degree}, C {params.c:g}) -> {out}"
            )
        except MyocoherenceError as exc:
            failures.append((sid, exc))
            print(f"subject {sid}: FAILED: {exc}", file=sys.stderr)
    return _exit_code(n_ok, failures)


def _cmd_evaluate(config: RunConfig, args) -> int:
    root = _out_root(config)
    failures = []
    reports = []
    (root / "metrics").mkdir(parents=True, exist_ok=True)
    for path in _artifact_files(root, "features", ".csv", config):
        sid = _subject_id_from_artifact(path)
        try:
            table, _ = netfeat.load_feature_table(path)
            model_path = root / "models" / f"subject_{sid:02d}.model"
            if not model_path.exists():
                raise DataError(f"no model for subject {sid} (run `train` first)")
            model = svm.load_model(model_path)
            _, test = netfeat.split(table, config.split_spec())
            report = evaluate_subject(model, test, subject_id=sid)
            evalmetrics.save_report_json(report, root / "metrics" / f"subject_{sid:02d}.json")
            reports.append(report)
            print(f"subject {sid}: accuracy {report.overall_accuracy:.3f}")
        except MyocoherenceError as exc:
            failures.append((sid, exc))
            print(f"subject {sid}: FAILED: {exc}", file=sys.stderr)
    if reports:
        aggregate = evalmetrics.mean_report(reports)
        evalmetrics.save_report_json(aggregate, root / "metrics" / "mean.json")
        evalmetrics.save_summary_csv(reports, aggregate, root / "metrics" / "summary.csv")
        print(f"mean accuracy: {aggregate.overall_accuracy:.3f}")
    return _exit_code(len(reports), failures)


def _cmd_report(config: RunConfig, args) -> int:
    root = _out_root(config)
    (root / "figures").mkdir(parents=True, exist_ok=True)
    metric_files = _artifact_files(root, "metrics", ".json", config)
    reports = [evalmetrics.load_report_json(p) for p in metric_files]
    for r in reports:
        tag = f"subject_{r.subject_id:02d}"
        (root / "figures" / f"{tag}_confusion.svg").write_text(
            figures.render_confusion(r.confusion, r.classes, title=f"subject {r.subject_id}: confusion")
        )
    for path in sorted((root / "features").glob("subject_*.csv")):
        sid = _subject_id_from_artifact(path)
        if config.subjects and sid not in config.subjects:
            continue
        table, _ = netfeat.load_feature_table(path)
        for gesture in sorted(set(int(g) for g in table.gestures)):
            rows = [
                table.row_matrix(i)
                for i in range(table.n_rows)
                if int(table.gestures[i]) == gesture
            ]
            median = netfeat.median_matrix(rows)
            tag = f"subject_{sid:02d}_gesture_{gesture:02d}"
            (root / "figures" / f"{tag}_heatmap.svg").write_text(
                figures.render_heatmap(median, title=f"subject {sid} gesture {gesture}: median coherence")
            )
            (root / "figures" / f"{tag}_network.svg").write_text(
                figures.render_network(median, title=f"subject {sid} gesture {gesture}: muscle network")
            )
    aggregate = evalmetrics.mean_report(reports)
    (root / "figures" / "confusion_mean.svg").write_text(
        figures.render_confusion(
            aggregate.confusion, aggregate.classes,
            title=f"mean confusion across {len(reports)} subject(s)",
        )
    )
    print(f"figures for {len(reports)} subject(s) -> {root / 'figures'}")
    return EXIT_OK


def _cmd_run_all(config: RunConfig, args) -> int:
    result = run_pipeline(config)
    for r in result.results:
        print(
            f"subject {r.subject_id}: {r.n_trials} trials, "
            f"accuracy {r.report.overall_accuracy:.3f}, macro F1 {r.report.macro('f1'):.3f}"
        )
    for f in result.failures:
        print(f"subject {f.subject_id}: FAILED at {f.stage}: {f.error}", file=sys.stderr)
    if result.aggregate is not None:
        print(
            f"mean accuracy {result.aggregate.overall_accuracy:.3f} "
            f"across {len(result.results)} subject(s); artifacts in {result.output_dir}"
        )
    return _exit_code(len(result.results), list(result.failures))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        return args.func(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MyocoherenceError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

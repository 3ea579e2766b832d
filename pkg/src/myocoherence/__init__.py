"""Coherence-based muscle-network features for sEMG gesture classification.

The package turns multichannel surface-EMG recordings into functional
muscle networks — magnitude-squared coherence between every electrode
pair — and classifies hand gestures from the band-averaged network edges
with a polynomial-kernel support vector machine.

Layers, bottom to top:

* :mod:`~myocoherence.ingest` / :mod:`~myocoherence.datamodel` — load
  recordings (MATLAB or CSV), cut them into labeled trial segments.
* :mod:`~myocoherence.dsp` — zero-phase band-pass + mains-notch filtering
  and per-channel normalization.
* :mod:`~myocoherence.spectral` — Welch spectra and magnitude-squared
  coherence; :func:`coherence_matrix` builds the 12x12 network per trial.
* :mod:`~myocoherence.netfeat` — network matrices to feature tables and
  train/test splits.
* :mod:`~myocoherence.svm` — SMO-trained polynomial-kernel SVM with
  one-vs-one multiclass and cross-validated grid search.
* :mod:`~myocoherence.evalmetrics`, :mod:`~myocoherence.figures` —
  confusion/PRF/AUC metrics and deterministic SVG rendering.
* :mod:`~myocoherence.report` — the end-to-end per-subject pipeline and
  its on-disk artifacts; :mod:`~myocoherence.cli` wraps it in subcommands.
"""

from .datamodel import SplitSpec, SubjectDataset, TrialSegment, segment_trials
from .dsp import (
    ChannelStats,
    IirFilter,
    design_butterworth_bandpass,
    design_notch,
    filter_segment,
    filtfilt,
    zscore_apply,
    zscore_fit,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateChannelError,
    FilterDesignError,
    FormatError,
    MissingFieldError,
    MissingTrialsError,
    MyocoherenceError,
    SampleRateMismatchError,
    SegmentTooShortError,
    ShapeError,
    SignalLengthError,
    StructuralError,
    TruncatedFileError,
)
from .evalmetrics import (
    MetricsReport,
    classification_metrics,
    confusion,
    evaluate_predictions,
    mean_report,
    roc_auc,
)
from .figures import render_confusion, render_heatmap, render_network
from .ingest import load_csv, load_db2_subject, load_subject_file, save_csv
from .netfeat import (
    CoherenceMatrix,
    FeatureTable,
    build_feature_table,
    load_feature_table,
    matrix_from_vector,
    median_matrix,
    pair_names,
    save_feature_table,
    split,
    vectorize,
)
from .report import PipelineResult, RunConfig, SubjectResult, run_pipeline
from .spectral import (
    CoherenceSpectrum,
    CrossSpectrum,
    Spectrum,
    WelchParams,
    coherence_matrix,
    msc,
    welch,
)
from .spectral_oracle import msc_bruteforce_oracle
from .svm import (
    BinaryModel,
    SvmHyperParams,
    TrainedModel,
    grid_search_cv,
    load_model,
    ovo_train,
    ovr_train,
    poly_kernel,
    predict,
    save_model,
    smo_train,
)
from .synthetic import generate_dataset, generate_subject

__version__ = "0.1.0"

__all__ = [
    "BinaryModel",
    "ChannelStats",
    "CoherenceMatrix",
    "CoherenceSpectrum",
    "ConfigError",
    "CrossSpectrum",
    "DataError",
    "DegenerateChannelError",
    "FeatureTable",
    "FilterDesignError",
    "FormatError",
    "IirFilter",
    "MetricsReport",
    "MissingFieldError",
    "MissingTrialsError",
    "MyocoherenceError",
    "PipelineResult",
    "RunConfig",
    "SampleRateMismatchError",
    "SegmentTooShortError",
    "ShapeError",
    "SignalLengthError",
    "SplitSpec",
    "Spectrum",
    "StructuralError",
    "SubjectDataset",
    "SubjectResult",
    "SvmHyperParams",
    "TrainedModel",
    "TrialSegment",
    "TruncatedFileError",
    "WelchParams",
    "build_feature_table",
    "classification_metrics",
    "coherence_matrix",
    "confusion",
    "design_butterworth_bandpass",
    "design_notch",
    "evaluate_predictions",
    "filter_segment",
    "filtfilt",
    "generate_dataset",
    "generate_subject",
    "grid_search_cv",
    "load_csv",
    "load_db2_subject",
    "load_feature_table",
    "load_model",
    "load_subject_file",
    "matrix_from_vector",
    "mean_report",
    "median_matrix",
    "msc",
    "msc_bruteforce_oracle",
    "ovo_train",
    "ovr_train",
    "pair_names",
    "poly_kernel",
    "predict",
    "render_confusion",
    "render_heatmap",
    "render_network",
    "roc_auc",
    "run_pipeline",
    "save_csv",
    "save_feature_table",
    "save_model",
    "segment_trials",
    "smo_train",
    "split",
    "vectorize",
    "welch",
    "zscore_apply",
    "zscore_fit",
]

"""Coherence matrices, feature vectors, and the per-subject feature table.

A 12-channel trial yields a symmetric 12x12 matrix of frequency-averaged
coherence values with a zero diagonal.  Flattening it row-major while
skipping the diagonal gives a 132-element feature vector (both symmetric
halves are kept, so the count matches 144 - 12).  One subject with all
17 gestures x 6 repetitions produces a 102x132 table ordered gesture-major,
repetition-minor: rows 1-6 are gesture 1, rows 7-12 gesture 2, and so on.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datamodel import N_CHANNELS, N_GESTURES, N_REPETITIONS, SplitSpec
from .errors import DataError, FormatError, MissingTrialsError, ShapeError, StructuralError

_BOUND_SLACK = 1e-12

# Row-major scan of the 12x12 matrix with the diagonal skipped; this fixed
# order defines feature-column identity everywhere (CSV headers, models).
PAIR_ORDER: tuple[tuple[int, int], ...] = tuple(
    (i, j) for i in range(N_CHANNELS) for j in range(N_CHANNELS) if i != j
)
N_FEATURES = len(PAIR_ORDER)  # 132

_OFF_DIAGONAL = ~np.eye(N_CHANNELS, dtype=bool)


def pair_names() -> tuple[str, ...]:
    """Feature column names, 1-based: "ch_1-ch_2", "ch_1-ch_3", ..."""
    return tuple(f"ch_{i + 1}-ch_{j + 1}" for i, j in PAIR_ORDER)


def _check_unit_interval(values: np.ndarray, what: str) -> None:
    if values.size and (values.min() < -_BOUND_SLACK or values.max() > 1 + _BOUND_SLACK):
        raise DataError(
            f"{what} outside [0, 1]: min {values.min()!r}, max {values.max()!r}"
        )


@dataclass(frozen=True)
class CoherenceMatrix:
    """Symmetric 12x12 matrix of frequency-averaged coherence, zero diagonal.

    ``gesture``/``repetition`` label the trial the matrix came from; either
    may be None for aggregates (e.g. the per-gesture median used in figures).
    """

    values: np.ndarray
    gesture: int | None = None
    repetition: int | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.shape != (N_CHANNELS, N_CHANNELS):
            raise ShapeError(f"matrix must be {N_CHANNELS}x{N_CHANNELS}, got {values.shape}")
        if not np.array_equal(values, values.T):
            raise StructuralError("coherence matrix must be symmetric")
        if np.any(np.diagonal(values) != 0):
            raise StructuralError("coherence matrix diagonal must be exactly 0")
        _check_unit_interval(values, "coherence values")
        if self.gesture is not None and not 1 <= self.gesture <= N_GESTURES:
            raise StructuralError(f"gesture label {self.gesture} outside 1..{N_GESTURES}")
        if self.repetition is not None and not 1 <= self.repetition <= N_REPETITIONS:
            raise StructuralError(
                f"repetition label {self.repetition} outside 1..{N_REPETITIONS}"
            )


def vectorize(matrix: CoherenceMatrix) -> np.ndarray:
    """Flatten to 132 features: row-major scan skipping diagonal entries.

    Position 0 holds entry (1,2) of the matrix (1-based), position 11 holds
    (2,1), and so on per :data:`PAIR_ORDER`.
    """
    return matrix.values[_OFF_DIAGONAL].copy()


def matrix_from_vector(
    vector: np.ndarray, gesture: int | None = None, repetition: int | None = None
) -> CoherenceMatrix:
    """Inverse of :func:`vectorize` (diagonal restored as zero)."""
    vector = np.asarray(vector, dtype=np.float64)
    if vector.shape != (N_FEATURES,):
        raise ShapeError(f"feature vector must have length {N_FEATURES}, got {vector.shape}")
    values = np.zeros((N_CHANNELS, N_CHANNELS))
    values[_OFF_DIAGONAL] = vector
    if not np.array_equal(values, values.T):
        raise StructuralError("feature vector does not describe a symmetric matrix")
    return CoherenceMatrix(values, gesture, repetition)


@dataclass(frozen=True)
class FeatureTable:
    """Rows of coherence features with gesture/repetition labels.

    ``features`` is (n_rows, 132) float64; ``gestures`` and ``repetitions``
    are parallel int64 label arrays.  ``column_names`` fixes feature-column
    identity.  A complete subject has 102 rows; split outputs have fewer.
    """

    features: np.ndarray
    gestures: np.ndarray
    repetitions: np.ndarray
    column_names: tuple[str, ...] = ()

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        gestures = np.asarray(self.gestures, dtype=np.int64)
        repetitions = np.asarray(self.repetitions, dtype=np.int64)
        names = tuple(self.column_names) or pair_names()
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "gestures", gestures)
        object.__setattr__(self, "repetitions", repetitions)
        object.__setattr__(self, "column_names", names)
        if features.ndim != 2 or features.shape[1] != N_FEATURES:
            raise ShapeError(f"features must be (n, {N_FEATURES}), got {features.shape}")
        n = features.shape[0]
        if gestures.shape != (n,) or repetitions.shape != (n,):
            raise ShapeError("label arrays must match the feature row count")
        if len(names) != N_FEATURES:
            raise ShapeError(f"expected {N_FEATURES} column names, got {len(names)}")
        _check_unit_interval(features, "feature values")
        if n and (gestures.min() < 1 or gestures.max() > N_GESTURES):
            raise StructuralError("gesture labels outside 1..17")
        if n and (repetitions.min() < 1 or repetitions.max() > N_REPETITIONS):
            raise StructuralError("repetition labels outside 1..6")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    def row_matrix(self, index: int) -> CoherenceMatrix:
        """Reconstitute row ``index`` as a labeled coherence matrix."""
        return matrix_from_vector(
            self.features[index], int(self.gestures[index]), int(self.repetitions[index])
        )


def build_feature_table(matrices: list[CoherenceMatrix]) -> FeatureTable:
    """Assemble the complete per-subject table (gesture-major row order).

    Requires exactly one matrix for every (gesture, repetition) combination;
    duplicates and unlabeled matrices are structural errors, absences raise
    :class:`MissingTrialsError` listing every missing pair.
    """
    by_label: dict[tuple[int, int], CoherenceMatrix] = {}
    for m in matrices:
        if m.gesture is None or m.repetition is None:
            raise StructuralError("cannot build a feature table from unlabeled matrices")
        key = (m.gesture, m.repetition)
        if key in by_label:
            raise StructuralError(f"duplicate matrix for gesture {key[0]} repetition {key[1]}")
        by_label[key] = m
    wanted = [
        (g, r)
        for g in range(1, N_GESTURES + 1)
        for r in range(1, N_REPETITIONS + 1)
    ]
    missing = [key for key in wanted if key not in by_label]
    if missing:
        raise MissingTrialsError(missing)
    features = np.stack([vectorize(by_label[key]) for key in wanted])
    gestures = np.array([g for g, _ in wanted], dtype=np.int64)
    repetitions = np.array([r for _, r in wanted], dtype=np.int64)
    return FeatureTable(features, gestures, repetitions)


def split(table: FeatureTable, spec: SplitSpec = SplitSpec()) -> tuple[FeatureTable, FeatureTable]:
    """Partition rows by repetition label into (train, test) tables.

    Membership depends only on each row's repetition, never its position.
    Every repetition named by ``spec`` must occur in the table.
    """
    present = set(int(r) for r in table.repetitions)
    absent = sorted((spec.train_repetitions | spec.test_repetitions) - present)
    if absent:
        raise StructuralError(f"split references repetition(s) absent from table: {absent}")
    train_mask = np.isin(table.repetitions, sorted(spec.train_repetitions))
    test_mask = np.isin(table.repetitions, sorted(spec.test_repetitions))

    def _take(mask: np.ndarray) -> FeatureTable:
        return FeatureTable(
            table.features[mask],
            table.gestures[mask],
            table.repetitions[mask],
            table.column_names,
        )

    return _take(train_mask), _take(test_mask)


def median_matrix(matrices: list[CoherenceMatrix]) -> CoherenceMatrix:
    """Entrywise median across repetitions of one gesture (for rendering)."""
    if not matrices:
        raise StructuralError("median of an empty matrix collection")
    gestures = {m.gesture for m in matrices}
    if len(gestures) != 1:
        raise StructuralError(f"median requires a single gesture, got {sorted(gestures)}")
    stacked = np.stack([m.values for m in matrices])
    return CoherenceMatrix(np.median(stacked, axis=0), matrices[0].gesture, None)


def save_feature_table(table: FeatureTable, path, metadata: dict | None = None) -> None:
    """Write the table as CSV (gesture, repetition, then one column per pair).

    Floats are written with ``repr`` so a round-trip is value-exact.  If
    ``metadata`` is given (e.g. the Welch/filter parameters that produced the
    features) it is stored as JSON next to the CSV at ``<path>.meta.json``.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("gesture", "repetition") + table.column_names)
        for i in range(table.n_rows):
            writer.writerow(
                [int(table.gestures[i]), int(table.repetitions[i])]
                + [repr(float(v)) for v in table.features[i]]
            )
    if metadata is not None:
        meta_path = path.with_name(path.name + ".meta.json")
        meta_path.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")


def load_feature_table(path) -> tuple[FeatureTable, dict | None]:
    """Read a table written by :func:`save_feature_table`.

    Returns the table and the sidecar metadata (None when absent).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty feature CSV")
    header = rows[0]
    expected = ["gesture", "repetition"] + list(pair_names())
    if header != expected:
        raise FormatError(f"{path}: unexpected header {header[:4]}...")
    gestures, repetitions, features = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(expected):
            raise FormatError(f"{path}:{lineno}: expected {len(expected)} fields, got {len(row)}")
        try:
            gestures.append(int(row[0]))
            repetitions.append(int(row[1]))
            features.append([float(v) for v in row[2:]])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
    table = FeatureTable(
        np.array(features, dtype=np.float64).reshape(len(features), N_FEATURES),
        np.array(gestures, dtype=np.int64),
        np.array(repetitions, dtype=np.int64),
    )
    meta_path = path.with_name(path.name + ".meta.json")
    metadata = json.loads(meta_path.read_text()) if meta_path.exists() else None
    return table, metadata

"""Build :class:`SubjectDataset` values from DB2 MAT-files or CSV files.

The MAT route follows the NinaPro DB2 distribution layout: an ``emg``
matrix of shape (n_samples, 12) plus per-sample label streams.  The
rectified label streams (``restimulus``/``rerepetition``) align movement
boundaries with actual muscle activity and are preferred over the raw
``stimulus``/``repetition`` streams whenever present.

The CSV route is a plain interchange fallback: a header row naming 12
channel columns plus ``stimulus`` and ``repetition``, one row per sample.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field

import numpy as np

from .datamodel import N_CHANNELS, SAMPLE_RATE_HZ, SubjectDataset
from .errors import DataError, MissingFieldError, ShapeError
from .matfile import MatVariable, parse_mat_file

_STIMULUS_STREAMS = ("restimulus", "stimulus")
_REPETITION_STREAMS = ("rerepetition", "repetition")


def _pick_stream(variables: dict[str, MatVariable], names: tuple[str, ...]) -> np.ndarray:
    for name in names:
        var = variables.get(name)
        if var is not None and var.is_supported:
            return var.to_array().ravel(order="F").astype(np.int64)
    raise MissingFieldError(f"none of {names} present in MAT variables")


def load_db2_subject(
    variables: dict[str, MatVariable],
    subject_id: int | None = None,
) -> SubjectDataset:
    """Assemble a dataset from parsed DB2 MAT variables.

    ``subject_id`` falls back to the file's ``subject`` variable, else 0.
    Integer EMG storage (present in some releases) is cast directly to
    float without rescaling; the z-score stage removes scale anyway.
    """
    emg_var = variables.get("emg")
    if emg_var is None or not emg_var.is_supported:
        raise MissingFieldError("variable 'emg' missing or non-numeric")
    emg = emg_var.to_array().astype(np.float64)
    if emg.ndim != 2 or emg.shape[1] != N_CHANNELS:
        raise ShapeError(f"emg must be (n_samples, {N_CHANNELS}), got {emg.shape}")

    stimulus = _pick_stream(variables, _STIMULUS_STREAMS)
    repetition = _pick_stream(variables, _REPETITION_STREAMS)
    n = emg.shape[0]
    if stimulus.shape[0] != n or repetition.shape[0] != n:
        raise ShapeError(
            f"label stream lengths ({stimulus.shape[0]}, {repetition.shape[0]}) "
            f"do not match emg length {n}"
        )

    if subject_id is None:
        subj_var = variables.get("subject")
        if subj_var is not None and subj_var.is_supported and subj_var.data.size:
            subject_id = int(subj_var.data.ravel()[0])
        else:
            subject_id = 0

    return SubjectDataset(
        subject_id=subject_id,
        emg=emg,
        stimulus=stimulus,
        repetition=repetition,
        sample_rate_hz=SAMPLE_RATE_HZ,
    )


@dataclass(frozen=True)
class CsvSchema:
    """Column naming for the CSV interchange format.

    With ``channel_columns`` empty, every non-label column is taken as a
    channel, in header order; there must be exactly 12.
    """

    channel_columns: tuple[str, ...] = ()
    stimulus_column: str = "stimulus"
    repetition_column: str = "repetition"
    sample_rate_hz: float = SAMPLE_RATE_HZ


def load_csv(path, schema: CsvSchema = CsvSchema(), subject_id: int = 0) -> SubjectDataset:
    """Read a per-sample CSV recording into a dataset.

    Numeric parsing is locale-independent (dot decimal separator).  Ragged
    rows and non-numeric cells are reported with their 1-based data row
    index.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty CSV file") from None
        rows = list(reader)

    for label in (schema.stimulus_column, schema.repetition_column):
        if label not in header:
            raise MissingFieldError(f"{path}: missing column {label!r}")

    if schema.channel_columns:
        channel_names = list(schema.channel_columns)
        for name in channel_names:
            if name not in header:
                raise MissingFieldError(f"{path}: missing channel column {name!r}")
    else:
        labels = {schema.stimulus_column, schema.repetition_column}
        channel_names = [h for h in header if h not in labels]
    if len(channel_names) != N_CHANNELS:
        raise ShapeError(
            f"{path}: expected {N_CHANNELS} channel columns, found {len(channel_names)}"
        )

    col_index = {name: header.index(name) for name in header}
    chan_idx = [col_index[name] for name in channel_names]
    stim_idx = col_index[schema.stimulus_column]
    rep_idx = col_index[schema.repetition_column]

    n = len(rows)
    emg = np.empty((n, N_CHANNELS))
    stimulus = np.empty(n, dtype=np.int64)
    repetition = np.empty(n, dtype=np.int64)
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(
                f"{path}: row {i + 1} has {len(row)} cells, header has {len(header)}"
            )
        try:
            for c, j in enumerate(chan_idx):
                emg[i, c] = float(row[j])
            stimulus[i] = int(float(row[stim_idx]))
            repetition[i] = int(float(row[rep_idx]))
        except ValueError as exc:
            raise DataError(f"{path}: row {i + 1}: {exc}") from None

    return SubjectDataset(
        subject_id=subject_id,
        emg=emg,
        stimulus=stimulus,
        repetition=repetition,
        sample_rate_hz=schema.sample_rate_hz,
    )


def save_csv(dataset: SubjectDataset, path, schema: CsvSchema = CsvSchema()) -> None:
    """Write a dataset in the CSV interchange format (lossless round-trip)."""
    channel_names = list(schema.channel_columns) or [
        f"ch_{i + 1}" for i in range(N_CHANNELS)
    ]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(channel_names + [schema.stimulus_column, schema.repetition_column])
        for i in range(dataset.n_samples):
            writer.writerow(
                [repr(float(v)) for v in dataset.emg[i]]
                + [int(dataset.stimulus[i]), int(dataset.repetition[i])]
            )


def subject_id_from_path(path) -> int | None:
    """Extract a subject number from DB2-style file names (``S12_E2_A1.mat``)."""
    match = re.search(r"[sS](\d+)[_.]", str(path).rsplit("/", 1)[-1])
    return int(match.group(1)) if match else None


def load_subject_file(path, subject_id: int | None = None) -> SubjectDataset:
    """Load one subject from a ``.mat`` or ``.csv`` file, dispatching on suffix."""
    lower = str(path).lower()
    if subject_id is None:
        subject_id = subject_id_from_path(path)
    if lower.endswith(".mat"):
        return load_db2_subject(parse_mat_file(path), subject_id=subject_id)
    if lower.endswith(".csv"):
        return load_csv(path, subject_id=subject_id if subject_id is not None else 0)
    raise DataError(f"unrecognized dataset file type: {path}")

"""Polynomial-kernel SVM trained with an SMO dual solver.

The binary solver follows the maximal-violating-pair scheme: it tracks
F_i = f(x_i) - y_i (bias excluded), picks the worst violator from the
"up" set (y=+1 with alpha<C, or y=-1 with alpha>0) against the worst from
the "low" set, and solves the two-variable subproblem analytically with box
clipping.  Convergence is declared when the gap max_low F - min_up F drops
to the solver tolerance, which bounds every point's KKT violation by half
the gap.

Multiclass uses one-vs-one by default (one model per unordered class pair,
majority vote, margin-sum tie-break); a one-vs-rest strategy is available
for score-based studies.  Hyperparameters are chosen by seeded, stratified
k-fold grid search.
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsp import ChannelStats
from .errors import ConfigError, DataError, FormatError, ShapeError

MODEL_FORMAT_VERSION = 1

# Step floor when the curvature of a two-variable subproblem is not
# positive (duplicate points); forces the update onto a box corner.
_ETA_FLOOR = 1e-12


@dataclass(frozen=True)
class SvmHyperParams:
    """Kernel and solver settings.

    ``gamma`` may be the string "scale", resolved against training data as
    1 / (n_features * variance of all feature entries).
    """

    degree: int = 2
    c: float = 10.0
    gamma: float | str = "scale"
    coef0: float = 0.0
    tolerance: float = 1e-3
    max_iterations: int = 100_000

    def __post_init__(self):
        if not (isinstance(self.degree, (int, np.integer)) and self.degree >= 1):
            raise ConfigError(f"kernel degree must be an integer >= 1, got {self.degree!r}")
        if not self.c > 0:
            raise ConfigError(f"regularization C must be positive, got {self.c!r}")
        if isinstance(self.gamma, str):
            if self.gamma != "scale":
                raise ConfigError(f"gamma must be positive or 'scale', got {self.gamma!r}")
        elif not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma!r}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")

    def resolved(self, features: np.ndarray) -> "SvmHyperParams":
        """Return a copy with a numeric gamma (resolving "scale")."""
        if not isinstance(self.gamma, str):
            return self
        variance = float(np.asarray(features, dtype=np.float64).var())
        gamma = 1.0 / (features.shape[1] * variance) if variance > 0 else 1.0
        return dataclasses.replace(self, gamma=gamma)


def poly_kernel(u: np.ndarray, v: np.ndarray, params: SvmHyperParams) -> float:
    """(gamma * <u, v> + coef0) ** degree for a single vector pair."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ShapeError(f"kernel arguments must be equal-length vectors, got {u.shape} vs {v.shape}")
    if isinstance(params.gamma, str):
        raise ConfigError("resolve gamma before evaluating the kernel")
    return float((params.gamma * np.dot(u, v) + params.coef0) ** params.degree)


def _gram(a: np.ndarray, b: np.ndarray, params: SvmHyperParams) -> np.ndarray:
    return (params.gamma * (a @ b.T) + params.coef0) ** params.degree


@dataclass(frozen=True)
class BinaryModel:
    """One trained binary classifier (self-contained for prediction).

    ``dual_coef`` holds alpha_i * y_i for the support vectors only;
    ``support_indices`` locates them in the training set the model was
    fitted on.  ``labels`` is (negative_class, positive_class).
    """

    support_vectors: np.ndarray
    dual_coef: np.ndarray
    support_indices: np.ndarray
    bias: float
    labels: tuple[int, int]
    degree: int
    gamma: float
    coef0: float
    c: float
    tolerance: float
    converged: bool
    iterations: int
    objective: float
    objective_history: tuple[float, ...] = ()

    def decision(self, x: np.ndarray) -> np.ndarray:
        """Signed decision values f(x); positive favors ``labels[1]``."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.support_vectors.shape[1]:
            raise ShapeError(
                f"feature length {x.shape[1]} does not match model "
                f"({self.support_vectors.shape[1]})"
            )
        kernel = (self.gamma * (x @ self.support_vectors.T) + self.coef0) ** self.degree
        return kernel @ self.dual_coef + self.bias


def smo_train(
    x: np.ndarray,
    y: np.ndarray,
    params: SvmHyperParams = SvmHyperParams(),
    labels: tuple[int, int] = (-1, 1),
    record_objective: bool = False,
) -> BinaryModel:
    """Solve the soft-margin dual for +-1 labels.

    Maximizes sum(alpha) - 0.5 * sum_ij alpha_i alpha_j y_i y_j K_ij
    subject to 0 <= alpha_i <= C and sum(alpha_i y_i) = 0.  Terminates when
    the maximal KKT violation gap reaches ``params.tolerance``; hitting
    ``params.max_iterations`` first yields a model flagged non-converged
    (and a warning) rather than an error.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ShapeError(f"expected (n, d) features with n labels, got {x.shape} and {y.shape}")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise DataError("labels must be -1 or +1")
    if np.unique(y).size < 2:
        raise DataError("training data contains a single class")

    params = params.resolved(x)
    n = x.shape[0]
    c = float(params.c)
    kernel = _gram(x, x, params)
    alpha = np.zeros(n)
    f_minus_y = -y.copy()  # f(x_i) - y_i with alpha = 0

    def objective() -> float:
        coef = alpha * y
        return float(alpha.sum() - 0.5 * coef @ kernel @ coef)

    history = [objective()] if record_objective else []
    iterations = 0
    converged = False
    gap = np.inf
    for iterations in range(1, params.max_iterations + 1):
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        if not up.any() or not low.any():
            converged = True
            iterations -= 1
            break
        up_idx = np.flatnonzero(up)
        low_idx = np.flatnonzero(low)
        i = up_idx[np.argmin(f_minus_y[up_idx])]
        j = low_idx[np.argmax(f_minus_y[low_idx])]
        gap = f_minus_y[j] - f_minus_y[i]
        if gap <= params.tolerance:
            converged = True
            iterations -= 1
            break

        # Two-variable analytic step on (i, j): alpha_j moves along the
        # equality constraint, clipped to its feasible box segment.
        if y[i] != y[j]:
            lo = max(0.0, alpha[j] - alpha[i])
            hi = min(c, c + alpha[j] - alpha[i])
        else:
            lo = max(0.0, alpha[i] + alpha[j] - c)
            hi = min(c, alpha[i] + alpha[j])
        eta = kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j]
        if eta <= 0.0:
            eta = _ETA_FLOOR
        new_j = float(np.clip(alpha[j] + y[j] * (f_minus_y[i] - f_minus_y[j]) / eta, lo, hi))
        new_i = float(np.clip(alpha[i] + y[i] * y[j] * (alpha[j] - new_j), 0.0, c))
        # Land exactly on the box.  Roundoff dust (e.g. 1e-18 instead of 0)
        # would otherwise keep a bound point in the working sets and pin the
        # pair selection against a zero-width feasible segment.
        snap = 1e-10 * c
        if new_i < snap:
            new_i = 0.0
        elif new_i > c - snap:
            new_i = c
        if new_j < snap:
            new_j = 0.0
        elif new_j > c - snap:
            new_j = c
        delta_j = new_j - alpha[j]
        if delta_j == 0.0:
            # Numerically pinned; no progress is possible on this pair.
            break
        delta_i = new_i - alpha[i]
        alpha[i] = new_i
        alpha[j] = new_j
        f_minus_y += delta_i * y[i] * kernel[i] + delta_j * y[j] * kernel[j]
        if record_objective:
            history.append(objective())
    if not converged:
        warnings.warn(
            f"SMO stopped after {iterations} iterations with KKT gap {gap:.3e} "
            f"> tolerance {params.tolerance:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )

    free = (alpha > 0) & (alpha < c)
    if free.any():
        bias = float(-f_minus_y[free].mean())
    else:
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        candidates = []
        if up.any():
            candidates.append(f_minus_y[up].min())
        if low.any():
            candidates.append(f_minus_y[low].max())
        bias = float(-np.mean(candidates)) if candidates else 0.0

    support = np.flatnonzero(alpha > 0)
    return BinaryModel(
        support_vectors=x[support].copy(),
        dual_coef=(alpha * y)[support],
        support_indices=support,
        bias=bias,
        labels=(int(labels[0]), int(labels[1])),
        degree=int(params.degree),
        gamma=float(params.gamma),
        coef0=float(params.coef0),
        c=c,
        tolerance=float(params.tolerance),
        converged=converged,
        iterations=iterations,
        objective=objective(),
        objective_history=tuple(history),
    )


def kkt_residuals(model: BinaryModel, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-point KKT violation of a binary model on its training set.

    alpha = 0 requires y*f >= 1, free alpha requires y*f = 1, alpha = C
    requires y*f <= 1; the residual is how far each point falls outside
    its condition (0 when satisfied).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    alpha = np.zeros(x.shape[0])
    alpha[model.support_indices] = np.abs(model.dual_coef)
    margins = y * model.decision(x)
    residuals = np.zeros(x.shape[0])
    at_zero = alpha == 0
    at_c = alpha == model.c
    free = ~at_zero & ~at_c
    residuals[at_zero] = np.maximum(0.0, 1.0 - margins[at_zero])
    residuals[free] = np.abs(margins[free] - 1.0)
    residuals[at_c] = np.maximum(0.0, margins[at_c] - 1.0)
    return residuals


@dataclass(frozen=True)
class TrainedModel:
    """A full multiclass classifier plus everything needed to reuse it.

    ``strategy`` is "ovo" (one model per class pair) or "ovr" (one model
    per class against the rest).  ``channel_stats`` optionally carries the
    signal normalization fitted alongside the model, and ``column_names``
    the feature-column identity, so a serialized model is self-describing.
    """

    binaries: tuple[BinaryModel, ...]
    classes: tuple[int, ...]
    params: SvmHyperParams
    strategy: str = "ovo"
    column_names: tuple[str, ...] = ()
    channel_stats: ChannelStats | None = None

    def __post_init__(self):
        k = len(self.classes)
        if k < 2:
            raise ConfigError("a multiclass model needs at least two classes")
        if self.strategy not in ("ovo", "ovr"):
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        expected = k * (k - 1) // 2 if self.strategy == "ovo" else k
        if len(self.binaries) != expected:
            raise ConfigError(
                f"{self.strategy} with {k} classes needs {expected} binary models, "
                f"got {len(self.binaries)}"
            )

    @property
    def converged(self) -> bool:
        return all(b.converged for b in self.binaries)


def ovo_train(
    features: np.ndarray,
    labels: np.ndarray,
    params: SvmHyperParams = SvmHyperParams(),
    column_names: tuple[str, ...] = (),
    channel_stats: ChannelStats | None = None,
) -> TrainedModel:
    """Train one binary model per unordered class pair.

    For the pair (a, b) with a < b, class b is encoded +1.  Gamma "scale"
    is resolved once on the full feature matrix so every pairwise model
    shares the same kernel.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels).ravel()
    classes = _check_multiclass(features, labels)
    params = params.resolved(features)
    binaries = []
    for ai, a in enumerate(classes):
        for b in classes[ai + 1:]:
            mask = (labels == a) | (labels == b)
            pair_y = np.where(labels[mask] == b, 1.0, -1.0)
            binaries.append(smo_train(features[mask], pair_y, params, labels=(a, b)))
    return TrainedModel(
        tuple(binaries), tuple(classes), params, "ovo", tuple(column_names), channel_stats
    )


def ovr_train(
    features: np.ndarray,
    labels: np.ndarray,
    params: SvmHyperParams = SvmHyperParams(),
    column_names: tuple[str, ...] = (),
    channel_stats: ChannelStats | None = None,
) -> TrainedModel:
    """Train one binary model per class against all others (+1 = the class)."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels).ravel()
    classes = _check_multiclass(features, labels)
    params = params.resolved(features)
    binaries = [
        smo_train(features, np.where(labels == c, 1.0, -1.0), params, labels=(-c, c))
        for c in classes
    ]
    return TrainedModel(
        tuple(binaries), tuple(classes), params, "ovr", tuple(column_names), channel_stats
    )


def _check_multiclass(features: np.ndarray, labels: np.ndarray) -> list[int]:
    if features.ndim != 2 or features.shape[0] != labels.shape[0]:
        raise ShapeError(
            f"expected (n, d) features with n labels, got {features.shape} and {labels.shape}"
        )
    classes = sorted(int(c) for c in np.unique(labels))
    if len(classes) < 2:
        raise DataError("multiclass training needs at least two classes")
    return classes


def predict(model: TrainedModel, x: np.ndarray):
    """Classify feature vectors; returns (labels, per-class scores).

    For "ovo", each pairwise decision casts one vote (zero decision counts
    for the positive class) and the score is the vote count plus a
    monotone margin-sum term bounded inside (0, 1/3), so vote order is
    never overturned and exact vote ties break deterministically.  For
    "ovr", scores are the raw per-class decision values.  The label is the
    argmax-scoring class; a 1-D input yields scalar label and (k,) scores.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    k = len(model.classes)
    index = {c: i for i, c in enumerate(model.classes)}
    if model.strategy == "ovo":
        votes = np.zeros((x.shape[0], k))
        margins = np.zeros((x.shape[0], k))
        for binary in model.binaries:
            neg, pos = binary.labels
            values = binary.decision(x)
            wins_pos = values >= 0
            votes[wins_pos, index[pos]] += 1
            votes[~wins_pos, index[neg]] += 1
            margins[:, index[pos]] += values
            margins[:, index[neg]] -= values
        scores = votes + (margins / (1.0 + np.abs(margins)) + 1.0) / 6.0
    else:
        scores = np.column_stack([binary.decision(x) for binary in model.binaries])
    labels = np.array([model.classes[i] for i in np.argmax(scores, axis=1)], dtype=np.int64)
    if single:
        return int(labels[0]), scores[0]
    return labels, scores


def stratified_folds(labels: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Seeded fold assignment (one id per row), stratified by class."""
    labels = np.asarray(labels).ravel()
    if folds < 2:
        raise ConfigError(f"need at least 2 folds, got {folds}")
    rng = np.random.default_rng(seed)
    assignment = np.full(labels.shape[0], -1, dtype=np.int64)
    for c in sorted(int(v) for v in np.unique(labels)):
        rows = np.flatnonzero(labels == c)
        if rows.size < folds:
            raise DataError(
                f"class {c} has {rows.size} rows, fewer than {folds} folds"
            )
        rows = rng.permutation(rows)
        assignment[rows] = np.arange(rows.size) % folds
    return assignment


def grid_search_cv(
    features: np.ndarray,
    labels: np.ndarray,
    degrees=(1, 2, 3),
    cs=(0.1, 1.0, 10.0, 100.0),
    folds: int = 3,
    seed: int = 0,
    base_params: SvmHyperParams = SvmHyperParams(),
    strategy: str = "ovo",
) -> SvmHyperParams:
    """Pick (degree, C) by mean validation accuracy over stratified folds.

    Fold assignment is seeded, so a given (data, seed) pair always produces
    the same folds and therefore the same selection.  Ties prefer the lower
    degree, then the lower C.  The default grid contains (degree 2, C 10).
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels).ravel()
    if not degrees or not cs:
        raise ConfigError("grid must contain at least one degree and one C")
    assignment = stratified_folds(labels, folds, seed)
    trainer = ovo_train if strategy == "ovo" else ovr_train
    best = None
    for degree in degrees:
        for c in cs:
            candidate = dataclasses.replace(base_params, degree=int(degree), c=float(c))
            correct = 0
            for fold in range(folds):
                held = assignment == fold
                fitted = trainer(features[~held], labels[~held], candidate)
                predicted, _ = predict(fitted, features[held])
                correct += int((predicted == labels[held]).sum())
            accuracy = correct / labels.shape[0]
            key = (-accuracy, int(degree), float(c))
            if best is None or key < best[0]:
                best = (key, candidate)
    return best[1]


def _binary_to_dict(binary: BinaryModel) -> dict:
    return {
        "labels": list(binary.labels),
        "bias": binary.bias,
        "support_vectors": binary.support_vectors.tolist(),
        "dual_coef": binary.dual_coef.tolist(),
        "support_indices": binary.support_indices.tolist(),
        "degree": binary.degree,
        "gamma": binary.gamma,
        "coef0": binary.coef0,
        "c": binary.c,
        "tolerance": binary.tolerance,
        "converged": binary.converged,
        "iterations": binary.iterations,
        "objective": binary.objective,
    }


def _binary_from_dict(raw: dict) -> BinaryModel:
    n_features = len(raw["support_vectors"][0]) if raw["support_vectors"] else 0
    return BinaryModel(
        support_vectors=np.array(raw["support_vectors"], dtype=np.float64).reshape(
            len(raw["support_vectors"]), n_features
        ),
        dual_coef=np.array(raw["dual_coef"], dtype=np.float64),
        support_indices=np.array(raw["support_indices"], dtype=np.int64),
        bias=float(raw["bias"]),
        labels=(int(raw["labels"][0]), int(raw["labels"][1])),
        degree=int(raw["degree"]),
        gamma=float(raw["gamma"]),
        coef0=float(raw["coef0"]),
        c=float(raw["c"]),
        tolerance=float(raw["tolerance"]),
        converged=bool(raw["converged"]),
        iterations=int(raw["iterations"]),
        objective=float(raw["objective"]),
    )


def save_model(model: TrainedModel, path) -> None:
    """Serialize to versioned JSON; floats survive the round trip exactly."""
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "coherence-svm",
        "strategy": model.strategy,
        "classes": list(model.classes),
        "hyperparams": {
            "degree": model.params.degree,
            "c": model.params.c,
            "gamma": model.params.gamma,
            "coef0": model.params.coef0,
            "tolerance": model.params.tolerance,
            "max_iterations": model.params.max_iterations,
        },
        "column_names": list(model.column_names),
        "channel_stats": None
        if model.channel_stats is None
        else {
            "mean": model.channel_stats.mean.tolist(),
            "std": model.channel_stats.std.tolist(),
        },
        "binaries": [_binary_to_dict(b) for b in model.binaries],
    }
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def load_model(path) -> TrainedModel:
    """Read a model written by :func:`save_model`."""
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid model JSON ({exc})") from exc
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise FormatError(
            f"{path}: unsupported model format version {version!r} "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    hp = payload["hyperparams"]
    params = SvmHyperParams(
        degree=int(hp["degree"]),
        c=float(hp["c"]),
        gamma=hp["gamma"] if isinstance(hp["gamma"], str) else float(hp["gamma"]),
        coef0=float(hp["coef0"]),
        tolerance=float(hp["tolerance"]),
        max_iterations=int(hp["max_iterations"]),
    )
    stats_raw = payload.get("channel_stats")
    stats = None
    if stats_raw is not None:
        stats = ChannelStats(
            mean=np.array(stats_raw["mean"], dtype=np.float64),
            std=np.array(stats_raw["std"], dtype=np.float64),
        )
    return TrainedModel(
        binaries=tuple(_binary_from_dict(b) for b in payload["binaries"]),
        classes=tuple(int(c) for c in payload["classes"]),
        params=params,
        strategy=payload["strategy"],
        column_names=tuple(payload["column_names"]),
        channel_stats=stats,
    )

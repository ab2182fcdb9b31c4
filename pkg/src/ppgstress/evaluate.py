"""Leave-one-subject-out evaluation, window-size sweep and SUDs statistics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from itertools import combinations

import numpy as np
from scipy.stats import rankdata

from . import models
from .errors import DataError, ValidationError
from .io import Dataset
from .windows import (DEFAULT_SWEEP_SIZES, FeatureMatrix, PipelineConfig,
                      WindowSpec, anova_f, build_matrix, prepare_trace,
                      select_top_k, standardize)

EXACT_U_CAP = 16


def metrics(y_true, y_pred) -> tuple[float, dict[str, int]]:
    """Accuracy and 2x2 confusion counts (stress = positive class)."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise ValidationError(f"length mismatch: {len(y_true)} vs {len(y_pred)}")
    if len(y_true) == 0:
        raise ValidationError("empty label sequences")
    conf = {
        "tp": int(np.sum((y_true == 1) & (y_pred == 1))),
        "tn": int(np.sum((y_true == 0) & (y_pred == 0))),
        "fp": int(np.sum((y_true == 0) & (y_pred == 1))),
        "fn": int(np.sum((y_true == 1) & (y_pred == 0))),
    }
    return float(np.mean(y_true == y_pred)), conf


@dataclass(frozen=True)
class FoldResult:
    subject_id: str
    accuracy: float
    confusion: dict[str, int]
    n_windows: int


@dataclass(frozen=True)
class CvReport:
    folds: tuple[FoldResult, ...]
    mean_accuracy: float      # mean over subjects (headline figure)
    pooled_accuracy: float    # over all windows pooled
    config: dict

    def to_json(self) -> str:
        return json.dumps({
            "folds": [asdict(f) for f in self.folds],
            "mean_accuracy": self.mean_accuracy,
            "pooled_accuracy": self.pooled_accuracy,
            "config": self.config,
        }, indent=2)


def _fit(kind: str, X, y, seed: int):
    if kind == "lda":
        return models.lda_fit(X, y)
    if kind == "knn":
        return models.knn_fit(X, y)
    if kind == "sgd":
        return models.sgd_logistic_fit(X, y, seed=seed)
    raise ValidationError(f"unknown model kind {kind!r}; expected one of "
                          f"{models.MODEL_KINDS}")


def loso_matrix(matrix: FeatureMatrix, k: int = 35, model_kind: str = "lda",
                seed: int = 0, config_echo: dict | None = None) -> CvReport:
    """Strict LOSO over a prebuilt feature matrix.

    Selection and standardization are recomputed inside each fold from the
    training rows only.
    """
    subject_ids = list(dict.fromkeys(matrix.subjects))
    if len(subject_ids) < 2:
        raise DataError("LOSO needs at least 2 subjects")
    folds = []
    pooled_correct = pooled_total = 0
    for sid in subject_ids:
        test_mask = matrix.rows_for(sid)
        train = matrix.take(~test_mask)
        test = matrix.take(test_mask)
        report = anova_f(train)
        train_sel = select_top_k(train, report, k)
        test_sel = test.with_columns(train_sel.columns)
        _, train_std, test_std = standardize(train_sel, test_sel)
        model = _fit(model_kind, train_std.X, train_std.labels, seed)
        p = model.predict_proba(test_std.X)
        y_pred = (p >= 0.5).astype(int)
        acc, conf = metrics(test.labels, y_pred)
        folds.append(FoldResult(sid, acc, conf, test.n_rows))
        pooled_correct += conf["tp"] + conf["tn"]
        pooled_total += test.n_rows
    cfg = dict(config_echo or {}, k=k, model=model_kind, seed=seed)
    return CvReport(tuple(folds),
                    float(np.mean([f.accuracy for f in folds])),
                    pooled_correct / pooled_total, cfg)


def loso(ds: Dataset, spec: WindowSpec = WindowSpec(), k: int = 35,
         model_kind: str = "lda", seed: int = 0,
         config: PipelineConfig = PipelineConfig(),
         prepared=None) -> CvReport:
    """Build the feature matrix for the dataset and run strict LOSO."""
    matrix = build_matrix(ds, spec, config, prepared)
    echo = {"window_s": spec.size_s, "step_s": spec.step_s}
    return loso_matrix(matrix, k, model_kind, seed, echo)


def shuffle_labels(matrix: FeatureMatrix, seed: int = 0) -> FeatureMatrix:
    """Permute labels within each subject: the chance-level control."""
    rng = np.random.default_rng(seed)
    labels = matrix.labels.copy()
    for sid in set(matrix.subjects):
        idx = np.flatnonzero(matrix.rows_for(sid))
        labels[idx] = labels[rng.permutation(idx)]
    return FeatureMatrix(matrix.subjects, labels, matrix.starts, matrix.X,
                         matrix.columns)


def sweep_windows(ds: Dataset, sizes=DEFAULT_SWEEP_SIZES, step_s: float = 5.0,
                  k: int = 35, model_kind: str = "lda", seed: int = 0,
                  config: PipelineConfig = PipelineConfig()) -> list[dict]:
    """One LOSO run per window size; rows for the sweep CSV."""
    prepared = {t.subject_id: prepare_trace(t, config) for t in ds}
    rows = []
    for size in sizes:
        spec = WindowSpec(float(size), step_s)
        rep = loso(ds, spec, k, model_kind, seed, config, prepared)
        rows.append({"window_s": float(size),
                     "mean_accuracy": rep.mean_accuracy,
                     "pooled_accuracy": rep.pooled_accuracy})
    return rows


# ---------------------------------------------------------------------------
# Mann-Whitney U
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UTestResult:
    u: float
    z: float | None
    p_two_tailed: float
    n1: int
    n2: int
    method: str  # "exact" or "normal"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _u_from_ranks(ranks_a: np.ndarray, n1: int) -> float:
    return float(np.sum(ranks_a)) - n1 * (n1 + 1) / 2.0


def mann_whitney_u(a, b, mode: str = "auto") -> UTestResult:
    """Two-tailed Mann-Whitney U with midranks.

    The reported statistic is min(U, n1*n2 - U). Exact mode enumerates every
    label assignment (combined n capped at 16); normal mode uses the
    tie-corrected variance and a 0.5 continuity correction.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ValidationError("both samples must be non-empty")
    if mode not in ("auto", "exact", "normal"):
        raise ValidationError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "exact" if n1 + n2 <= EXACT_U_CAP else "normal"
    if mode == "exact" and n1 + n2 > EXACT_U_CAP:
        raise ValidationError(
            f"exact mode is capped at combined n = {EXACT_U_CAP}, got {n1 + n2}")

    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)  # midranks under ties
    u1 = _u_from_ranks(ranks[:n1], n1)
    u_min = min(u1, n1 * n2 - u1)

    if mode == "exact":
        count = total = 0
        for pick in combinations(range(n1 + n2), n1):
            ua = _u_from_ranks(ranks[list(pick)], n1)
            if min(ua, n1 * n2 - ua) <= u_min + 1e-9:
                count += 1
            total += 1
        return UTestResult(u_min, None, count / total, n1, n2, "exact")

    n = n1 + n2
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / (n * (n - 1))
    var = n1 * n2 / 12.0 * ((n ** 3 - n) / (n * (n - 1)) - tie_term)
    if var <= 0:
        return UTestResult(u_min, 0.0, 1.0, n1, n2, "normal")
    z = (u_min - n1 * n2 / 2.0 + 0.5) / math.sqrt(var)
    p = min(1.0, 2.0 * 0.5 * math.erfc(-z / math.sqrt(2)))
    return UTestResult(u_min, z, p, n1, n2, "normal")


@dataclass(frozen=True)
class SudsReport:
    utest: UTestResult
    relaxing: dict[str, float]
    stressful: dict[str, float]

    def to_json(self) -> str:
        return json.dumps({"utest": asdict(self.utest),
                           "relaxing": self.relaxing,
                           "stressful": self.stressful}, indent=2)


def _summary(values: np.ndarray) -> dict[str, float]:
    return {"n": int(len(values)), "median": float(np.median(values)),
            "mean": float(np.mean(values)), "min": float(np.min(values)),
            "max": float(np.max(values))}


def suds_report(ds: Dataset, mode: str = "auto") -> SudsReport:
    """Pool SUDs ratings by their containing condition span and test them."""
    relax, stress = [], []
    for trace in ds:
        seen = {0: 0, 1: 0}
        for rating in trace.suds:
            span = next((s for s in trace.annotations if s.contains(rating.time_s)),
                        None)
            if span is None:
                raise DataError(
                    f"subject {trace.subject_id}: SUDs rating at t={rating.time_s}s "
                    "lies outside every condition span")
            (relax if span.condition.value == 0 else stress).append(rating.value)
            seen[span.condition.value] += 1
        if seen[0] == 0 or seen[1] == 0:
            raise DataError(
                f"subject {trace.subject_id} lacks SUDs ratings in both conditions")
    a, b = np.array(relax, dtype=float), np.array(stress, dtype=float)
    return SudsReport(mann_whitney_u(a, b, mode), _summary(a), _summary(b))

"""Sliding-window segmentation, feature matrix assembly, ANOVA-F selection."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from . import hrv, pulse
from .dsp import design_butter_bandpass, filtfilt
from .errors import DataError, ValidationError
from .io import Dataset, PpgTrace

log = logging.getLogger(__name__)

DEFAULT_SWEEP_SIZES = (60.0, 70.0, 80.0, 90.0, 100.0, 110.0, 120.0)


@dataclass(frozen=True)
class WindowSpec:
    size_s: float = 80.0
    step_s: float = 5.0

    def __post_init__(self):
        if self.size_s < 60.0:
            raise ValidationError(
                f"window size {self.size_s} s is below the 60 s spectral floor")
        if not 0 < self.step_s <= self.size_s:
            raise ValidationError(f"step must be in (0, size], got {self.step_s}")


@dataclass(frozen=True)
class PipelineConfig:
    filter_order: int = 3
    band_low_hz: float = 0.5
    band_high_hz: float = 8.0


@dataclass(frozen=True)
class Window:
    subject_id: str
    label: int  # 0 relaxed, 1 stressed
    start_s: float
    end_s: float


def segment(trace: PpgTrace, spec: WindowSpec) -> list[Window]:
    """Windows placed independently inside each condition span (never straddling)."""
    out = []
    for span in trace.annotations:
        start = span.start_s
        while start + spec.size_s <= span.end_s + 1e-9:
            out.append(Window(trace.subject_id, span.condition.value,
                              start, start + spec.size_s))
            start += spec.step_s
    return out


@dataclass(frozen=True)
class FeatureMatrix:
    subjects: tuple[str, ...]
    labels: np.ndarray
    starts: np.ndarray
    X: np.ndarray
    columns: tuple[str, ...]

    def __post_init__(self):
        if not (len(self.subjects) == len(self.labels) == len(self.starts)
                == self.X.shape[0]):
            raise ValidationError("feature matrix row metadata lengths disagree")
        if self.X.shape[1] != len(self.columns):
            raise ValidationError("column count mismatch")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def rows_for(self, subject_id: str) -> np.ndarray:
        return np.array([s == subject_id for s in self.subjects])

    def take(self, mask: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(
            tuple(s for s, m in zip(self.subjects, mask) if m),
            self.labels[mask], self.starts[mask], self.X[mask], self.columns)

    def with_columns(self, names) -> "FeatureMatrix":
        idx = [self.columns.index(n) for n in names]
        return replace(self, X=self.X[:, idx], columns=tuple(names))

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("subject,label,start_s," + ",".join(self.columns) + "\n")
            for i in range(self.n_rows):
                vals = ",".join("%.12g" % v for v in self.X[i])
                f.write(f"{self.subjects[i]},{self.labels[i]},"
                        f"{'%.12g' % self.starts[i]},{vals}\n")

    @classmethod
    def from_csv(cls, path) -> "FeatureMatrix":
        with open(path) as f:
            header = f.readline().strip().split(",")
            if header[:3] != ["subject", "label", "start_s"]:
                raise ValidationError(f"bad feature-matrix header in {path}")
            columns = tuple(header[3:])
            subjects, labels, starts, rows = [], [], [], []
            for lineno, line in enumerate(f, start=2):
                parts = line.strip().split(",")
                if len(parts) != 3 + len(columns):
                    raise ValidationError(f"{path}:{lineno}: wrong field count")
                subjects.append(parts[0])
                labels.append(int(parts[1]))
                starts.append(float(parts[2]))
                rows.append([float(v) for v in parts[3:]])
        return cls(tuple(subjects), np.array(labels), np.array(starts),
                   np.array(rows), columns)


def prepare_trace(trace: PpgTrace, config: PipelineConfig) -> pulse.RrSeries:
    """Filter a trace, detect peaks, screen to an RrSeries."""
    cascade = design_butter_bandpass(config.filter_order, config.band_low_hz,
                                     config.band_high_hz, trace.fs)
    filtered = filtfilt(cascade, trace.samples)
    peaks = pulse.detect_peaks(filtered, trace.fs)
    try:
        return pulse.to_rr(peaks)
    except DataError as e:
        raise DataError(f"subject {trace.subject_id}: {e}") from None


def build_matrix(ds: Dataset, spec: WindowSpec,
                 config: PipelineConfig = PipelineConfig(),
                 prepared: dict[str, pulse.RrSeries] | None = None) -> FeatureMatrix:
    """filtfilt -> peaks -> per-window RR slice -> HRV features, per trace.

    Unusable windows are dropped (logged); a subject left without both
    classes is an error.
    """
    subjects, labels, starts, rows = [], [], [], []
    for trace in ds:
        rr = (prepared or {}).get(trace.subject_id) or prepare_trace(trace, config)
        dropped = 0
        kept_labels = []
        for win in segment(trace, spec):
            wrr = pulse.slice_window(rr, win.start_s, win.end_s)
            try:
                feats = hrv.all_features(wrr, spec.size_s)
            except DataError:
                dropped += 1
                continue
            if not feats.usable:
                dropped += 1
                continue
            subjects.append(trace.subject_id)
            labels.append(win.label)
            starts.append(win.start_s)
            rows.append([feats.values[n] for n in hrv.FEATURE_NAMES])
            kept_labels.append(win.label)
        if dropped:
            log.info("subject %s: dropped %d unusable windows", trace.subject_id, dropped)
        if len(set(kept_labels)) < 2:
            raise DataError(
                f"subject {trace.subject_id} has no usable windows in both classes")
    return FeatureMatrix(tuple(subjects), np.array(labels), np.array(starts),
                         np.array(rows), hrv.FEATURE_NAMES)


@dataclass(frozen=True)
class SelectionReport:
    scores: dict[str, float]
    ranked: tuple[str, ...]  # descending F, ties broken by catalog order


def anova_f(m: FeatureMatrix) -> SelectionReport:
    """One-way two-group ANOVA F per column; MSW = 0 columns get +inf."""
    groups = [m.X[m.labels == g] for g in (0, 1)]
    if any(len(g) < 2 for g in groups):
        raise DataError("ANOVA needs >= 2 rows in each class")
    grand = np.mean(m.X, axis=0)
    n = m.n_rows
    msb = sum(len(g) * (np.mean(g, axis=0) - grand) ** 2 for g in groups)  # df = 1
    ssw = sum(np.sum((g - np.mean(g, axis=0)) ** 2, axis=0) for g in groups)
    msw = ssw / (n - 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(msw > 0, msb / np.where(msw > 0, msw, 1.0), np.inf)
    scores = dict(zip(m.columns, (float(v) for v in f)))
    order = sorted(range(len(m.columns)), key=lambda i: (-f[i], i))
    return SelectionReport(scores, tuple(m.columns[i] for i in order))


def select_top_k(m: FeatureMatrix, report: SelectionReport, k: int) -> FeatureMatrix:
    """Restrict the matrix to the top-k ranked features (k clipped to width)."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    return m.with_columns(report.ranked[:min(k, len(m.columns))])


@dataclass(frozen=True)
class Scaler:
    columns: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    dropped: tuple[str, ...] = ()

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std


def standardize(train: FeatureMatrix,
                apply: FeatureMatrix | None = None
                ) -> tuple[Scaler, FeatureMatrix, FeatureMatrix | None]:
    """Z-score using training statistics only; zero-variance columns dropped."""
    mean = np.mean(train.X, axis=0)
    std = np.std(train.X, axis=0, ddof=1) if train.n_rows > 1 else np.zeros_like(mean)
    keep = std > 0
    if not np.any(keep):
        raise DataError("all training columns have zero variance")
    dropped = tuple(c for c, k in zip(train.columns, keep) if not k)
    if dropped:
        log.info("dropping zero-variance columns: %s", ", ".join(dropped))
    kept_cols = tuple(c for c, k in zip(train.columns, keep) if k)
    scaler = Scaler(kept_cols, mean[keep], std[keep], dropped)
    tr = replace(train, X=scaler.transform(train.X[:, keep]), columns=kept_cols)
    ap = None
    if apply is not None:
        ap_cols = apply.with_columns(kept_cols)
        ap = replace(ap_cols, X=scaler.transform(ap_cols.X))
    return scaler, tr, ap

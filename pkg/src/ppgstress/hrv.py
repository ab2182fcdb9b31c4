"""HRV feature catalog: time, frequency and non-linear domains for one RR window."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dsp import welch_psd
from .errors import DataError
from .pulse import RrSeries

CATALOG_VERSION = "1"

# Normal-consistency constant relating MAD to the standard deviation.
MAD_SCALE = 1.4826
SHANEN_BINS = 8
RESAMPLE_HZ = 4.0
WELCH_SEGMENT = 256
SPECTRAL_MIN_SPAN_S = 60.0
SPECTRAL_MIN_INTERVALS = 20
MAX_REJECTED_FRAC = 0.2

VLF_BAND = (0.0033, 0.04)
LF_BAND = (0.04, 0.15)
HF_BAND = (0.15, 0.4)

# (name, domain, unit, formula) -- column order of every feature matrix.
CATALOG: tuple[tuple[str, str, str, str], ...] = (
    ("MeanNN", "time", "ms", "mean(RR)"),
    ("SDNN", "time", "ms", "std(RR, ddof=1)"),
    ("RMSSD", "time", "ms", "sqrt(mean(diff(RR)^2))"),
    ("SDSD", "time", "ms", "std(diff(RR), ddof=1)"),
    ("CVNN", "time", "", "SDNN / MeanNN"),
    ("CVSD", "time", "", "RMSSD / MeanNN"),
    ("MedianNN", "time", "ms", "median(RR)"),
    ("MadNN", "time", "ms", "1.4826 * median(|RR - median(RR)|)"),
    ("MCVNN", "time", "", "MadNN / MedianNN"),
    ("IQRNN", "time", "ms", "percentile(RR, 75) - percentile(RR, 25)"),
    ("pNN20", "time", "%", "100 * count(|diff(RR)| > 20) / count(diff(RR))"),
    ("pNN50", "time", "%", "100 * count(|diff(RR)| > 50) / count(diff(RR))"),
    ("MinNN", "time", "ms", "min(RR)"),
    ("MaxNN", "time", "ms", "max(RR)"),
    ("VLF", "frequency", "ms^2", "integral of PSD over 0.0033-0.04 Hz"),
    ("LF", "frequency", "ms^2", "integral of PSD over 0.04-0.15 Hz"),
    ("HF", "frequency", "ms^2", "integral of PSD over 0.15-0.4 Hz"),
    ("TP", "frequency", "ms^2", "VLF + LF + HF"),
    ("LFHF", "frequency", "", "LF / HF"),
    ("LFn", "frequency", "", "LF / (LF + HF)"),
    ("HFn", "frequency", "", "HF / (LF + HF)"),
    ("LnHF", "frequency", "ln(ms^2)", "ln(HF)"),
    ("SD1", "nonlinear", "ms", "sqrt(1/2) * std_pop(diff(RR))"),
    ("SD2", "nonlinear", "ms", "sqrt(2*var_pop(RR) - var_pop(diff(RR))/2)"),
    ("SD1SD2", "nonlinear", "", "SD1 / SD2"),
    ("CSI", "nonlinear", "", "SD2 / SD1"),
    ("ShanEn", "nonlinear", "bit",
     "-sum(p*log2(p)) over 8 equal-width RR bins spanning [min, max]"),
)

FEATURE_NAMES: tuple[str, ...] = tuple(name for name, _, _, _ in CATALOG)


@dataclass(frozen=True)
class WindowFeatures:
    values: dict[str, float]
    flags: tuple[str, ...] = ()

    @property
    def usable(self) -> bool:
        return not self.flags


def time_domain(rr_ms) -> dict[str, float]:
    """The 14 time-domain features of the catalog."""
    rr = np.asarray(rr_ms, dtype=float)
    if rr.size < 4:
        raise DataError(f"need >= 4 intervals for time-domain features, got {rr.size}")
    d = np.diff(rr)
    mean = float(np.mean(rr))
    sdnn = float(np.std(rr, ddof=1))
    rmssd = float(np.sqrt(np.mean(d ** 2)))
    median = float(np.median(rr))
    mad = MAD_SCALE * float(np.median(np.abs(rr - median)))
    return {
        "MeanNN": mean,
        "SDNN": sdnn,
        "RMSSD": rmssd,
        "SDSD": float(np.std(d, ddof=1)),
        "CVNN": sdnn / mean,
        "CVSD": rmssd / mean,
        "MedianNN": median,
        "MadNN": mad,
        "MCVNN": mad / median,
        "IQRNN": float(np.percentile(rr, 75) - np.percentile(rr, 25)),
        "pNN20": 100.0 * float(np.count_nonzero(np.abs(d) > 20.0)) / d.size,
        "pNN50": 100.0 * float(np.count_nonzero(np.abs(d) > 50.0)) / d.size,
        "MinNN": float(np.min(rr)),
        "MaxNN": float(np.max(rr)),
    }


def _band_power(psd, lo: float, hi: float) -> float:
    mask = (psd.freqs >= lo) & (psd.freqs <= hi)
    if np.count_nonzero(mask) < 2:
        return 0.0
    return float(np.trapezoid(psd.power[mask], psd.freqs[mask]))


def frequency_domain(rr: RrSeries, window_span_s: float) -> WindowFeatures:
    """Band powers of the linearly resampled (4 Hz) RR tachogram via Welch PSD.

    Refuses windows shorter than 60 s: spectral indices are meaningless below
    that span.
    """
    if window_span_s < SPECTRAL_MIN_SPAN_S:
        raise DataError(
            f"spectral features need a window of >= {SPECTRAL_MIN_SPAN_S:.0f} s, "
            f"got {window_span_s:.0f} s")
    if rr.rr_ms.size < SPECTRAL_MIN_INTERVALS:
        raise DataError(
            f"need >= {SPECTRAL_MIN_INTERVALS} intervals for spectral features, "
            f"got {rr.rr_ms.size}")
    t = rr.rr_times_s
    grid = np.arange(t[0], t[-1], 1.0 / RESAMPLE_HZ)
    tach = np.interp(grid, t, rr.rr_ms)
    tach = tach - np.mean(tach)
    seg = min(WELCH_SEGMENT, len(tach))
    psd = welch_psd(tach, RESAMPLE_HZ, seg)

    vlf = _band_power(psd, *VLF_BAND)
    lf = _band_power(psd, *LF_BAND)
    hf = _band_power(psd, *HF_BAND)
    flags: list[str] = []
    if hf <= 1e-12:
        flags.append("hf_zero")
        lfhf = lnhf = math.nan
    else:
        lfhf = lf / hf
        lnhf = math.log(hf)
    denom = lf + hf
    lfn = lf / denom if denom > 0 else math.nan
    hfn = hf / denom if denom > 0 else math.nan
    if denom <= 0:
        flags.append("no_lf_hf_power")
    return WindowFeatures({
        "VLF": vlf, "LF": lf, "HF": hf, "TP": vlf + lf + hf,
        "LFHF": lfhf, "LFn": lfn, "HFn": hfn, "LnHF": lnhf,
    }, tuple(flags))


def shannon_entropy(rr: np.ndarray) -> float:
    """Entropy (bits) of the 8-equal-width-bin RR histogram over [min, max]."""
    lo, hi = float(np.min(rr)), float(np.max(rr))
    if hi == lo:
        return 0.0
    counts, _ = np.histogram(rr, bins=SHANEN_BINS, range=(lo, hi))
    p = counts[counts > 0] / rr.size
    return float(-np.sum(p * np.log2(p)))


def nonlinear(rr_ms) -> WindowFeatures:
    """Poincare descriptors (via the variance identities) plus Shannon entropy."""
    rr = np.asarray(rr_ms, dtype=float)
    if rr.size < 4:
        raise DataError(f"need >= 4 intervals for nonlinear features, got {rr.size}")
    d = np.diff(rr)
    var_d = float(np.var(d))
    var_rr = float(np.var(rr))
    sd1 = math.sqrt(0.5 * var_d)
    sd2 = math.sqrt(max(0.0, 2.0 * var_rr - 0.5 * var_d))
    flags: list[str] = []
    if sd1 == 0.0 or sd2 == 0.0:
        flags.append("degenerate_poincare")
        ratio = csi = math.nan
    else:
        ratio = sd1 / sd2
        csi = sd2 / sd1
    return WindowFeatures({
        "SD1": sd1, "SD2": sd2, "SD1SD2": ratio, "CSI": csi,
        "ShanEn": shannon_entropy(rr),
    }, tuple(flags))


def all_features(rr: RrSeries, window_span_s: float) -> WindowFeatures:
    """All catalog features for one window; any sub-domain flag marks it unusable."""
    flags: list[str] = []
    total = rr.rr_ms.size + rr.n_rejected
    if total > 0 and rr.n_rejected / total > MAX_REJECTED_FRAC:
        flags.append("too_many_rejected_intervals")
    values = dict(time_domain(rr.rr_ms))
    freq = frequency_domain(rr, window_span_s)
    values.update(freq.values)
    flags.extend(freq.flags)
    nl = nonlinear(rr.rr_ms)
    values.update(nl.values)
    flags.extend(nl.flags)
    ordered = {name: values[name] for name in FEATURE_NAMES}
    return WindowFeatures(ordered, tuple(flags))

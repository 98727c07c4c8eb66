"""Rate ingestion, log returns, sample statistics, and bootstrap intervals."""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass

import numpy as np
from scipy import stats as sstats

from .errors import ConfigError, IngestError, StatError

__all__ = [
    "RatePanel",
    "ReturnPanel",
    "SampleStats",
    "CorrInterval",
    "ingest_rates",
    "log_returns",
    "sample_stats",
    "correlations",
    "bootstrap_corr_ci",
]


@dataclass
class RatePanel:
    """Aligned positive rate levels: strictly increasing dates, T x N matrix."""

    dates: list
    rates: np.ndarray
    asset_names: list


@dataclass
class ReturnPanel:
    """Log returns with the date of each return row and the first
    out-of-sample row index."""

    dates: list
    returns: np.ndarray
    split_index: int
    asset_names: list


@dataclass
class SampleStats:
    mean: float
    std: float
    skew: float
    excess_kurtosis: float
    minimum: float
    p25: float
    p50: float
    p75: float
    maximum: float

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "skew": self.skew,
            "kurt": self.excess_kurtosis,
            "min": self.minimum,
            "25%": self.p25,
            "50%": self.p50,
            "75%": self.p75,
            "max": self.maximum,
        }


@dataclass
class CorrInterval:
    point: float
    lower: float
    upper: float
    resamples: int

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def _parse_date(text: str, row: int):
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError as exc:
        raise IngestError(f"row {row}: cannot parse date {text!r} (expected ISO-8601)") from exc


def ingest_rates(path, inverse_assets=(), delimiter: str = ",") -> RatePanel:
    """Read a delimited rate file with header ``date,<asset1>,...``.

    Assets named in ``inverse_assets`` are replaced by their reciprocal
    levels (used for quote conventions where the raw series is the inverse
    of the rate of interest).  Rows are sorted by date.
    """
    inverse_assets = set(inverse_assets)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh, delimiter=delimiter)
            rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise IngestError("file needs a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise IngestError("header must contain a date column and at least one asset")
    assets = header[1:]
    unknown = inverse_assets - set(assets)
    if unknown:
        raise IngestError(f"inverse assets not in header: {sorted(unknown)}")

    records = []
    for idx, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise IngestError(f"row {idx}: expected {len(header)} fields, got {len(row)}")
        date = _parse_date(row[0], idx)
        try:
            values = [float(cell) for cell in row[1:]]
        except ValueError as exc:
            raise IngestError(f"row {idx}: non-numeric rate value") from exc
        for j, value in enumerate(values):
            if not np.isfinite(value) or value <= 0.0:
                raise IngestError(f"row {idx}: non-positive rate for {assets[j]}")
        records.append((date, values))

    records.sort(key=lambda rec: rec[0])
    dates = [rec[0] for rec in records]
    for a, b in zip(dates, dates[1:]):
        if a == b:
            raise IngestError(f"duplicate date {a.isoformat()}")
    rates = np.array([rec[1] for rec in records], dtype=float)
    for j, name in enumerate(assets):
        if name in inverse_assets:
            rates[:, j] = 1.0 / rates[:, j]
    return RatePanel(dates=dates, rates=rates, asset_names=list(assets))


def log_returns(panel: RatePanel, split_date) -> ReturnPanel:
    """Log returns between consecutive observations, split at ``split_date``.

    The split index is the first return row whose date falls on or after
    ``split_date``; rows before it are in-sample.
    """
    if len(panel.dates) < 2:
        raise ConfigError("need at least two rate observations")
    if isinstance(split_date, str):
        split_date = dt.date.fromisoformat(split_date)
    if not (panel.dates[0] <= split_date <= panel.dates[-1]):
        raise ConfigError(
            f"split date {split_date} outside panel range "
            f"[{panel.dates[0]}, {panel.dates[-1]}]"
        )
    returns = np.log(panel.rates[1:] / panel.rates[:-1])
    dates = panel.dates[1:]
    split_index = len(dates)
    for i, d in enumerate(dates):
        if d >= split_date:
            split_index = i
            break
    return ReturnPanel(
        dates=dates,
        returns=returns,
        split_index=split_index,
        asset_names=list(panel.asset_names),
    )


def sample_stats(x: np.ndarray) -> SampleStats:
    """Descriptive statistics with bias-corrected skewness and Fisher excess
    kurtosis (normal = 0); percentiles use linear interpolation."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4:
        raise StatError(f"need at least 4 observations, got {n}")
    p25, p50, p75 = np.percentile(x, [25.0, 50.0, 75.0])
    return SampleStats(
        mean=float(np.mean(x)),
        std=float(np.std(x, ddof=1)),
        skew=float(sstats.skew(x, bias=False)),
        excess_kurtosis=float(sstats.kurtosis(x, fisher=True, bias=False)),
        minimum=float(np.min(x)),
        p25=float(p25),
        p50=float(p50),
        p75=float(p75),
        maximum=float(np.max(x)),
    )


def correlations(panel: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pearson and Spearman correlation matrices of a T x N panel.

    Spearman is Pearson on average ranks, so ties are handled
    deterministically.
    """
    panel = np.asarray(panel, dtype=float)
    if panel.ndim != 2 or panel.shape[0] < 3:
        raise StatError("need a T x N matrix with T >= 3")
    if np.any(np.std(panel, axis=0) == 0.0):
        raise StatError("zero variance column")
    linear = np.corrcoef(panel.T)
    ranks = np.apply_along_axis(sstats.rankdata, 0, panel)
    rank = np.corrcoef(ranks.T)
    return linear, rank


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    ac = a - a.mean()
    bc = b - b.mean()
    return float(np.dot(ac, bc) / np.sqrt(np.dot(ac, ac) * np.dot(bc, bc)))


MAX_REDRAWS = 100


def bootstrap_corr_ci(
    pairs: np.ndarray,
    resamples: int = 10000,
    level: float = 0.95,
    seed: int = 0,
) -> CorrInterval:
    """Percentile bootstrap interval for the correlation of a T x 2 sample.

    Rows are resampled i.i.d. with replacement, T rows per resample.  Each
    resample draws from its own counter-based stream keyed by
    (seed, resample index), so results do not depend on evaluation order.
    Degenerate resamples (zero variance in either column) are redrawn from
    the same stream, up to a cap.
    """
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise StatError("pairs must be a T x 2 matrix")
    T = pairs.shape[0]
    if T < 10:
        raise StatError(f"need at least 10 rows, got {T}")
    if not 0.0 < level < 1.0:
        raise StatError("level must lie in (0, 1)")
    point = _pearson(pairs[:, 0], pairs[:, 1])
    estimates = np.empty(resamples)
    x, y = pairs[:, 0], pairs[:, 1]
    for i in range(resamples):
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, i], dtype=np.uint64)))
        for attempt in range(MAX_REDRAWS):
            idx = rng.integers(0, T, size=T)
            xs, ys = x[idx], y[idx]
            if xs.min() < xs.max() and ys.min() < ys.max():
                estimates[i] = _pearson(xs, ys)
                break
        else:
            raise StatError("resample redraw cap hit (degenerate column)")
    alpha = (1.0 - level) / 2.0
    lower, upper = np.percentile(estimates, [100.0 * alpha, 100.0 * (1.0 - alpha)])
    return CorrInterval(point=point, lower=float(lower), upper=float(upper), resamples=resamples)

"""Dataset ingestion and supervised-set construction.

Handles the UCI "Individual household electric power consumption" text
layout: one record per line, `;`-separated fields, first line a header,
`?` or an empty field marking a missing value. Power samples arrive once
per minute (60 s step).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .errors import (
    AllMissing,
    DegenerateRange,
    DimensionMismatch,
    EmptyRange,
    MalformedRecord,
    SeriesTooShort,
    UnknownColumn,
)

MISSING_MARKERS = ("?", "")
DEFAULT_COLUMN = "Global_active_power"
DEFAULT_STEP_SECONDS = 60.0

_DATETIME_FORMATS = ("%d/%m/%Y %H:%M:%S", "%Y-%m-%d %H:%M:%S")


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly spaced scalar power samples (kilowatts)."""

    values: np.ndarray
    start_timestamp: datetime | None = None
    step_seconds: float = DEFAULT_STEP_SECONDS
    imputed_count: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1:
            raise DimensionMismatch("series values must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise ValueError("series contains non-finite values")
        if self.step_seconds <= 0:
            raise ValueError("sampling step must be strictly positive")
        if not 0 <= self.imputed_count <= len(values):
            raise ValueError("imputed_count out of range")
        self.values.setflags(write=False)

    def __len__(self):
        return len(self.values)

    def timestamp_at(self, index: int) -> datetime | None:
        if self.start_timestamp is None:
            return None
        return self.start_timestamp + timedelta(seconds=index * self.step_seconds)


@dataclass(frozen=True)
class Normalizer:
    """z-score scaling fitted on a training region only."""

    mean: float
    std: float

    def __post_init__(self):
        if not (np.isfinite(self.mean) and np.isfinite(self.std)):
            raise ValueError("normalizer statistics must be finite")
        if self.std <= 0:
            raise DegenerateRange("standard deviation must be positive")

    def normalize(self, x):
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def denormalize(self, z):
        return np.asarray(z, dtype=np.float64) * self.std + self.mean


@dataclass(frozen=True)
class SupervisedSet:
    """(window of `window` past samples, target at offset +`offset`) pairs."""

    inputs: np.ndarray
    targets: np.ndarray
    window: int
    offset: int

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)
        if inputs.ndim != 2 or inputs.shape[1] != self.window:
            raise DimensionMismatch(
                f"inputs must be (N, {self.window}), got {inputs.shape}"
            )
        if targets.shape != (inputs.shape[0],):
            raise DimensionMismatch("inputs and targets must have equal length")
        if self.offset < 1:
            raise ValueError("target offset must be >= 1")
        self.inputs.setflags(write=False)
        self.targets.setflags(write=False)

    def __len__(self):
        return len(self.targets)


def _parse_timestamp(fields: list[str], header: list[str]) -> datetime | None:
    try:
        d = fields[header.index("Date")]
        t = fields[header.index("Time")]
    except (ValueError, IndexError):
        return None
    for fmt in _DATETIME_FORMATS:
        try:
            return datetime.strptime(f"{d} {t}", fmt)
        except ValueError:
            continue
    return None


def parse_household_csv(
    path,
    column: str = DEFAULT_COLUMN,
    step_seconds: float = DEFAULT_STEP_SECONDS,
) -> TimeSeries:
    """Read one column of a household power file into a TimeSeries.

    Missing values (`?` or empty field) are forward-filled with the last
    valid sample; leading missing values are dropped. `imputed_count`
    records the number of forward fills.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line:
            raise MalformedRecord(1, "empty file, expected a header row")
        header = [h.strip() for h in header_line.rstrip("\n\r").split(";")]
        if column not in header:
            raise UnknownColumn(f"no column {column!r} in header {header}")
        col_idx = header.index(column)

        values: list[float] = []
        imputed = 0
        last_valid: float | None = None
        start_timestamp: datetime | None = None

        for line_number, line in enumerate(fh, start=2):
            line = line.rstrip("\n\r")
            if not line:
                continue
            fields = line.split(";")
            if len(fields) != len(header):
                raise MalformedRecord(
                    line_number,
                    f"expected {len(header)} fields, got {len(fields)}",
                )
            raw = fields[col_idx].strip()
            if raw in MISSING_MARKERS:
                if last_valid is None:
                    continue  # leading missing values are dropped
                values.append(last_valid)
                imputed += 1
                continue
            try:
                value = float(raw)
            except ValueError:
                raise MalformedRecord(
                    line_number, f"unparsable value {raw!r} in column {column!r}"
                ) from None
            if last_valid is None:
                start_timestamp = _parse_timestamp(fields, header)
            last_valid = value
            values.append(value)

    if not values:
        raise AllMissing(f"no parsable value in column {column!r}")
    return TimeSeries(
        values=np.array(values, dtype=np.float64),
        start_timestamp=start_timestamp,
        step_seconds=step_seconds,
        imputed_count=imputed,
    )


def standardize(
    series: TimeSeries, fit_range: tuple[int, int] | None = None
) -> tuple[Normalizer, TimeSeries]:
    """z-score the whole series with statistics from `fit_range` only.

    `fit_range` is a half-open (start, stop) index interval; None means
    the full series. Sample std (N-1 denominator).
    """
    if fit_range is None:
        fit_range = (0, len(series))
    start, stop = fit_range
    if not (0 <= start < stop <= len(series)):
        raise EmptyRange(f"fit_range {fit_range} empty or out of bounds")
    region = series.values[start:stop]
    mean = float(np.mean(region))
    if np.all(region == region[0]):
        raise DegenerateRange("fit_range values are all equal")
    std = float(np.std(region, ddof=1))
    norm = Normalizer(mean=mean, std=std)
    scaled = TimeSeries(
        values=norm.normalize(series.values),
        start_timestamp=series.start_timestamp,
        step_seconds=series.step_seconds,
        imputed_count=series.imputed_count,
    )
    return norm, scaled


def make_supervised(series: TimeSeries, n: int, k: int) -> SupervisedSet:
    """Build all (last n samples -> sample at offset +k) training pairs.

    Pair i (0-based) maps values[i : i+n] to values[i+n-1+k]; the pair
    count is L - n - k + 1.
    """
    if n < 1 or k < 1:
        raise ValueError("window and offset must be >= 1")
    length = len(series)
    if length < n + k:
        raise SeriesTooShort(
            f"need at least n+k={n + k} samples, have {length}"
        )
    count = length - n - k + 1
    windows = np.lib.stride_tricks.sliding_window_view(series.values, n)[:count]
    targets = series.values[n + k - 1 :]
    return SupervisedSet(
        inputs=np.ascontiguousarray(windows),
        targets=targets.copy(),
        window=n,
        offset=k,
    )


def split(
    series: TimeSeries, train_len: int, test_len: int
) -> tuple[TimeSeries, TimeSeries]:
    """Contiguous chronological prefix split: train then test, no overlap.

    The imputation counter tracks ingestion provenance and is not
    position-resolved, so derived slices reset it to zero.
    """
    if train_len < 0 or test_len < 0:
        raise ValueError("split lengths must be non-negative")
    if train_len + test_len > len(series):
        raise SeriesTooShort(
            f"cannot take {train_len}+{test_len} samples from {len(series)}"
        )
    train = TimeSeries(
        values=series.values[:train_len].copy(),
        start_timestamp=series.start_timestamp,
        step_seconds=series.step_seconds,
        imputed_count=0,
    )
    test = TimeSeries(
        values=series.values[train_len : train_len + test_len].copy(),
        start_timestamp=series.timestamp_at(train_len),
        step_seconds=series.step_seconds,
        imputed_count=0,
    )
    return train, test


def slice_series(series: TimeSeries, start: int, stop: int) -> TimeSeries:
    """Index-range view of a series as a new TimeSeries."""
    if not (0 <= start <= stop <= len(series)):
        raise EmptyRange(f"slice ({start}, {stop}) out of bounds")
    return TimeSeries(
        values=series.values[start:stop].copy(),
        start_timestamp=series.timestamp_at(start),
        step_seconds=series.step_seconds,
        imputed_count=0,
    )

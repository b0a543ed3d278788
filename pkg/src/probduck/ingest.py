"""Load and align historical PV / load CSV files into a rectangular panel.

Each CSV has a ``timestamp`` column (ISO-8601 local time on the period grid)
followed by one column per series, in MW. A day is kept only when every
series has a finite value at every period; there is no imputation.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from .errors import AlignmentError, EmptyPanel, PeriodOutOfRange, SchemaError, UnknownSeries

logger = logging.getLogger(__name__)

MIN_DAYS = 30


class SeriesKind(str, Enum):
    PV = "PV"
    LOAD = "LOAD"


@dataclass(frozen=True)
class SeriesMeta:
    id: str
    kind: SeriesKind
    capacity: float | None = None

    def __post_init__(self):
        if self.capacity is not None and not self.capacity > 0:
            raise SchemaError(f"series {self.id!r}: capacity must be > 0, got {self.capacity}")


@dataclass(frozen=True, eq=False)
class TimePanel:
    """Aligned historical samples.

    ``values[s, d, t]`` is the observation of series ``s`` on day ``d`` at
    period ``t`` in MW. The array is read-only.
    """

    periods_per_day: int
    series: tuple[SeriesMeta, ...]
    values: np.ndarray
    days: tuple[dt.date, ...]
    dropped_days: int = 0
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 3:
            raise SchemaError("panel values must be 3-D (series, day, period)")
        n_series, n_days, n_periods = values.shape
        if n_series != len(self.series):
            raise SchemaError("values/series length mismatch")
        if n_periods != self.periods_per_day:
            raise SchemaError("values period axis does not match periods_per_day")
        if n_days != len(self.days):
            raise SchemaError("values/day length mismatch")
        if not np.all(np.isfinite(values)):
            raise SchemaError("panel values must be finite")
        ids = [s.id for s in self.series]
        if len(set(ids)) != len(ids):
            raise SchemaError(f"duplicate series ids: {ids}")
        for k, meta in enumerate(self.series):
            if meta.kind is SeriesKind.PV and np.any(values[k] < 0):
                raise SchemaError(f"PV series {meta.id!r} has negative values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_index", {sid: k for k, sid in enumerate(ids)})

    @property
    def day_count(self) -> int:
        return self.values.shape[1]

    def ids(self, kind: SeriesKind | str | None = None) -> list[str]:
        if kind is None:
            return [s.id for s in self.series]
        kind = SeriesKind(kind)
        return [s.id for s in self.series if s.kind is kind]

    def index_of(self, series_id: str) -> int:
        try:
            return self._index[series_id]
        except KeyError:
            raise UnknownSeries(series_id) from None

    def fleet(self, kind: SeriesKind | str, t: int) -> np.ndarray:
        """Per-day samples of every series of ``kind`` at ``t``, shape (n, days)."""
        self._check_period(t)
        rows = [self.index_of(sid) for sid in self.ids(kind)]
        return self.values[rows, :, t]

    def total(self, kind: SeriesKind | str) -> np.ndarray:
        """Per-day fleet total, shape (days, periods)."""
        rows = [self.index_of(sid) for sid in self.ids(kind)]
        return self.values[rows].sum(axis=0)

    def net_load(self) -> np.ndarray:
        """Per-day total load minus total PV, shape (days, periods)."""
        return self.total(SeriesKind.LOAD) - self.total(SeriesKind.PV)

    def peak_load(self) -> float:
        return float(self.total(SeriesKind.LOAD).max())

    def filter_days(self, start: dt.date | None = None, end: dt.date | None = None,
                    min_days: int = MIN_DAYS) -> "TimePanel":
        """Keep days in ``[start, end]`` (inclusive)."""
        keep = [
            k for k, d in enumerate(self.days)
            if (start is None or d >= start) and (end is None or d <= end)
        ]
        if len(keep) < min_days:
            raise EmptyPanel(f"{len(keep)} complete days in range, need at least {min_days}")
        return TimePanel(
            periods_per_day=self.periods_per_day,
            series=self.series,
            values=self.values[:, keep, :],
            days=tuple(self.days[k] for k in keep),
            dropped_days=self.dropped_days,
        )

    def _check_period(self, t: int):
        if not 0 <= t < self.periods_per_day:
            raise PeriodOutOfRange(f"period {t} outside 0..{self.periods_per_day - 1}")


def slice_period(panel: TimePanel, series_id: str, t: int) -> np.ndarray:
    """Day-indexed observations of one series at period ``t``."""
    k = panel.index_of(series_id)
    panel._check_period(t)
    return panel.values[k, :, t]


def _read_one(path: Path, periods_per_day: int) -> pd.DataFrame:
    """Read one CSV into a frame indexed by (date, period)."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise SchemaError(f"{path}: cannot read CSV ({exc})") from exc
    columns = list(frame.columns)
    if not columns or columns[0].strip() != "timestamp":
        raise SchemaError(f"{path}: first column must be 'timestamp', got {columns[:1]}")
    if len(columns) < 2:
        raise SchemaError(f"{path}: no series columns")
    names = [c.strip() for c in columns[1:]]
    if len(set(names)) != len(names) or any(not n for n in names):
        raise SchemaError(f"{path}: duplicate or empty series names {names}")
    if any(n.startswith("Unnamed:") for n in names):
        raise SchemaError(f"{path}: header has unnamed columns")

    try:
        stamps = pd.to_datetime(frame[columns[0]].str.strip(), format="ISO8601")
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{path}: unparseable timestamp ({exc})") from exc
    if getattr(stamps.dt, "tz", None) is not None:
        stamps = stamps.dt.tz_localize(None)
    if stamps.duplicated().any():
        first = stamps[stamps.duplicated()].iloc[0]
        raise AlignmentError(f"{path}: duplicate timestamp {first}")

    minutes = 1440 // periods_per_day
    if minutes * periods_per_day != 1440:
        raise AlignmentError(f"periods_per_day={periods_per_day} does not divide a day")
    offset = stamps - stamps.dt.normalize()
    seconds = offset.dt.total_seconds().to_numpy()
    period = seconds / (60.0 * minutes)
    if np.any(period != np.floor(period)):
        bad = stamps[period != np.floor(period)].iloc[0]
        raise AlignmentError(f"{path}: timestamp {bad} not on the {minutes}-minute grid")

    data = {}
    for col, name in zip(columns[1:], names):
        raw = frame[col].str.strip()
        try:
            # Python float parsing round-trips repr output exactly
            data[name] = raw.replace("", "nan").astype(float).to_numpy()
        except ValueError:
            bad = pd.to_numeric(raw, errors="coerce").isna() & (raw != "")
            bad &= raw.str.lower() != "nan"
            raise SchemaError(
                f"{path}: column {name!r} has non-numeric value {raw[bad].iloc[0]!r}") from None
    out = pd.DataFrame(data)
    out["date"] = stamps.dt.date.to_numpy()
    out["period"] = period.astype(int)
    return out.set_index(["date", "period"])


def load_panel(pv_csv_path: str | Path, load_csv_path: str | Path, periods_per_day: int,
               start: dt.date | None = None, end: dt.date | None = None,
               capacities: Mapping[str, float] | None = None,
               min_days: int = MIN_DAYS) -> TimePanel:
    """Build a rectangular :class:`TimePanel` from a PV file and a load file.

    Days with any missing or non-finite value in any series are dropped;
    the number dropped is stored on the panel and logged. Negative PV
    readings (meter noise at night) are clipped to 0.
    """
    pv = _read_one(Path(pv_csv_path), periods_per_day)
    load = _read_one(Path(load_csv_path), periods_per_day)
    overlap = set(pv.columns) & set(load.columns)
    if overlap:
        raise SchemaError(f"series ids appear in both files: {sorted(overlap)}")

    pv_ids, load_ids = list(pv.columns), list(load.columns)
    joined = pv.join(load, how="outer")
    all_days = sorted(set(joined.index.get_level_values("date")))
    if start is not None or end is not None:
        all_days = [d for d in all_days
                    if (start is None or d >= start) and (end is None or d <= end)]

    full_index = pd.MultiIndex.from_product([all_days, range(periods_per_day)],
                                            names=["date", "period"])
    grid = joined.reindex(full_index)
    cube = grid.to_numpy(dtype=float).reshape(len(all_days), periods_per_day, -1)
    complete = np.all(np.isfinite(cube), axis=(1, 2))
    dropped = int((~complete).sum())
    if dropped:
        logger.info("dropped %d incomplete day(s)", dropped)
    if complete.sum() < min_days:
        raise EmptyPanel(f"{int(complete.sum())} complete days, need at least {min_days}")

    cube = cube[complete].transpose(2, 0, 1)
    n_pv = len(pv_ids)
    neg = cube[:n_pv] < 0
    if neg.any():
        logger.warning("clipped %d negative PV reading(s) to 0", int(neg.sum()))
        cube[:n_pv][neg] = 0.0

    capacities = dict(capacities or {})
    series = tuple(
        [SeriesMeta(sid, SeriesKind.PV, capacities.get(sid)) for sid in pv_ids]
        + [SeriesMeta(sid, SeriesKind.LOAD, capacities.get(sid)) for sid in load_ids]
    )
    days = tuple(d for d, ok in zip(all_days, complete) if ok)
    return TimePanel(periods_per_day, series, cube, days, dropped_days=dropped)


def _timestamp(day: dt.date, t: int, periods_per_day: int) -> str:
    moment = dt.datetime.combine(day, dt.time()) + dt.timedelta(minutes=t * 1440 // periods_per_day)
    return moment.isoformat(timespec="seconds")


def _write_one(path: Path, panel: TimePanel, ids: Sequence[str]):
    rows = [panel.index_of(sid) for sid in ids]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", *ids])
        for d, day in enumerate(panel.days):
            for t in range(panel.periods_per_day):
                writer.writerow([_timestamp(day, t, panel.periods_per_day),
                                 *(repr(float(panel.values[k, d, t])) for k in rows)])


def write_panel(panel: TimePanel, pv_csv_path: str | Path, load_csv_path: str | Path):
    """Write ``panel`` as a PV file and a load file readable by :func:`load_panel`."""
    _write_one(Path(pv_csv_path), panel, panel.ids(SeriesKind.PV))
    _write_one(Path(load_csv_path), panel, panel.ids(SeriesKind.LOAD))


def panel_from_arrays(pv: Mapping[str, np.ndarray], load: Mapping[str, np.ndarray],
                      start: dt.date = dt.date(2020, 1, 1),
                      capacities: Mapping[str, float] | None = None) -> TimePanel:
    """Construct a panel in memory from ``{id: (days, periods)}`` arrays."""
    arrays: list[np.ndarray] = [np.asarray(a, dtype=float) for a in (*pv.values(), *load.values())]
    if not arrays:
        raise SchemaError("no series")
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1 or len(arrays[0].shape) != 2:
        raise SchemaError(f"all series must share one (days, periods) shape, got {shapes}")
    n_days, n_periods = arrays[0].shape
    capacities = dict(capacities or {})
    series = tuple(
        [SeriesMeta(k, SeriesKind.PV, capacities.get(k)) for k in pv]
        + [SeriesMeta(k, SeriesKind.LOAD, capacities.get(k)) for k in load]
    )
    days = tuple(start + dt.timedelta(days=k) for k in range(n_days))
    return TimePanel(n_periods, series, np.stack(arrays), days)


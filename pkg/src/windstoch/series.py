"""Time-series containers shared by every other module.

Missing values are stored as ``NaN`` in float arrays. All arrays held by
the containers are made read-only on construction so instances can be
shared between workers without copying.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt

import numpy as np

from .errors import ConfigError, DataError, DegenerateSeriesError, InsufficientDataError

STEP_SECONDS = 600
STEP = _dt.timedelta(seconds=STEP_SECONDS)

_OPTIONAL_CHANNELS = ("power_min", "power_max", "power_std", "wind_speed")


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def as_utc(ts) -> _dt.datetime:
    """Return ``ts`` as a timezone-aware UTC datetime.

    Naive datetimes are taken to be UTC already.
    """
    if isinstance(ts, str):
        ts = _dt.datetime.fromisoformat(ts.replace("Z", "+00:00"))
    elif isinstance(ts, np.datetime64):
        ts = _dt.datetime.fromisoformat(str(ts.astype("datetime64[s]")))
    if not isinstance(ts, _dt.datetime):
        raise DataError(f"cannot interpret {ts!r} as a timestamp")
    if ts.tzinfo is None:
        return ts.replace(tzinfo=_dt.timezone.utc)
    return ts.astimezone(_dt.timezone.utc)


@dataclasses.dataclass(frozen=True, eq=False)
class TurbineSeries:
    """Regular 10-minute record of one turbine.

    Gaps are NA slots, never missing rows, so sample ``i`` always belongs
    to ``t0 + i * 600 s``. ``power_min``, ``power_max``, ``power_std`` and
    ``wind_speed`` are optional and ``None`` when not measured.
    """

    turbine_id: str
    t0: _dt.datetime
    power_avg: np.ndarray
    power_min: np.ndarray | None = None
    power_max: np.ndarray | None = None
    power_std: np.ndarray | None = None
    wind_speed: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "t0", as_utc(self.t0))
        object.__setattr__(self, "power_avg", _frozen(self.power_avg, "power_avg"))
        n = self.power_avg.size
        for name in _OPTIONAL_CHANNELS:
            val = getattr(self, name)
            if val is None:
                continue
            arr = _frozen(val, name)
            if arr.size != n:
                raise DataError(f"{name} has length {arr.size}, power_avg has {n}")
            object.__setattr__(self, name, arr)
        if self.power_min is not None and self.power_max is not None:
            lo, avg, hi = self.power_min, self.power_avg, self.power_max
            ok = np.isnan(lo) | np.isnan(hi) | np.isnan(avg) | ((lo <= avg) & (avg <= hi))
            if not ok.all():
                i = int(np.flatnonzero(~ok)[0])
                raise DataError(
                    f"{self.turbine_id}: power_min <= power_avg <= power_max violated at index {i}"
                )

    @property
    def step(self) -> _dt.timedelta:
        return STEP

    def __len__(self) -> int:
        return self.power_avg.size

    @property
    def timestamps(self) -> np.ndarray:
        """Sample times as ``datetime64[s]`` (UTC)."""
        start = np.datetime64(self.t0.replace(tzinfo=None), "s")
        return start + np.arange(len(self)) * np.timedelta64(STEP_SECONDS, "s")

    @property
    def na_fraction(self) -> float:
        return float(np.isnan(self.power_avg).mean()) if len(self) else 0.0

    def replace(self, **changes) -> "TurbineSeries":
        return dataclasses.replace(self, **changes)

    def equals(self, other: "TurbineSeries") -> bool:
        """Bit-exact comparison including NA positions."""
        if self.turbine_id != other.turbine_id or self.t0 != other.t0:
            return False
        for name in ("power_avg",) + _OPTIONAL_CHANNELS:
            a, b = getattr(self, name), getattr(other, name)
            if (a is None) != (b is None):
                return False
            if a is not None and not np.array_equal(a, b, equal_nan=True):
                return False
        return True


@dataclasses.dataclass(frozen=True, eq=False)
class IncrementSeries:
    """Power increments at a fixed lag, optionally standardized.

    ``mean`` and ``std`` are the population moments over non-NA entries and
    are only set once :func:`standardize` has run.
    """

    parent_id: str
    dt: _dt.timedelta
    values: np.ndarray
    standardized: np.ndarray | None = None
    mean: float | None = None
    std: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, "values"))
        if self.standardized is not None:
            object.__setattr__(self, "standardized", _frozen(self.standardized, "standardized"))

    def __len__(self) -> int:
        return self.values.size


def _lag_steps(dt) -> int:
    if isinstance(dt, (int, np.integer)) and not isinstance(dt, bool):
        dt = _dt.timedelta(seconds=int(dt))
    if not isinstance(dt, _dt.timedelta):
        raise ConfigError(f"dt must be a timedelta or seconds, got {dt!r}")
    seconds = dt.total_seconds()
    if seconds <= 0 or seconds % STEP_SECONDS:
        raise ConfigError(f"dt={seconds:g} s is not a positive multiple of {STEP_SECONDS} s")
    return int(seconds // STEP_SECONDS)


def increments(series, dt=STEP) -> IncrementSeries:
    """Power increments ``P(t + dt) - P(t)``.

    Parameters
    ----------
    series : TurbineSeries or array_like
        Power series; plain arrays are treated as an anonymous 10-minute series.
    dt : datetime.timedelta or int
        Lag as a duration (or seconds); must be a positive multiple of 600 s.

    Returns
    -------
    IncrementSeries
        ``len(series) - dt/600`` values. An increment is NA whenever either
        endpoint is NA.
    """
    k = _lag_steps(dt)
    if isinstance(series, TurbineSeries):
        p, parent = series.power_avg, series.turbine_id
    else:
        p, parent = np.asarray(series, dtype=float), ""
    if p.size < 2:
        raise InsufficientDataError("increments need at least two samples")
    if p.size <= k:
        raise InsufficientDataError(f"series of length {p.size} is too short for lag {k}")
    return IncrementSeries(parent_id=parent, dt=_dt.timedelta(seconds=k * STEP_SECONDS),
                           values=p[k:] - p[:-k])


def standardize(inc: IncrementSeries) -> IncrementSeries:
    """Zero-mean, unit-variance increments using population (1/T) moments."""
    x = inc.values
    ok = ~np.isnan(x)
    if ok.sum() < 2:
        raise InsufficientDataError("standardize needs at least two non-NA increments")
    mean = float(x[ok].mean())
    std = float(np.sqrt(np.mean((x[ok] - mean) ** 2)))
    if std == 0.0:
        raise DegenerateSeriesError("increments have zero standard deviation")
    return dataclasses.replace(inc, standardized=(x - mean) / std, mean=mean, std=std)

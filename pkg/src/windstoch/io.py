"""CSV and JSON exchange formats.

Turbine CSV files have a header row and the columns::

    timestamp, turbine_id, power_avg_kw[, power_min_kw, power_max_kw,
    power_std_kw, wind_speed_ms]

``timestamp`` is ISO-8601 (UTC if no offset is given); missing values are
the literal ``NA`` or an empty field. Rows may come in any order. Each
turbine's records must lie on a 10-minute grid; absent grid slots become
NA. Duplicate ``(turbine_id, timestamp)`` pairs are rejected.

Numbers are written with ``repr`` so that a write/read cycle is exact.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import hashlib
import io as _io
import json
import os
import tempfile

import numpy as np

from .errors import DataError
from .series import STEP_SECONDS, TurbineSeries, as_utc

SCHEMA_VERSION = "1.0"

COLUMNS = {
    "power_avg_kw": "power_avg",
    "power_min_kw": "power_min",
    "power_max_kw": "power_max",
    "power_std_kw": "power_std",
    "wind_speed_ms": "wind_speed",
}
HEADER = ["timestamp", "turbine_id", *COLUMNS]
REQUIRED = ("timestamp", "turbine_id", "power_avg_kw")


@dataclasses.dataclass(frozen=True)
class IngestReport:
    rows_parsed: int
    slots_filled: dict  # turbine_id -> number of NA slots added for missing rows


def _number(text: str, lineno: int, column: str) -> float:
    text = text.strip()
    if text in ("", "NA"):
        return np.nan
    try:
        return float(text)
    except ValueError:
        raise DataError(f"line {lineno}: column {column!r}: cannot parse {text!r}") from None


def _timestamp(text: str, lineno: int) -> _dt.datetime:
    try:
        return as_utc(text.strip())
    except (ValueError, DataError):
        raise DataError(f"line {lineno}: bad timestamp {text!r}") from None


def read_turbines(source):
    """Parse a turbine CSV.

    Parameters
    ----------
    source : str, os.PathLike or text file object

    Returns
    -------
    series : dict
        ``turbine_id -> TurbineSeries`` sorted by turbine id.
    report : IngestReport
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            return read_turbines(fh)
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError("empty file: header row required") from None
    missing = [c for c in REQUIRED if c not in header]
    if missing:
        raise DataError(f"line 1: missing required columns {missing}")
    unknown = [c for c in header if c not in HEADER]
    if unknown:
        raise DataError(f"line 1: unknown columns {unknown}")
    col = {name: header.index(name) for name in header}
    present = [c for c in COLUMNS if c in col]

    records: dict = {}
    seen: dict = {}
    n_rows = 0
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(header):
            raise DataError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        tid = row[col["turbine_id"]].strip()
        if not tid:
            raise DataError(f"line {lineno}: empty turbine_id")
        ts = _timestamp(row[col["timestamp"]], lineno)
        key = (tid, ts)
        if key in seen:
            raise DataError(
                f"lines {seen[key]} and {lineno}: duplicate timestamp {ts.isoformat()} for {tid}"
            )
        seen[key] = lineno
        values = [_number(row[col[c]], lineno, c) for c in present]
        records.setdefault(tid, []).append((ts, lineno, values))
        n_rows += 1

    out, filled = {}, {}
    for tid in sorted(records):
        recs = sorted(records[tid], key=lambda r: r[0])
        t0 = recs[0][0]
        offsets = []
        for ts, lineno, _ in recs:
            sec = (ts - t0).total_seconds()
            if sec % STEP_SECONDS:
                raise DataError(f"line {lineno}: {ts.isoformat()} is off the 10-minute grid of {tid}")
            offsets.append(int(sec // STEP_SECONDS))
        n = offsets[-1] + 1
        arrays = {c: np.full(n, np.nan) for c in present}
        for idx, (_, _, values) in zip(offsets, recs):
            for c, v in zip(present, values):
                arrays[c][idx] = v
        fields = {COLUMNS[c]: arrays[c] for c in present}
        try:
            out[tid] = TurbineSeries(turbine_id=tid, t0=t0, **fields)
        except DataError as exc:
            raise DataError(f"turbine {tid}: {exc}") from None
        filled[tid] = n - len(recs)
    return out, IngestReport(rows_parsed=n_rows, slots_filled=filled)


def _fmt(v: float) -> str:
    return "NA" if np.isnan(v) else repr(float(v))


def _iso(ts: np.datetime64) -> str:
    return str(ts.astype("datetime64[s]")) + "Z"


def turbines_to_csv(series) -> str:
    """Serialize one or more TurbineSeries.

    Only channels present in at least one series get a column; a series
    lacking a written channel gets NA there.
    """
    if isinstance(series, TurbineSeries):
        series = [series]
    series = sorted(series, key=lambda s: s.turbine_id)
    cols = [c for c in COLUMNS if c == "power_avg_kw"
            or any(getattr(s, COLUMNS[c]) is not None for s in series)]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["timestamp", "turbine_id", *cols])
    for s in series:
        chans = [getattr(s, COLUMNS[c]) for c in cols]
        for i, ts in enumerate(s.timestamps):
            w.writerow([_iso(ts), s.turbine_id,
                        *("NA" if ch is None else _fmt(ch[i]) for ch in chans)])
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_turbines(path, series) -> None:
    write_atomic(path, turbines_to_csv(series))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if not np.isfinite(v) else v
    if isinstance(obj, _dt.datetime):
        return obj.isoformat().replace("+00:00", "Z")
    if isinstance(obj, _dt.timedelta):
        return obj.total_seconds()
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON form of ``config``."""
    canon = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def write_report(path, payload: dict, config: dict, seed=None) -> None:
    """JSON report with schema version, config hash and seed."""
    doc = {"schema_version": SCHEMA_VERSION, "config_hash": config_hash(config), "seed": seed}
    doc.update(payload)
    write_atomic(path, dumps(doc))


def write_columns(path, columns: dict) -> None:
    """Plot-ready CSV: one column per key, rows padded with NA."""
    names = list(columns)
    cols = [np.asarray(columns[k], dtype=float) for k in names]
    n = max(c.size for c in cols)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for i in range(n):
        w.writerow([_fmt(c[i]) if i < c.size else "NA" for c in cols])
    write_atomic(path, buf.getvalue())

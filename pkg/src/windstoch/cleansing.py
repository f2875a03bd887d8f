"""Rule-based invalidation of implausible 10-minute records.

Three rules are applied in order, each on the output of the previous one:

1. ``consecutive_identical``: an average equal to its predecessor (after
   rounding to ``precision_digits`` decimals) is invalid, unless that
   interval's min and max equal the average too (constant operation,
   e.g. pinned at rated power).
2. ``zero_std``: an interval whose standard deviation is exactly zero.
3. ``unphysical_ramp``: the arriving value of a jump larger than
   ``xi0 * rated_power`` whose extreme values do not overlap the previous
   interval, ``P_min(t+1) > q P_max(t)`` upward or, by time reversal,
   ``P_min(t) > q P_max(t+1)`` downward.

Flagged records have all power channels set to NA; wind speed is kept.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np

from .errors import ConfigError
from .series import TurbineSeries

log = logging.getLogger(__name__)

RULES = ("duplicate_timestamp", "consecutive_identical", "zero_std", "unphysical_ramp")


@dataclasses.dataclass(frozen=True)
class CleansingConfig:
    xi0: float = 0.67
    q: float = 0.99
    rated_power: float = 3600.0
    precision_digits: int = 5

    def __post_init__(self):
        if not self.xi0 > 0:
            raise ConfigError(f"xi0 must be positive, got {self.xi0}")
        if not 0 < self.q <= 1:
            raise ConfigError(f"q must lie in (0, 1], got {self.q}")
        if not self.rated_power > 0:
            raise ConfigError(f"rated_power must be positive, got {self.rated_power}")
        if self.precision_digits < 0:
            raise ConfigError("precision_digits must be non-negative")


@dataclasses.dataclass(frozen=True)
class CleansingReport:
    counts: dict
    na_fraction_before: float
    na_fraction_after: float
    skipped: tuple = ()

    def to_dict(self) -> dict:
        return {
            "counts": dict(self.counts),
            "na_fraction_before": self.na_fraction_before,
            "na_fraction_after": self.na_fraction_after,
            "skipped": list(self.skipped),
        }


def _consecutive_identical(avg, lo, hi, digits):
    r = np.round(avg, digits)
    same = np.zeros(avg.size, dtype=bool)
    same[1:] = r[1:] == r[:-1]  # NaN never compares equal
    constant = (np.round(lo, digits) == r) & (np.round(hi, digits) == r)
    return same & ~constant


def _unphysical_ramp(avg, lo, hi, cfg):
    flag = np.zeros(avg.size, dtype=bool)
    jump = (avg[1:] - avg[:-1]) / cfg.rated_power
    with np.errstate(invalid="ignore"):
        up = (jump > cfg.xi0) & (lo[1:] > cfg.q * hi[:-1])
        down = (jump < -cfg.xi0) & (lo[:-1] > cfg.q * hi[1:])
    flag[1:] = up | down
    return flag


def cleanse(series: TurbineSeries, cfg: CleansingConfig | None = None):
    """Apply the three cleansing rules.

    Parameters
    ----------
    series : TurbineSeries
    cfg : CleansingConfig, optional

    Returns
    -------
    cleaned : TurbineSeries
        Copy of ``series`` with flagged records set to NA.
    report : CleansingReport
        Newly invalidated records per rule. A rule whose input channels
        are missing is listed in ``report.skipped`` and counts zero.
    """
    cfg = cfg or CleansingConfig()
    avg = series.power_avg.copy()
    lo = None if series.power_min is None else series.power_min.copy()
    hi = None if series.power_max is None else series.power_max.copy()
    sd = None if series.power_std is None else series.power_std.copy()
    channels = [c for c in (avg, lo, hi, sd) if c is not None]
    before = series.na_fraction

    counts = dict.fromkeys(RULES, 0)
    skipped = []

    def apply(rule, mask):
        new = mask & ~np.isnan(avg)
        counts[rule] = int(new.sum())
        for c in channels:
            c[new] = np.nan

    if lo is None or hi is None:
        skipped += ["consecutive_identical", "unphysical_ramp"]
    else:
        apply("consecutive_identical", _consecutive_identical(avg, lo, hi, cfg.precision_digits))
    if sd is None:
        skipped.append("zero_std")
    else:
        apply("zero_std", sd == 0.0)
    if lo is not None and hi is not None:
        apply("unphysical_ramp", _unphysical_ramp(avg, lo, hi, cfg))

    for rule in skipped:
        log.warning("%s: rule %s skipped, required channels missing", series.turbine_id, rule)

    cleaned = series.replace(power_avg=avg, power_min=lo, power_max=hi, power_std=sd)
    report = CleansingReport(
        counts=counts,
        na_fraction_before=before,
        na_fraction_after=cleaned.na_fraction,
        skipped=tuple(sorted(skipped, key=RULES.index)),
    )
    return cleaned, report

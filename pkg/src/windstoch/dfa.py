"""Detrended fluctuation analysis (DFA).

The profile of the mean-adjusted series is cut into ``floor(T/s)``
non-overlapping windows from the start and the same number from the end.
A polynomial of order ``m`` is removed from each window by least squares
and the fluctuation function is the root mean square of the residuals
over all ``2 floor(T/s)`` windows. Windows touching an NA value are left
out.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np
from scipy import stats

from .errors import ConfigError, InsufficientDataError

log = logging.getLogger(__name__)

CROSSOVER_MIN_IMPROVEMENT = 0.05


@dataclasses.dataclass(frozen=True)
class FluctuationCurve:
    scales: np.ndarray
    F: np.ndarray
    m: int
    n_segments_used: np.ndarray
    dropped_scales: tuple = ()


@dataclasses.dataclass(frozen=True)
class ScalingFit:
    alpha: float
    alpha_stderr: float
    fit_range: tuple
    crossover: float | None = None
    alpha_below: float | None = None
    alpha_above: float | None = None
    stderr_below: float | None = None
    stderr_above: float | None = None

    @property
    def hurst_readings(self) -> dict:
        """Both conventional Hurst readings of ``alpha``.

        ``stationary`` assumes a noise-like series (H = alpha), ``integrated``
        a motion-like one (H = alpha - 1). Which applies depends on the
        data; ``alpha > 1`` is flagged as the integrated regime.
        """
        return {
            "stationary": self.alpha,
            "integrated": self.alpha - 1.0,
            "regime": "integrated" if self.alpha > 1.0 else "stationary",
        }

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["fit_range"] = list(self.fit_range)
        d["hurst_readings"] = self.hurst_readings
        return d


def default_scales(T: int, n_scales: int = 20, s_min: int = 16) -> np.ndarray:
    """``n_scales`` log-spaced integer scales from ``s_min`` to ``T // 4``."""
    s_max = T // 4
    if s_max <= s_min:
        raise InsufficientDataError(f"series of length {T} too short for scales >= {s_min}")
    return np.unique(np.round(np.geomspace(s_min, s_max, n_scales)).astype(int))


def profile(series):
    """Cumulative sum of the mean-adjusted series.

    NA entries contribute zero to the running sum.

    Returns
    -------
    y : ndarray
        The profile.
    na : ndarray of bool
        Positions that were NA; windows containing them are not used.
    """
    x = np.asarray(series, dtype=float)
    na = np.isnan(x)
    if (~na).sum() < 2:
        raise InsufficientDataError("profile needs at least two non-NA values")
    mean = x[~na].mean()
    return np.cumsum(np.where(na, 0.0, x - mean)), na


def _window_msq(y, bad, s, basis):
    n = y.size // s
    if n == 0:
        return np.empty(0)
    Y = y[: n * s].reshape(n, s)
    keep = ~bad[: n * s].reshape(n, s).any(axis=1)
    Y = Y[keep]
    resid = Y - (Y @ basis) @ basis.T
    return np.mean(resid**2, axis=1)


def fluctuation(series, scales=None, m: int = 2) -> FluctuationCurve:
    """Fluctuation function ``F(s)`` of order-``m`` DFA.

    Parameters
    ----------
    series : array_like
        The series (not its profile); NaN marks missing values.
    scales : sequence of int, optional
        Window sizes in samples; defaults to :func:`default_scales`.
    m : int
        Order of the detrending polynomial.
    """
    if m < 0:
        raise ConfigError("detrending order must be >= 0")
    y, na = profile(series)
    T = y.size
    scales = default_scales(T) if scales is None else np.asarray(scales, dtype=int)
    if np.any(np.diff(scales) <= 0):
        raise ConfigError("scales must be strictly increasing")
    if scales[0] < m + 2:
        raise ConfigError(f"smallest scale must be >= m + 2 = {m + 2}")
    yr, nar = y[::-1], na[::-1]
    keep_s, Fs, used, dropped = [], [], [], []
    for s in scales:
        # orthonormal polynomial basis on the window, built once per scale
        t = np.linspace(-1.0, 1.0, s)
        basis, _ = np.linalg.qr(np.vander(t, m + 1, increasing=True))
        msq = np.concatenate([_window_msq(y, na, s, basis), _window_msq(yr, nar, s, basis)])
        if msq.size == 0:
            dropped.append(int(s))
            continue
        F = np.sqrt(msq.mean())
        if not F > 0:
            dropped.append(int(s))
            continue
        keep_s.append(int(s))
        Fs.append(F)
        used.append(msq.size)
    if dropped:
        log.warning("DFA: dropped scales %s (no usable windows or zero fluctuation)", dropped)
    if not keep_s:
        raise InsufficientDataError("no scale has a usable window")
    return FluctuationCurve(scales=np.array(keep_s), F=np.array(Fs), m=m,
                            n_segments_used=np.array(used), dropped_scales=tuple(dropped))


def _line(logs, logF):
    res = stats.linregress(logs, logF)
    sse = float(np.sum((logF - (res.intercept + res.slope * logs)) ** 2))
    return res, sse


def fit_alpha(curve: FluctuationCurve, fit_range=None) -> ScalingFit:
    """Slope of ``log F`` against ``log s`` inside ``fit_range`` (inclusive)."""
    s, F = curve.scales, curve.F
    lo, hi = fit_range if fit_range is not None else (s[0], s[-1])
    m = (s >= lo) & (s <= hi)
    if m.sum() < 4:
        raise InsufficientDataError(f"only {m.sum()} scales inside {fit_range}, need 4")
    res, _ = _line(np.log10(s[m]), np.log10(F[m]))
    stderr = float(res.stderr) if m.sum() > 2 else 0.0
    return ScalingFit(alpha=float(res.slope), alpha_stderr=stderr,
                      fit_range=(int(s[m][0]), int(s[m][-1])))


def fit_crossover(curve: FluctuationCurve, min_points: int = 4,
                  min_improvement: float = CROSSOVER_MIN_IMPROVEMENT) -> ScalingFit:
    """Two-regime power-law fit with an exhaustively searched breakpoint.

    Every split leaving at least ``min_points`` scales on each side is
    tried; the two sides get independent straight lines in log-log and the
    split with the smallest total squared residual wins. The crossover
    scale is where the two lines intersect, restricted to the gap between
    the last scale below and the first scale above the split. If the
    two-line fit does not reduce the single-line residual by at least
    ``min_improvement`` (relative), no crossover is reported.
    """
    s, F = curve.scales, curve.F
    if s.size < 2 * min_points:
        raise InsufficientDataError(f"crossover search needs >= {2 * min_points} scales")
    ls, lF = np.log10(s), np.log10(F)
    single, sse1 = _line(ls, lF)
    base = ScalingFit(alpha=float(single.slope), alpha_stderr=float(single.stderr),
                      fit_range=(int(s[0]), int(s[-1])))
    best = None
    for k in range(min_points, s.size - min_points + 1):
        lo, sse_lo = _line(ls[:k], lF[:k])
        hi, sse_hi = _line(ls[k:], lF[k:])
        if best is None or sse_lo + sse_hi < best[0]:
            best = (sse_lo + sse_hi, k, lo, hi)
    sse2, k, lo, hi = best
    scale = max(sse1, np.finfo(float).tiny)
    if sse1 <= 1e-20 * ls.size or (sse1 - sse2) / scale < min_improvement:
        return base
    if hi.slope != lo.slope:
        x = (lo.intercept - hi.intercept) / (hi.slope - lo.slope)
    else:
        x = 0.5 * (ls[k - 1] + ls[k])
    x = float(np.clip(x, ls[k - 1], ls[k]))
    return dataclasses.replace(
        base,
        crossover=10.0**x,
        alpha_below=float(lo.slope),
        alpha_above=float(hi.slope),
        stderr_below=float(lo.stderr),
        stderr_above=float(hi.stderr),
    )

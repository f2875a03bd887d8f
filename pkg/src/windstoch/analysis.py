"""Statistical characterization of power series.

All functions accept plain arrays with ``NaN`` marking missing values.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy import signal, stats

from .errors import ConfigError, DegenerateSeriesError, InsufficientDataError
from .series import STEP_SECONDS, IncrementSeries

PEAK_WINDOWS = ((50.0, 200.0), (3550.0, 3800.0))


def _values(x) -> np.ndarray:
    if isinstance(x, IncrementSeries):
        x = x.standardized if x.standardized is not None else x.values
    return np.asarray(x, dtype=float)


def _finite(x) -> np.ndarray:
    x = _values(x)
    return x[~np.isnan(x)]


@dataclasses.dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    n_total: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])


@dataclasses.dataclass(frozen=True)
class AcfCurve:
    lags: np.ndarray  # seconds
    theta: np.ndarray
    band_halfwidth: float | None = None
    n_shuffles: int = 0


@dataclasses.dataclass(frozen=True)
class SpectrumFit:
    frequencies: np.ndarray  # Hz
    power: np.ndarray
    n_segments: int
    beta: float
    beta_stderr: float
    fit_range: tuple


def pdf_histogram(values, n_bins: int = 100) -> Histogram:
    """Equal-width histogram over the range of the non-NA values."""
    if n_bins < 2:
        raise ConfigError("n_bins must be >= 2")
    x = _finite(values)
    if np.unique(x).size < 2:
        raise InsufficientDataError("histogram needs at least two distinct non-NA values")
    counts, edges = np.histogram(x, bins=n_bins, range=(x.min(), x.max()))
    density = counts / (x.size * np.diff(edges))
    return Histogram(bin_edges=edges, counts=counts, density=density, n_total=int(x.size))


def peak_mass_fraction(values, windows=PEAK_WINDOWS) -> float:
    """Fraction of non-NA values inside any of the open intervals ``windows``."""
    x = _finite(values)
    if x.size == 0:
        raise InsufficientDataError("no non-NA values")
    hit = np.zeros(x.size, dtype=bool)
    for lo, hi in windows:
        hit |= (x > lo) & (x < hi)
    return float(hit.mean())


def histogram_modes(hist: Histogram, min_prominence: float = 0.05) -> np.ndarray:
    """Centers of the local maxima of a histogram.

    A bin counts as a mode when its density stands out from the surrounding
    valleys by at least ``min_prominence`` times the highest density. Edge
    bins can be modes.
    """
    d = np.concatenate([[0.0], hist.density, [0.0]])
    peaks, _ = signal.find_peaks(d, prominence=min_prominence * hist.density.max())
    return hist.centers[peaks - 1]


def _xcorr(u, v, max_lag, nfft):
    """``r[k] = sum_t u[t] v[t + k]`` for ``k = 0..max_lag``."""
    r = np.fft.irfft(np.conj(np.fft.rfft(u, nfft)) * np.fft.rfft(v, nfft), nfft)
    return r[: max_lag + 1]


def acf(series, max_lag: int, dt: float = STEP_SECONDS) -> AcfCurve:
    """Lagged Pearson autocorrelation.

    At each lag the correlation is computed over the index pairs
    ``(t, t + lag)`` where both values are present, with the means and
    variances of that pair set. ``theta[0]`` is 1; lags with fewer than
    two valid pairs are NA. Pair sums are evaluated for all lags at once
    by FFT cross-correlation.
    """
    x = _values(series)
    if max_lag < 0 or max_lag >= x.size:
        raise ConfigError(f"max_lag must lie in [0, {x.size - 1}], got {max_lag}")
    present = ~np.isnan(x)
    ok = x[present]
    if ok.size < 2:
        raise InsufficientDataError("acf needs at least two non-NA values")
    if np.all(ok == ok[0]):
        raise DegenerateSeriesError("constant series has no autocorrelation")
    # standardize first to keep the pair-sum differences well conditioned
    z = np.where(present, (x - ok.mean()) / ok.std(), 0.0)
    o = present.astype(float)
    nfft = 1 << int(np.ceil(np.log2(x.size + max_lag + 1)))
    n = np.rint(_xcorr(o, o, max_lag, nfft))
    sa = _xcorr(z, o, max_lag, nfft)
    sb = _xcorr(o, z, max_lag, nfft)
    saa = _xcorr(z * z, o, max_lag, nfft)
    sbb = _xcorr(o, z * z, max_lag, nfft)
    sab = _xcorr(z, z, max_lag, nfft)
    with np.errstate(invalid="ignore", divide="ignore"):
        cov = sab - sa * sb / n
        va = saa - sa * sa / n
        vb = sbb - sb * sb / n
        theta = np.clip(cov / np.sqrt(va * vb), -1.0, 1.0)
    # a pair set with (numerically) zero spread on either side has no correlation;
    # z has unit variance, so FFT roundoff is of order eps * ok.size
    tiny = 1e-9 * ok.size
    theta[(n < 2) | ~(va > tiny) | ~(vb > tiny)] = np.nan
    theta[0] = 1.0
    return AcfCurve(lags=np.arange(max_lag + 1) * float(dt), theta=theta)


def shuffle_surrogate(x, rng) -> np.ndarray:
    """Permute the non-NA values, leaving NA positions where they are."""
    x = np.array(_values(x), dtype=float)
    ok = np.flatnonzero(~np.isnan(x))
    x[ok] = x[rng.permutation(ok)]
    return x


def significance_band(series, max_lag: int, n_shuffles: int = 100, rng_seed=None) -> float:
    """Half-width of the white-noise band of the autocorrelation.

    Twice the standard deviation of shuffled-surrogate autocorrelations,
    pooled over lags ``1..max_lag``, all shuffles and (if a list of series
    is given) all series.
    """
    if n_shuffles < 10:
        raise ConfigError("n_shuffles must be >= 10")
    many = isinstance(series, (list, tuple))
    seqs = list(series) if many else [series]
    rng = np.random.default_rng(rng_seed)
    pooled = []
    for s in seqs:
        acf(s, max_lag)  # validates and raises on degenerate input
        for _ in range(n_shuffles):
            th = acf(shuffle_surrogate(s, rng), max_lag).theta[1:]
            pooled.append(th[~np.isnan(th)])
    pooled = np.concatenate(pooled)
    return float(2.0 * pooled.std())


def acf_with_band(series, max_lag: int, n_shuffles: int = 100, rng_seed=None) -> AcfCurve:
    curve = acf(series, max_lag)
    band = significance_band(series, max_lag, n_shuffles, rng_seed)
    return dataclasses.replace(curve, band_halfwidth=band, n_shuffles=n_shuffles)


def segment_periodogram(series, n_segments: int = 10, dt: float = STEP_SECONDS):
    """Average periodogram over ``n_segments`` equal, non-overlapping segments.

    NA values are replaced by their segment mean and each segment is
    mean-removed. The periodogram is ``|FFT|^2 / L`` at positive
    frequencies only (Hz). A trailing remainder shorter than one segment
    is dropped.
    """
    x = _values(series)
    if n_segments < 1:
        raise ConfigError("n_segments must be >= 1")
    L = x.size // n_segments
    if L < 64:
        raise InsufficientDataError(f"segments of {L} samples are too short (need 64)")
    segs = x[: L * n_segments].reshape(n_segments, L).copy()
    for seg in segs:
        ok = ~np.isnan(seg)
        if ok.sum() < 64:
            raise InsufficientDataError("segment has fewer than 64 non-NA samples")
        seg[~ok] = seg[ok].mean()
        seg -= seg.mean()
    power = (np.abs(np.fft.rfft(segs, axis=1)) ** 2 / L).mean(axis=0)
    freqs = np.fft.rfftfreq(L, d=dt)
    return freqs[1:], power[1:]


def default_fit_range(freqs):
    """Lowest frequency up to a tenth of the highest.

    The top decade is left out because the spectrum of a sampled process
    bends away from its power law as it approaches the Nyquist frequency.
    """
    return float(freqs[0]), float(freqs[-1]) / 10.0


def fit_spectral_slope(freqs, power, fit_range=None):
    """Least-squares slope of ``log E`` against ``log f``; returns ``(beta, stderr, range)``."""
    lo, hi = fit_range if fit_range is not None else default_fit_range(freqs)
    if not lo < hi:
        raise ConfigError(f"empty fit range {fit_range}")
    m = (freqs >= lo) & (freqs <= hi) & (power > 0)
    if m.sum() < 3:
        raise InsufficientDataError("fewer than three frequencies inside the fit range")
    res = stats.linregress(np.log10(freqs[m]), np.log10(power[m]))
    return -float(res.slope), float(res.stderr), (float(lo), float(hi))


def spectrum(series, n_segments: int = 10, fit_range=None, dt: float = STEP_SECONDS) -> SpectrumFit:
    """Segment-averaged power spectrum with a power-law fit ``E ~ f^-beta``.

    Parameters
    ----------
    series : array_like
    n_segments : int
        Number of equal segments averaged.
    fit_range : (float, float), optional
        Frequency interval in Hz used for the fit; defaults to
        :func:`default_fit_range`.
    dt : float
        Sampling interval in seconds.
    """
    f, e = segment_periodogram(series, n_segments, dt)
    beta, err, rng = fit_spectral_slope(f, e, fit_range)
    return SpectrumFit(frequencies=f, power=e, n_segments=n_segments, beta=beta,
                       beta_stderr=err, fit_range=rng)


def averaged_spectrum(series_list, n_segments: int = 10, fit_range=None,
                      dt: float = STEP_SECONDS) -> SpectrumFit:
    """Average the segment spectra of several equally long series before fitting."""
    parts = [segment_periodogram(s, n_segments, dt) for s in series_list]
    f = parts[0][0]
    e = np.mean([p for _, p in parts], axis=0)
    beta, err, rng = fit_spectral_slope(f, e, fit_range)
    return SpectrumFit(frequencies=f, power=e, n_segments=n_segments, beta=beta,
                       beta_stderr=err, fit_range=rng)


def increment_moments(inc) -> dict:
    """Population mean, std, skewness and excess kurtosis over non-NA values."""
    x = _finite(inc)
    if x.size < 4:
        raise InsufficientDataError("increment_moments needs at least four non-NA values")
    return {
        "mean": float(x.mean()),
        "std": float(x.std()),
        "skewness": float(stats.skew(x, bias=True)),
        "excess_kurtosis": float(stats.kurtosis(x, fisher=True, bias=True)),
    }


def qq_pairs(a, b, n_quantiles: int = 100) -> np.ndarray:
    """Matched empirical quantiles at probabilities ``(i - 0.5) / n``.

    Returns an ``(n_quantiles, 2)`` array. Quantiles interpolate linearly
    between order statistics (Hazen convention).
    """
    xa, xb = _finite(a), _finite(b)
    if n_quantiles < 1:
        raise ConfigError("n_quantiles must be >= 1")
    if min(xa.size, xb.size) < n_quantiles:
        raise InsufficientDataError("fewer non-NA values than requested quantiles")
    p = (np.arange(1, n_quantiles + 1) - 0.5) / n_quantiles
    return np.column_stack([np.quantile(xa, p, method="hazen"),
                            np.quantile(xb, p, method="hazen")])

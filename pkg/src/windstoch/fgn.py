"""Exact sampling of fractional Gaussian noise (FGN).

Two exact samplers are provided. :func:`sample_dl` builds the sample
recursively with the Durbin-Levinson algorithm (O(n^2), the reference
path). :func:`sample_circulant` uses the Davies-Harte circulant embedding
(O(n log n), the fast path). Both return unit-variance, unit-spacing noise
with autocovariance :func:`fgn_autocovariance`.
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np

from .errors import CapacityExceededError, ConfigError

log = logging.getLogger(__name__)

DL_MAX_N = 2**15
CLAMP_TOL = 1e-10


@dataclasses.dataclass(frozen=True)
class FgnSpec:
    H: float
    n: int
    seed: int | None = None
    method: str = "circulant"

    def __post_init__(self):
        _check_hurst(self.H)
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.method not in ("durbin_levinson", "circulant"):
            raise ConfigError(f"unknown FGN method {self.method!r}")


def _check_hurst(H):
    if not 0.0 < H < 1.0:
        raise ConfigError(f"Hurst exponent must lie in (0, 1), got {H}")


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def fgn_autocovariance(H: float, k):
    """Autocovariance of unit-variance FGN at integer lag(s) ``k``.

    ``gamma(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2``
    """
    _check_hurst(H)
    k = np.abs(np.asarray(k, dtype=float))
    h2 = 2.0 * H
    g = 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)
    return float(g) if g.ndim == 0 else g


def sample_dl(H: float, n: int, seed=None, max_n: int = DL_MAX_N) -> np.ndarray:
    """Sample FGN with the Durbin-Levinson recursion.

    Each value is drawn from its exact conditional distribution given the
    past: ``x_t = sum_j phi_{t,j} x_{t-j} + sqrt(v_t) z_t``.

    Raises
    ------
    CapacityExceededError
        If ``n > max_n``; use :func:`sample_circulant` for long series.
    """
    _check_hurst(H)
    if n > max_n:
        raise CapacityExceededError(
            f"Durbin-Levinson sampling of n={n} exceeds limit {max_n}; use the circulant path"
        )
    rng = _rng(seed)
    z = rng.standard_normal(n)
    gamma = fgn_autocovariance(H, np.arange(n + 1))
    x = np.empty(n)
    x[0] = z[0]
    phi = np.zeros(n)
    v = 1.0
    for t in range(1, n):
        # reflection coefficient
        kappa = (gamma[t] - phi[: t - 1] @ gamma[t - 1 : 0 : -1]) / v
        if t > 1:
            phi[: t - 1] -= kappa * phi[t - 2 :: -1]
        phi[t - 1] = kappa
        v *= 1.0 - kappa * kappa
        x[t] = phi[:t] @ x[t - 1 :: -1] + np.sqrt(v) * z[t]
    return x


def circulant_eigenvalues(H: float, n: int):
    """Eigenvalues of the minimal power-of-two circulant embedding.

    Returns ``(lam, n_clamped)`` where tiny negative eigenvalues
    (above ``-CLAMP_TOL`` relative to the largest) have been set to zero.
    A more negative eigenvalue is returned unclamped.
    """
    m = 2
    while m < 2 * (n - 1):
        m *= 2
    half = m // 2
    g = fgn_autocovariance(H, np.arange(half + 1))
    row = np.concatenate([g, g[half - 1 : 0 : -1]])
    lam = np.fft.rfft(row).real
    lam = np.concatenate([lam, lam[-2:0:-1]])
    tol = CLAMP_TOL * max(1.0, lam.max())
    small = (lam < 0) & (lam >= -tol)
    lam = np.where(small, 0.0, lam)
    return lam, int(small.sum())


def sample_circulant(H: float, n: int, seed=None) -> np.ndarray:
    """Sample FGN by circulant embedding (Davies-Harte).

    The autocovariance is embedded in a circulant matrix whose size is the
    smallest power of two not below ``2(n - 1)``. If the embedding is not
    non-negative definite the Durbin-Levinson sampler is used instead.
    """
    _check_hurst(H)
    if n == 1:
        return _rng(seed).standard_normal(1)
    lam, clamped = circulant_eigenvalues(H, n)
    if clamped:
        log.debug("clamped %d tiny negative embedding eigenvalues (H=%g, n=%d)", clamped, H, n)
    if lam.min() < 0:
        log.warning("circulant embedding not PSD for H=%g, n=%d; using Durbin-Levinson", H, n)
        return sample_dl(H, n, seed, max_n=max(n, DL_MAX_N))
    rng = _rng(seed)
    m = lam.size
    w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    y = np.fft.fft(np.sqrt(lam / m) * w)
    return y.real[:n].copy()


def sample(spec: FgnSpec) -> np.ndarray:
    """Dispatch on ``spec.method``."""
    if spec.method == "durbin_levinson":
        return sample_dl(spec.H, spec.n, spec.seed)
    return sample_circulant(spec.H, spec.n, spec.seed)

"""Parameter estimation for the power model.

Six parameters are fixed directly from data: the potential center ``P0``,
the seasonal frequency ``omega``, the curtailment probabilities ``p_gt``/
``p_lt`` and the excess scatter ``sigma_plus``/``sigma_minus``. The
remaining ``a``, ``D`` and ``A`` are found by matching one statistic each
between data and replica-averaged simulations:

* ``D``: second Kramers-Moyal coefficient at ``P0`` (one-step increments),
* ``a``: fraction of values in the two peak windows,
* ``A``: monthly time average of the accumulated power ``E(t)``.

Every replica uses a fixed seed that is shared between candidate values,
so objectives are smooth in the parameter and results are reproducible.
"""

from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np
from scipy import optimize, stats

from .analysis import PEAK_WINDOWS, peak_mass_fraction
from .errors import ConfigError, InsufficientDataError
from .model import ModelParams, simulate
from .series import TurbineSeries

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class CalibrationConfig:
    u_minus: float = 3.0
    u_plus: float = 25.0
    peak_windows: tuple = PEAK_WINDOWS
    sigma_window: float = 200.0
    d2_halfwidth: float = 200.0
    n_replicas: int = 10
    a_grid: tuple | None = None
    a_grid_step: float = 30.0
    A_bounds: tuple = (0.0, 2.0)
    A_candidates: tuple | None = None
    mode: str = "pooled"
    seed: int = 12345

    def __post_init__(self):
        if not self.u_minus < self.u_plus:
            raise ConfigError("need u_minus < u_plus")
        if self.n_replicas < 1:
            raise ConfigError("n_replicas must be >= 1")
        if self.mode not in ("pooled", "per_month"):
            raise ConfigError(f"unknown calibration mode {self.mode!r}")


@dataclasses.dataclass(frozen=True)
class OmegaEstimate:
    omega: float
    peak_ratio: float
    dominant: bool
    source: str = "power"

    @property
    def period_steps(self) -> float:
        return 2.0 * math.pi / self.omega


@dataclasses.dataclass(frozen=True)
class SearchResult:
    value: float
    objective: float
    trace: tuple  # ((candidate, objective), ...)


@dataclasses.dataclass
class CalibrationResult:
    params: ModelParams
    fixed: dict
    optimized: dict
    diagnostics: dict = dataclasses.field(default_factory=dict)

    def to_profile(self) -> dict:
        """ModelParams-compatible dictionary, loadable by ``simulate``."""
        return self.params.to_dict()


# ----------------------------------------------------------------------
# fixed parameters


def fix_center(P_minus: float = 0.0, P_plus: float = 3600.0) -> float:
    """Center of the operating range."""
    return 0.5 * (P_minus + P_plus)


def estimate_omega(values, min_peak_ratio: float = 10.0, source: str = "power") -> OmegaEstimate:
    """Angular frequency (rad/step) of the largest periodogram amplitude.

    The zero frequency is excluded and NA values are replaced by the mean.
    ``dominant`` is False when the peak exceeds the median periodogram
    value by less than ``min_peak_ratio``.
    """
    x = np.asarray(values, dtype=float)
    ok = ~np.isnan(x)
    if ok.sum() < 2:
        raise InsufficientDataError("estimate_omega needs at least two non-NA values")
    x = np.where(ok, x, x[ok].mean()) - x[ok].mean()
    power = np.abs(np.fft.rfft(x))[1:] ** 2
    if power.size == 0:
        raise InsufficientDataError("series too short for a non-zero frequency")
    k = int(np.argmax(power)) + 1
    med = float(np.median(power))
    ratio = float(power[k - 1] / med) if med > 0 else float("inf")
    return OmegaEstimate(omega=2.0 * math.pi * k / x.size, peak_ratio=ratio,
                         dominant=ratio >= min_peak_ratio, source=source)


def month_ranges(series: TurbineSeries) -> list:
    """``(start, stop)`` index ranges of the calendar months covered."""
    months = series.timestamps.astype("datetime64[M]")
    if months.size == 0:
        return []
    cut = np.flatnonzero(months[1:] != months[:-1]) + 1
    bounds = np.concatenate([[0], cut, [months.size]])
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def fixed_ranges(n: int, length: int) -> list:
    """Consecutive blocks of ``length`` samples; a short tail is dropped."""
    return [(i, i + length) for i in range(0, n - length + 1, length)]


def estimate_p(wind_speed, u_minus: float, u_plus: float, months, min_count: int = 100):
    """Monthly fractions of wind speeds below cut-in and above cut-off.

    Returns
    -------
    p_gt, p_lt : ndarray
        One value per month range: fraction of non-NA ``u > u_plus`` and
        ``u < u_minus`` respectively.
    """
    if wind_speed is None:
        raise InsufficientDataError("wind speed unavailable; supply p_gt/p_lt explicitly")
    u = np.asarray(wind_speed, dtype=float)
    p_gt, p_lt = [], []
    for a, b in months:
        seg = u[a:b]
        seg = seg[~np.isnan(seg)]
        if seg.size < min_count:
            raise InsufficientDataError(f"month [{a}, {b}) has {seg.size} wind values (< {min_count})")
        p_gt.append(np.count_nonzero(seg > u_plus) / seg.size)
        p_lt.append(np.count_nonzero(seg < u_minus) / seg.size)
    return np.array(p_gt), np.array(p_lt)


def _truncated_sigma(dev: np.ndarray, half: float) -> float:
    """ML scale of a zero-mean normal observed only on ``[-half, half]``."""
    if not np.any(dev):
        return 0.0
    n, ss = dev.size, float(dev @ dev)

    def nll(log_s):
        s = math.exp(log_s)
        mass = stats.norm.cdf(half / s) - stats.norm.cdf(-half / s)
        return n * log_s + 0.5 * ss / s**2 + n * math.log(mass)

    rms = math.sqrt(ss / n)
    res = optimize.minimize_scalar(nll, bounds=(math.log(rms) - 3.0, math.log(rms) + 5.0),
                                   method="bounded", options={"xatol": 1e-9})
    return math.exp(res.x)


def estimate_sigma(values, P_minus: float = 0.0, P_plus: float = 3600.0,
                   window: float = 200.0, min_count: int = 50):
    """Gaussian scatter around the two range limits.

    Values within ``window`` of each limit are fitted by a normal
    distribution centered on the limit. The fit accounts for the
    truncation at the window edges.

    Returns
    -------
    sigma_plus, sigma_minus : float
    """
    x = np.asarray(values, dtype=float)
    x = x[~np.isnan(x)]
    out = []
    for level in (P_plus, P_minus):
        dev = x[np.abs(x - level) <= window] - level
        if dev.size < min_count:
            raise InsufficientDataError(f"{dev.size} values within {window} of {level} (< {min_count})")
        out.append(_truncated_sigma(dev, window))
    return tuple(out)


# ----------------------------------------------------------------------
# simulation-matched parameters


def d2_at(values, center: float, halfwidth: float = 200.0, tau: int = 1, min_count: int = 200) -> float:
    """Second Kramers-Moyal coefficient conditioned on ``|P(t) - center| <= halfwidth``.

    ``<(P(t + tau) - P(t))^2> / tau`` over pairs with both values present.
    """
    x = np.asarray(values, dtype=float)
    a, b = x[:-tau], x[tau:]
    sel = (np.abs(a - center) <= halfwidth) & ~np.isnan(b)
    if sel.sum() < min_count:
        raise InsufficientDataError(
            f"{int(sel.sum())} samples in the conditioning bin around {center} (< {min_count})"
        )
    return float(np.mean((b[sel] - a[sel]) ** 2) / tau)


def _replica_seeds(seed: int, n: int) -> list:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def _replicas(template: ModelParams, n_steps: int, seeds, step_offset: int = 0):
    for s in seeds:
        yield simulate(template.replace(seed=s), n_steps, step_offset).clipped


def _d2_sim(D, template, n_steps, seeds, halfwidth, min_count):
    vals = []
    for P in _replicas(template.replace(D=float(D)), n_steps, seeds):
        try:
            vals.append(d2_at(P, template.P0, halfwidth, min_count=min_count))
        except InsufficientDataError:
            continue
    if not vals:
        raise InsufficientDataError(f"no replica visits the conditioning bin at D={D}")
    return float(np.mean(vals))


def optimize_D(target_d2: float, template: ModelParams, n_steps: int, n_replicas: int = 10,
               seed: int = 0, bracket=None, halfwidth: float = 200.0,
               min_count: int = 20) -> SearchResult:
    """Diffusion strength whose simulated ``D2`` at ``P0`` matches ``target_d2``.

    Root of ``D2_sim(D) - target`` by Brent's method inside ``bracket``
    (default ``[0.5, 2] * sqrt(target)``, widened until it brackets).
    """
    if target_d2 < 0:
        raise ConfigError("target D2 must be non-negative")
    seeds = _replica_seeds(seed, n_replicas)
    trace = []

    def g(D):
        v = _d2_sim(D, template, n_steps, seeds, halfwidth, min_count) - target_d2
        trace.append((float(D), abs(v)))
        return v

    guess = math.sqrt(target_d2)
    lo, hi = bracket if bracket is not None else (0.5 * guess, 2.0 * guess)
    glo, ghi = g(lo), g(hi)
    for _ in range(8):
        if glo <= 0 <= ghi or ghi <= 0 <= glo:
            break
        if glo > 0:
            lo /= 2.0
            glo = g(lo)
        else:
            hi *= 2.0
            ghi = g(hi)
    else:
        best = min(trace, key=lambda t: t[1])
        log.warning("D search did not bracket the target; returning best candidate %g", best[0])
        return SearchResult(best[0], best[1], tuple(trace))
    D = optimize.brentq(g, lo, hi, xtol=1e-3 * guess + 1e-12, rtol=1e-6)
    return SearchResult(float(D), abs(g(D)), tuple(trace))


def estimate_D(values, template: ModelParams, n_replicas: int = 10, seed: int = 0,
               halfwidth: float = 200.0) -> SearchResult:
    """Empirical ``D2`` at ``P0`` followed by :func:`optimize_D`."""
    x = np.asarray(values, dtype=float)
    target = d2_at(x, template.P0, halfwidth)
    return optimize_D(target, template, x.size, n_replicas, seed, halfwidth=halfwidth)


def default_a_grid(P0: float = 1800.0, step: float = 30.0, lo: float = 605.0) -> np.ndarray:
    return np.arange(lo, P0, step)


def optimize_a(target_peak_mass: float, template: ModelParams, n_steps: int, grid=None,
               n_replicas: int = 10, seed: int = 0, windows=PEAK_WINDOWS) -> SearchResult:
    """Grid search for ``a`` matching the peak-window mass of the data.

    Ties are broken toward the larger ``a``.
    """
    grid = default_a_grid(template.P0) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ConfigError("empty grid for a")
    if np.any((grid <= 0) | (grid > template.P0)):
        raise ConfigError("grid for a must lie in (0, P0]")
    if n_replicas < 1:
        raise ConfigError("n_replicas must be >= 1")
    seeds = _replica_seeds(seed, n_replicas)
    trace = []
    for a in grid:
        sims = _replicas(template.replace(a=float(a)), n_steps, seeds)
        mass = np.mean([peak_mass_fraction(P, windows) for P in sims])
        trace.append((float(a), abs(float(mass) - target_peak_mass)))
    best = min(trace, key=lambda t: (t[1], -t[0]))
    return SearchResult(best[0], best[1], tuple(trace))


def energy_indicator(values) -> float:
    """Time average of the accumulated power ``E(t) = sum_{t' <= t} P(t')``.

    NA samples add nothing to the running sum.
    """
    x = np.asarray(values, dtype=float)
    if np.isnan(x).all():
        raise InsufficientDataError("no non-NA values")
    return float(np.mean(np.nancumsum(x)))


def optimize_A(targets, months, template: ModelParams, bounds=(0.0, 2.0), candidates=None,
               n_replicas: int = 10, seed: int = 0) -> SearchResult:
    """Seasonal forcing amplitude matching monthly energy indicators.

    Parameters
    ----------
    targets : sequence of float
        ``energy_indicator`` of each data month.
    months : sequence of (start, stop)
        Index ranges of the months; ``start`` fixes the seasonal phase.
    bounds : (float, float)
        Search interval for bounded Brent minimisation.
    candidates : sequence of float, optional
        If given, an exhaustive search over these values replaces Brent.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.size == 0 or len(months) != targets.size:
        raise InsufficientDataError("need one target per month and at least one month")
    seeds = _replica_seeds(seed, n_replicas)
    trace = []

    def objective(A):
        gaps = []
        for (start, stop), target in zip(months, targets):
            sims = _replicas(template.replace(A=float(A)), stop - start, seeds, step_offset=start)
            gaps.append(abs(np.mean([energy_indicator(P) for P in sims]) - target))
        val = float(np.mean(gaps))
        trace.append((float(A), val))
        return val

    if candidates is not None:
        for A in candidates:
            objective(A)
        best = min(trace, key=lambda t: t[1])
        return SearchResult(best[0], best[1], tuple(trace))
    res = optimize.minimize_scalar(objective, bounds=bounds, method="bounded",
                                   options={"xatol": 1e-3 * max(1.0, abs(bounds[1]))})
    return SearchResult(float(res.x), float(res.fun), tuple(trace))


# ----------------------------------------------------------------------


def calibrate(series: TurbineSeries, H: float, cfg: CalibrationConfig | None = None,
              initial: ModelParams | None = None, months=None, **fixed_overrides) -> CalibrationResult:
    """Full calibration of the model to one cleaned turbine series.

    Fixed parameters are estimated first, unless given in
    ``fixed_overrides`` (e.g. ``p_gt`` when no wind speed is recorded).
    Then ``D``, ``a`` and ``A`` are optimized in that order, each with the
    previously found values in place.

    Parameters
    ----------
    series : TurbineSeries
    H : float
        Hurst exponent of the driving noise (not estimated).
    cfg : CalibrationConfig, optional
    initial : ModelParams, optional
        Starting values for ``a``, ``D`` and ``A``.
    months : sequence of (start, stop), optional
        Month partition; defaults to calendar months of the series.
    """
    cfg = cfg or CalibrationConfig()
    P = series.power_avg
    months = month_ranges(series) if months is None else list(months)
    base = initial or ModelParams(H=H)
    P_minus, P_plus = base.P_minus, base.P_plus
    fixed, diag = {}, {}

    fixed["P0"] = fixed_overrides.pop("P0", fix_center(P_minus, P_plus))
    if "omega" in fixed_overrides:
        fixed["omega"] = fixed_overrides.pop("omega")
    else:
        source = "wind_speed" if series.wind_speed is not None else "power"
        om = estimate_omega(series.wind_speed if source == "wind_speed" else P, source=source)
        if not om.dominant:
            log.warning("no dominant seasonality found (peak ratio %.2f)", om.peak_ratio)
        fixed["omega"] = om.omega
        diag["omega"] = dataclasses.asdict(om)
    if "p_gt" in fixed_overrides and "p_lt" in fixed_overrides:
        fixed["p_gt"] = fixed_overrides.pop("p_gt")
        fixed["p_lt"] = fixed_overrides.pop("p_lt")
    else:
        p_gt, p_lt = estimate_p(series.wind_speed, cfg.u_minus, cfg.u_plus, months)
        diag["p_gt_monthly"], diag["p_lt_monthly"] = p_gt.tolist(), p_lt.tolist()
        fixed["p_gt"], fixed["p_lt"] = float(p_gt.mean()), float(p_lt.mean())
    if "sigma_plus" in fixed_overrides and "sigma_minus" in fixed_overrides:
        fixed["sigma_plus"] = fixed_overrides.pop("sigma_plus")
        fixed["sigma_minus"] = fixed_overrides.pop("sigma_minus")
    else:
        fixed["sigma_plus"], fixed["sigma_minus"] = estimate_sigma(P, P_minus, P_plus, cfg.sigma_window)
    if fixed_overrides:
        raise ConfigError(f"unsupported overrides: {sorted(fixed_overrides)}")

    params = base.replace(H=H, **fixed)
    n = P.size

    d2_emp = d2_at(P, params.P0, cfg.d2_halfwidth)
    D_res = optimize_D(d2_emp, params, n, cfg.n_replicas, cfg.seed, halfwidth=cfg.d2_halfwidth)
    params = params.replace(D=D_res.value)
    diag["D2_empirical"] = d2_emp
    diag["D_trace"] = D_res.trace

    grid = cfg.a_grid if cfg.a_grid is not None else default_a_grid(params.P0, cfg.a_grid_step)
    target_mass = peak_mass_fraction(P, cfg.peak_windows)
    a_res = optimize_a(target_mass, params, n, grid, cfg.n_replicas, cfg.seed + 1, cfg.peak_windows)
    params = params.replace(a=a_res.value)
    diag["peak_mass_empirical"] = target_mass
    diag["a_trace"] = a_res.trace

    targets = [energy_indicator(P[a:b]) for a, b in months]
    if cfg.mode == "pooled":
        A_res = optimize_A(targets, months, params, cfg.A_bounds, cfg.A_candidates,
                           cfg.n_replicas, cfg.seed + 2)
        params = params.replace(A=A_res.value)
        diag["A_trace"] = A_res.trace
        A_out = A_res.value
    else:
        per_month = [optimize_A([t], [m], params, cfg.A_bounds, cfg.A_candidates,
                                cfg.n_replicas, cfg.seed + 2).value for t, m in zip(targets, months)]
        A_out = per_month
        params = params.replace(A=float(np.mean(per_month)))
    diag["E_empirical"] = targets

    return CalibrationResult(params=params, fixed=fixed,
                             optimized={"a": a_res.value, "D": D_res.value, "A": A_out},
                             diagnostics=diag)

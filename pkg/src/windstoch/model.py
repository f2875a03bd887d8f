"""Bistable Langevin model of turbine power with curtailment clipping.

The latent state follows an Euler-Maruyama discretisation on the 10-minute
grid (one step = one time unit)::

    x[t+1] = x[t] + drift(x[t]) + A cos(omega t) + D xi[t]

where ``drift`` is the double-well force ``-y**3 + y`` with
``y = (x - P0) / a`` and ``xi`` is unit-variance fractional Gaussian noise.
The observed power is a readout of the state: inside
``[P_minus, P_plus]`` it equals the state; beyond ``P_plus`` it is pinned to
``P_plus`` with probability ``1 - p_gt`` and set to ``P_plus + z``,
``z ~ N(0, sigma_plus)``, otherwise (mirrored at ``P_minus``). The state
itself is never reset by the clipping.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt
import math

import numpy as np

from . import fgn
from .errors import ConfigError
from .series import TurbineSeries, as_utc

# Curtailment defaults follow a Weibull(k=2, scale=10 m/s) wind climate with
# 3 m/s cut-in and 25 m/s cut-off: P(u < 3) and P(u > 25).
_P_LT_DEFAULT = 1.0 - math.exp(-((3.0 / 10.0) ** 2))
_P_GT_DEFAULT = math.exp(-((25.0 / 10.0) ** 2))

TABLE1 = {
    0.5: {"a": 1755.0, "D": 355.0, "A": 0.15},
    0.7: {"a": 1445.0, "D": 360.0, "A": 0.17},
    0.9: {"a": 1235.0, "D": 485.0, "A": 0.26},
}

MONTH_STEPS = 4320
YEAR_STEPS = 52560


@dataclasses.dataclass(frozen=True)
class ModelParams:
    """Parameters of the power model.

    Units are per 10-minute step: ``D`` scales one unit-variance noise
    value per step, ``A`` is a per-step drift in kW and ``omega`` is in
    rad/step.
    """

    H: float = 0.9
    a: float = 1235.0
    D: float = 485.0
    A: float = 0.26
    P0: float = 1800.0
    omega: float = 2.0 * math.pi / MONTH_STEPS
    p_gt: float = _P_GT_DEFAULT
    p_lt: float = _P_LT_DEFAULT
    sigma_plus: float = 68.93
    sigma_minus: float = 4.47
    P_minus: float = 0.0
    P_plus: float = 3600.0
    seed: int | None = 0
    t_start: _dt.datetime = _dt.datetime(2014, 3, 1, tzinfo=_dt.timezone.utc)
    burn_in: int = 0
    fgn_method: str = "circulant"

    def __post_init__(self):
        object.__setattr__(self, "t_start", as_utc(self.t_start))
        if not 0.0 < self.H < 1.0:
            raise ConfigError(f"H must lie in (0, 1), got {self.H}")
        if not self.a > 0:
            raise ConfigError(f"a must be positive, got {self.a}")
        if self.D < 0:
            raise ConfigError(f"D must be non-negative, got {self.D}")
        for name in ("p_gt", "p_lt"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.sigma_plus < 0 or self.sigma_minus < 0:
            raise ConfigError("sigma_plus and sigma_minus must be non-negative")
        if not self.P_minus < self.P0 < self.P_plus:
            raise ConfigError("need P_minus < P0 < P_plus")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be non-negative")
        if self.fgn_method not in ("circulant", "durbin_levinson"):
            raise ConfigError(f"unknown fgn_method {self.fgn_method!r}")

    @classmethod
    def table1(cls, H: float, **overrides) -> "ModelParams":
        """Published parameter set for ``H`` in {0.5, 0.7, 0.9}."""
        try:
            row = TABLE1[round(float(H), 3)]
        except KeyError:
            raise ConfigError(f"no tabulated parameters for H={H}") from None
        return cls(H=float(H), **{**row, **overrides})

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["t_start"] = self.t_start.isoformat().replace("+00:00", "Z")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown model parameters: {sorted(unknown)}")
        return cls(**d)


@dataclasses.dataclass(frozen=True, eq=False)
class SimulatedSeries:
    params: ModelParams
    raw: np.ndarray
    clipped: np.ndarray
    excess: np.ndarray  # True where the scattered (beyond-range) branch fired

    def __len__(self) -> int:
        return self.clipped.size

    def to_turbine_series(self, turbine_id: str = "sim") -> TurbineSeries:
        return TurbineSeries(turbine_id=turbine_id, t0=self.params.t_start, power_avg=self.clipped)


def potential(P, params: ModelParams):
    """Double-well potential ``y^4/4 - y^2/2`` with ``y = (P - P0)/a``."""
    y = (np.asarray(P, dtype=float) - params.P0) / params.a
    return y**4 / 4.0 - y**2 / 2.0


def drift(P, params: ModelParams):
    """Deterministic double-well force ``-y^3 + y`` (kW per step)."""
    y = (np.asarray(P, dtype=float) - params.P0) / params.a
    return -(y**3) + y


def seasonal_force(t, params: ModelParams):
    """``A cos(omega t)`` with ``t`` counted in steps from ``params.t_start``."""
    return params.A * np.cos(params.omega * np.asarray(t, dtype=float))


def _streams(seed):
    ss = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(3)]


def integrate(x0: float, noise: np.ndarray, params: ModelParams, step_offset: int = 0) -> np.ndarray:
    """Euler-Maruyama path of the latent state.

    ``noise`` holds the unit-variance FGN values; the path has
    ``len(noise) + 1`` points starting at ``x0``.
    """
    n = noise.size
    force = params.A * np.cos(params.omega * (step_offset + np.arange(n)))
    kick = force + params.D * noise
    P0, inv_a = params.P0, 1.0 / params.a
    x = np.empty(n + 1)
    x[0] = xt = float(x0)
    # sequential by nature; plain floats keep this loop fast
    for t, k in enumerate(kick.tolist()):
        y = (xt - P0) * inv_a
        xt = xt + (y - y * y * y) + k
        x[t + 1] = xt
    return x


def clip(raw: np.ndarray, params: ModelParams, rng: np.random.Generator):
    """Curtailment readout; returns ``(clipped, excess_mask)``."""
    P = raw.copy()
    excess = np.zeros(raw.size, dtype=bool)
    u = rng.random(raw.size)
    z = rng.standard_normal(raw.size)
    for beyond, level, p, sigma in (
        (raw > params.P_plus, params.P_plus, params.p_gt, params.sigma_plus),
        (raw < params.P_minus, params.P_minus, params.p_lt, params.sigma_minus),
    ):
        scatter = beyond & (u < p)
        P[beyond] = level
        P[scatter] = level + sigma * z[scatter]
        excess |= scatter
    return P, excess


def simulate(params: ModelParams, n_steps: int, step_offset: int = 0) -> SimulatedSeries:
    """Simulate ``n_steps`` samples of the model.

    The start value is one of the two wells ``P0 -/+ a``, chosen at random.
    ``params.burn_in`` extra steps are simulated first and discarded.
    ``step_offset`` shifts the phase of the seasonal force. The output is a
    deterministic function of ``params``, ``n_steps`` and ``step_offset``.
    """
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    init_rng, noise_rng, clip_rng = _streams(params.seed)
    x0 = params.P0 + params.a * (1.0 if init_rng.random() < 0.5 else -1.0)
    total = n_steps + params.burn_in
    if total > 1:
        spec = fgn.FgnSpec(H=params.H, n=total - 1, seed=noise_rng, method=params.fgn_method)
        noise = fgn.sample(spec)
    else:
        noise = np.empty(0)
    raw = integrate(x0, noise, params, step_offset - params.burn_in)[params.burn_in:]
    clipped, excess = clip(raw, params, clip_rng)
    for arr in (raw, clipped, excess):
        arr.setflags(write=False)
    return SimulatedSeries(params=params, raw=raw, clipped=clipped, excess=excess)


def transition_stats(series) -> dict:
    """Well transitions of a power path.

    A sample belongs to the upper well when ``P >= P0`` and to the lower
    one otherwise. Returns the number of well changes and the mean
    residence time (in steps) for each well.
    """
    if isinstance(series, SimulatedSeries):
        P, P0 = series.clipped, series.params.P0
    else:
        P, P0 = series
        P = np.asarray(P, dtype=float)
    if P.size < 2:
        raise ConfigError("transition_stats needs at least two samples")
    upper = P >= P0
    change = np.flatnonzero(upper[1:] != upper[:-1])
    bounds = np.concatenate([[0], change + 1, [P.size]])
    lengths = np.diff(bounds)
    run_upper = upper[bounds[:-1]]

    def mean_or_nan(v):
        return float(v.mean()) if v.size else float("nan")

    return {
        "n_transitions": int(change.size),
        "mean_residence_upper": mean_or_nan(lengths[run_upper]),
        "mean_residence_lower": mean_or_nan(lengths[~run_upper]),
        "occupancy_upper": float(upper.mean()),
    }

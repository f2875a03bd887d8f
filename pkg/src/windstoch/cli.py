"""Command line interface.

Subcommands::

    windstoch cleanse   INPUT --out DIR
    windstoch analyze   INPUT --out DIR --seed N
    windstoch dfa       INPUT --out DIR
    windstoch simulate  --out FILE --seed N (--hurst H | --profile JSON)
    windstoch calibrate INPUT --hurst H --out FILE --seed N
    windstoch compare   REAL SIM --out FILE

Options may also come from a JSON file given with ``--config``; keys are
the long option names with underscores. Command line values win.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure (e.g. insufficient data).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import analysis, calibration, cleansing, dfa, io, model
from .errors import ConfigError, DataError, InsufficientDataError, WindStochError
from .series import increments, standardize

log = logging.getLogger("windstoch")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULTS = {
    "xi0": 0.67,
    "q": 0.99,
    "rated_power": 3600.0,
    "precision_digits": 5,
    "max_lag": 1008,
    "n_bins": 100,
    "n_segments": 10,
    "n_shuffles": 100,
    "fit_range": None,
    "m": 2,
    "scales": None,
    "dfa_fit_range": None,
    "steps": model.MONTH_STEPS,
    "hurst": None,
    "profile": None,
    "turbine_id": "sim",
    "n_replicas": 10,
    "mode": "pooled",
    "n_quantiles": 100,
    "p_gt": None,
    "p_lt": None,
    "omega": None,
    "seed": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _common(p, out_help="output directory"):
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--out", required=True, help=out_help)
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="windstoch", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cleanse", help="invalidate implausible records")
    p.add_argument("input")
    _common(p)
    p.add_argument("--xi0", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--rated-power", type=float)
    p.add_argument("--precision-digits", type=int)

    p = sub.add_parser("analyze", help="PDF, ACF, spectrum and increment statistics")
    p.add_argument("input")
    _common(p)
    p.add_argument("--max-lag", type=int)
    p.add_argument("--n-bins", type=int)
    p.add_argument("--n-segments", type=int)
    p.add_argument("--n-shuffles", type=int)
    p.add_argument("--fit-range", type=float, nargs=2, metavar=("F_LO", "F_HI"),
                   help="spectral fit range in Hz")

    p = sub.add_parser("dfa", help="detrended fluctuation analysis")
    p.add_argument("input")
    _common(p)
    p.add_argument("--m", type=int, help="detrending order")
    p.add_argument("--scales", type=int, nargs="+")
    p.add_argument("--dfa-fit-range", type=int, nargs=2, metavar=("S_LO", "S_HI"))

    p = sub.add_parser("simulate", help="simulate the power model")
    _common(p, "output CSV file")
    p.add_argument("--hurst", type=float, help="use the tabulated parameters for this H")
    p.add_argument("--profile", help="ModelParams JSON profile")
    p.add_argument("--steps", type=int)
    p.add_argument("--turbine-id")

    p = sub.add_parser("calibrate", help="estimate model parameters")
    p.add_argument("input")
    _common(p, "output profile JSON")
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--turbine-id")
    p.add_argument("--n-replicas", type=int)
    p.add_argument("--mode", choices=["pooled", "per_month"])
    p.add_argument("--p-gt", type=float)
    p.add_argument("--p-lt", type=float)
    p.add_argument("--omega", type=float)

    p = sub.add_parser("compare", help="compare a real and a simulated series")
    p.add_argument("real")
    p.add_argument("sim")
    _common(p, "output JSON report")
    p.add_argument("--max-lag", type=int)
    p.add_argument("--n-bins", type=int)
    p.add_argument("--n-segments", type=int)
    p.add_argument("--n-quantiles", type=int)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, the ``--config`` file and command line values."""
    cfg = dict(DEFAULTS)
    if args.config:
        if not os.path.isfile(args.config):
            raise ConfigError(f"config file not found: {args.config}")
        with open(args.config) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config}: {exc}") from None
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"{args.config}: unknown keys {sorted(unknown)}")
        cfg.update(data)
    for key, val in vars(args).items():
        if key in DEFAULTS and val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    return cfg


def _need_seed(cfg):
    if cfg["seed"] is None:
        raise ConfigError(f"{cfg['command']} is stochastic: --seed is required")


def _load(path):
    if not os.path.isfile(path):
        raise ConfigError(f"input not found: {path}")
    series, report = io.read_turbines(path)
    log.info("%s: %d rows, %d turbines", path, report.rows_parsed, len(series))
    return series


def _single(series: dict, turbine_id=None):
    if turbine_id is not None:
        if turbine_id not in series:
            raise DataError(f"turbine {turbine_id!r} not in input")
        return series[turbine_id]
    if len(series) != 1:
        raise ConfigError("input holds several turbines; choose one with --turbine-id")
    return next(iter(series.values()))


def cmd_cleanse(args, cfg):
    series = _load(args.input)
    ccfg = cleansing.CleansingConfig(xi0=cfg["xi0"], q=cfg["q"], rated_power=cfg["rated_power"],
                                     precision_digits=cfg["precision_digits"])
    cleaned, reports = [], {}
    for tid, s in series.items():
        c, rep = cleansing.cleanse(s, ccfg)
        cleaned.append(c)
        reports[tid] = rep.to_dict()
    io.write_turbines(os.path.join(args.out, "cleaned.csv"), cleaned)
    io.write_report(os.path.join(args.out, "cleansing_report.json"), {"turbines": reports}, cfg)


def cmd_analyze(args, cfg):
    _need_seed(cfg)
    series = _load(args.input)
    summary = {}
    fit_range = tuple(cfg["fit_range"]) if cfg["fit_range"] else None
    for tid, s in series.items():
        p = s.power_avg
        hist = analysis.pdf_histogram(p, cfg["n_bins"])
        curve = analysis.acf_with_band(p, min(cfg["max_lag"], len(s) - 1), cfg["n_shuffles"], cfg["seed"])
        spec = analysis.spectrum(p, cfg["n_segments"], fit_range)
        inc = standardize(increments(s))
        ihist = analysis.pdf_histogram(inc.standardized, cfg["n_bins"])
        base = os.path.join(args.out, tid)
        io.write_columns(base + "_pdf.csv", {"bin_left_kw": hist.bin_edges[:-1],
                                             "bin_right_kw": hist.bin_edges[1:],
                                             "count": hist.counts, "density_per_kw": hist.density})
        io.write_columns(base + "_acf.csv", {"lag_s": curve.lags, "theta": curve.theta})
        io.write_columns(base + "_spectrum.csv", {"frequency_hz": spec.frequencies, "power": spec.power})
        io.write_columns(base + "_increments_pdf.csv", {"bin_left": ihist.bin_edges[:-1],
                                                        "bin_right": ihist.bin_edges[1:],
                                                        "count": ihist.counts, "density": ihist.density})
        summary[tid] = {
            "n": len(s),
            "na_fraction": s.na_fraction,
            "peak_mass_fraction": analysis.peak_mass_fraction(p),
            "acf_band_halfwidth": curve.band_halfwidth,
            "n_shuffles": curve.n_shuffles,
            "spectrum": {"beta": spec.beta, "beta_stderr": spec.beta_stderr,
                         "fit_range_hz": spec.fit_range, "n_segments": spec.n_segments},
            "increments": analysis.increment_moments(inc.standardized),
            "increment_mean_kw": inc.mean,
            "increment_std_kw": inc.std,
        }
    io.write_report(os.path.join(args.out, "summary.json"), {"turbines": summary}, cfg, cfg["seed"])


def cmd_dfa(args, cfg):
    series = _load(args.input)
    out = {}
    for tid, s in series.items():
        curve = dfa.fluctuation(s.power_avg, cfg["scales"], cfg["m"])
        single = dfa.fit_alpha(curve, cfg["dfa_fit_range"])
        entry = {"fit": single.to_dict(), "dropped_scales": curve.dropped_scales, "m": curve.m}
        try:
            entry["crossover"] = dfa.fit_crossover(curve).to_dict()
        except InsufficientDataError as exc:
            entry["crossover"] = None
            log.warning("%s: %s", tid, exc)
        out[tid] = entry
        io.write_columns(os.path.join(args.out, f"{tid}_fluctuation.csv"),
                         {"scale": curve.scales, "F": curve.F, "n_segments": curve.n_segments_used})
    io.write_report(os.path.join(args.out, "dfa.json"), {"turbines": out}, cfg)


def _params_from_cfg(cfg) -> model.ModelParams:
    if cfg["profile"]:
        if not os.path.isfile(cfg["profile"]):
            raise ConfigError(f"profile not found: {cfg['profile']}")
        with open(cfg["profile"]) as fh:
            data = json.load(fh)
        data = data.get("params", data)
        params = model.ModelParams.from_dict(data)
    elif cfg["hurst"] is not None:
        params = model.ModelParams.table1(cfg["hurst"])
    else:
        raise ConfigError("simulate needs --hurst or --profile")
    return params.replace(seed=cfg["seed"])


def cmd_simulate(args, cfg):
    _need_seed(cfg)
    params = _params_from_cfg(cfg)
    sim = model.simulate(params, cfg["steps"])
    io.write_turbines(args.out, sim.to_turbine_series(cfg["turbine_id"]))


def cmd_calibrate(args, cfg):
    _need_seed(cfg)
    series = _single(_load(args.input), args.turbine_id)
    overrides = {k: cfg[k] for k in ("p_gt", "p_lt", "omega") if cfg[k] is not None}
    ccfg = calibration.CalibrationConfig(n_replicas=cfg["n_replicas"], mode=cfg["mode"], seed=cfg["seed"])
    res = calibration.calibrate(series, cfg["hurst"], ccfg, **overrides)
    params = res.params.replace(seed=cfg["seed"])
    io.write_report(args.out, {"params": params.to_dict(), "fixed": res.fixed,
                               "optimized": res.optimized, "diagnostics": res.diagnostics},
                    cfg, cfg["seed"])


def compare_series(real, sim, max_lag=1008, n_bins=100, n_segments=10, n_quantiles=100) -> dict:
    """Side-by-side statistics of two power series."""
    real, sim = np.asarray(real, dtype=float), np.asarray(sim, dtype=float)
    inc_r = standardize(increments(real)).standardized
    inc_s = standardize(increments(sim)).standardized
    qq = analysis.qq_pairs(inc_r, inc_s, n_quantiles)
    lag = min(max_lag, real.size - 1, sim.size - 1)
    acf_r = analysis.acf(real, lag).theta
    acf_s = analysis.acf(sim, lag).theta
    both = np.concatenate([real[~np.isnan(real)], sim[~np.isnan(sim)]])
    edges = np.linspace(both.min(), both.max(), n_bins + 1)
    dens = [np.histogram(x[~np.isnan(x)], edges, density=True)[0] for x in (real, sim)]
    spec_r = analysis.spectrum(real, n_segments)
    spec_s = analysis.spectrum(sim, n_segments)
    return {
        "qq_max_abs_deviation": float(np.max(np.abs(qq[:, 0] - qq[:, 1]))),
        "qq_pairs": qq,
        "acf_max_abs_difference": float(np.nanmax(np.abs(acf_r - acf_s))),
        "pdf_l1_distance": float(np.sum(np.abs(dens[0] - dens[1]) * np.diff(edges))),
        "beta_real": spec_r.beta,
        "beta_sim": spec_s.beta,
        "beta_difference": spec_s.beta - spec_r.beta,
        "mean_real_kw": float(np.nanmean(real)),
        "mean_sim_kw": float(np.nanmean(sim)),
    }


def cmd_compare(args, cfg):
    real = _single(_load(args.real)).power_avg
    sim = _single(_load(args.sim)).power_avg
    report = compare_series(real, sim, cfg["max_lag"], cfg["n_bins"], cfg["n_segments"], cfg["n_quantiles"])
    io.write_report(args.out, report, cfg, cfg["seed"])


COMMANDS = {
    "cleanse": cmd_cleanse,
    "analyze": cmd_analyze,
    "dfa": cmd_dfa,
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        cfg = resolve(args)
        COMMANDS[args.command](args, cfg)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"windstoch: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientDataError as exc:
        print(f"windstoch: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, WindStochError) as exc:
        print(f"windstoch: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: stats, synthesize, propagate, coverage, mc-validate, report.
Exit codes: 0 on success, 1 for input or parse problems, 2 when a numerical
contract is violated (degenerate geometry, non-PSD covariance, chain failure).
"""

import argparse
import dataclasses
import sys

import numpy as np

from .channel import CONFIG_KINDS, make_config
from .complexprop import propagate_full_chain
from .coverage import (
    annulus_from,
    coverage_probability,
    ellipse_from,
    region_area,
)
from .dataio import (
    FlightLogError,
    RunSettings,
    format_float,
    load_config,
    load_flight_log,
    preprocess,
    synthesize_series,
    write_flight_log,
)
from .experiment import REGION_KINDS, emit_report, run_experiment
from .geometry import default_scenario
from .gumstats import stats_per_angle
from .lpu import AngleUncertainty
from .montecarlo import McConfig, validate_propagation
from .seeding import STREAM_CONFIG, philox_generator


class _InputError(Exception):
    """Wrapper marking a failure as an input problem (exit code 1)."""


# non-string sentinel: argparse type-converts string defaults
_UNSET = object()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # bad flags are input errors; argparse would exit 2 otherwise
        self.exit(1, f"{self.prog}: error: {message}\n")


def _window_value(text):
    return None if text == "full" else float(text)


def _add_series_flags(p):
    p.add_argument("--input", required=True, help="flight log to ingest")
    p.add_argument("--trim-seconds", type=float, default=None)
    p.add_argument("--window-seconds", type=_window_value, default=_UNSET,
                   help="seconds, or 'full' for everything after the trim")


def _add_scenario_flags(p):
    p.add_argument("--scenario", default=None, help="TOML scenario/run file")
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="risprop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="per-angle mean and spread of a log")
    _add_series_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_stats, trim_default=0.0, window_default=None)

    p = sub.add_parser("synthesize", help="generate a synthetic error log")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--rate", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mean", type=float, nargs=3, default=(0.23, 0.22, -0.06),
                   metavar=("ROLL", "PITCH", "YAW"))
    p.add_argument("--std", type=float, nargs=3, default=(0.49, 0.48, 0.18),
                   metavar=("ROLL", "PITCH", "YAW"))
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("propagate", help="channel estimate and covariance at the mean attitude")
    _add_scenario_flags(p)
    _add_series_flags(p)
    p.add_argument("--config", choices=CONFIG_KINDS, default="optimized")
    p.set_defaults(func=_cmd_propagate)

    p = sub.add_parser("coverage", help="coverage region at the mean attitude")
    _add_scenario_flags(p)
    _add_series_flags(p)
    p.add_argument("--config", choices=CONFIG_KINDS, default="optimized")
    p.add_argument("--region", choices=REGION_KINDS, default="ellipse")
    p.add_argument("--k", type=float, default=None)
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("mc-validate", help="propagated covariance against sampling")
    _add_scenario_flags(p)
    _add_series_flags(p)
    p.add_argument("--config", choices=CONFIG_KINDS, default="optimized")
    p.add_argument("--mc-samples", type=int, default=None)
    p.set_defaults(func=_cmd_mc_validate)

    p = sub.add_parser("report", help="full evaluation run emitted to a directory")
    _add_scenario_flags(p)
    _add_series_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--config", choices=CONFIG_KINDS, action="append", default=None,
                   help="repeatable; default off, random, optimized")
    p.add_argument("--region", choices=REGION_KINDS, action="append", default=None)
    p.add_argument("--k", type=float, default=None,
                   help="override for the chosen --region kinds")
    p.add_argument("--mc-samples", type=int, default=None, help="0 disables calibration")
    p.set_defaults(func=_cmd_report)
    return parser


def _load_setup(args):
    if args.scenario is not None:
        try:
            scenario, settings = load_config(args.scenario)
        except OSError as e:
            raise _InputError(str(e)) from e
    else:
        scenario, settings = default_scenario(), RunSettings()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trim_seconds is not None:
        overrides["trim_seconds"] = args.trim_seconds
    if args.window_seconds is not _UNSET:
        overrides["window_seconds"] = args.window_seconds
    if getattr(args, "mc_samples", None) is not None:
        overrides["mc_samples"] = args.mc_samples
    if overrides:
        settings = dataclasses.replace(settings, **overrides)
    return scenario, settings


def _read_series(args, settings):
    try:
        series = load_flight_log(args.input)
        return preprocess(
            series, settings.trim_seconds, settings.window_seconds, settings.seed
        )
    except (FlightLogError, OSError, ValueError) as e:
        raise _InputError(str(e)) from e


def _cmd_stats(args):
    settings = RunSettings(
        seed=args.seed if args.seed is not None else 0,
        trim_seconds=args.trim_seconds if args.trim_seconds is not None else 0.0,
        window_seconds=args.window_seconds if args.window_seconds is not _UNSET else None,
    )
    series = _read_series(args, settings)
    print("angle,n,mean_deg,std_deg,std_of_mean_deg")
    for name, s in zip(("roll", "pitch", "yaw"), stats_per_angle(series)):
        print(
            f"{name},{s.n},{format_float(s.mean)},{format_float(s.std)},"
            f"{format_float(s.std_of_mean)}"
        )
    return 0


def _cmd_synthesize(args):
    if args.n < 2 or args.rate <= 0 or any(s < 0 for s in args.std):
        raise _InputError("need n >= 2, a positive rate, and nonnegative stds")
    series = synthesize_series(
        list(zip(args.mean, args.std)), n=args.n, rate=args.rate, seed=args.seed
    )
    try:
        write_flight_log(args.out, series)
    except OSError as e:
        raise _InputError(str(e)) from e
    print(f"wrote {args.out} ({args.n} samples at {format_float(args.rate)} Hz)")
    return 0


def _estimate_at_mean(args, scenario, settings):
    """Mean-attitude uncertain channel shared by propagate/coverage/mc-validate."""
    series = _read_series(args, settings)
    stats = stats_per_angle(series)
    mean_deg = np.array([s.mean for s in stats])
    if settings.bias_correction:
        mean_deg = np.zeros(3)
    attitude = np.radians(mean_deg)
    if settings.angle_uncertainty_source == "of_mean":
        stds = [s.std_of_mean for s in stats]
    else:
        stds = [s.std for s in stats]
    unc = AngleUncertainty.from_std_degrees(*stds)
    if args.config == "random":
        rng = philox_generator(settings.seed, STREAM_CONFIG)
        config = make_config("random", scenario, attitude, seed=rng)
    else:
        config = make_config(args.config, scenario, attitude)
    return series, stats, attitude, unc, config


def _print_kv(pairs):
    for key, value in pairs:
        print(f"{key},{value}")


def _cmd_propagate(args):
    scenario, settings = _load_setup(args)
    _, _, attitude, unc, config = _estimate_at_mean(args, scenario, settings)
    total = propagate_full_chain(scenario, attitude, unc, config).total
    _print_kv(
        [
            ("config", args.config),
            ("attitude_deg", ";".join(format_float(x) for x in np.degrees(attitude))),
            ("value_re", format_float(total.value.real)),
            ("value_im", format_float(total.value.imag)),
            ("u11", format_float(total.cov.u11)),
            ("u12", format_float(total.cov.u12)),
            ("u22", format_float(total.cov.u22)),
        ]
    )
    return 0


def _cmd_coverage(args):
    scenario, settings = _load_setup(args)
    _, _, attitude, unc, config = _estimate_at_mean(args, scenario, settings)
    total = propagate_full_chain(scenario, attitude, unc, config).total
    k = args.k
    if k is None:
        k = settings.k_ellipse if args.region == "ellipse" else settings.k_annulus
    pairs = [("region", args.region), ("k", format_float(k))]
    if args.region == "ellipse":
        region = ellipse_from(total, k)
        pairs += [
            ("center_re", format_float(region.center.real)),
            ("center_im", format_float(region.center.imag)),
            ("u11", format_float(region.cov.u11)),
            ("u12", format_float(region.cov.u12)),
            ("u22", format_float(region.cov.u22)),
        ]
    else:
        region = annulus_from(total, k)
        pairs += [
            ("r0", format_float(region.r0)),
            ("dr", format_float(region.dr)),
            ("theta0", format_float(region.theta0)),
            ("dtheta", format_float(region.dtheta)),
        ]
    pairs += [
        ("area", format_float(region_area(region))),
        ("coverage_probability", format_float(coverage_probability(k))),
    ]
    _print_kv(pairs)
    return 0


def _cmd_mc_validate(args):
    scenario, settings = _load_setup(args)
    _, stats, attitude, _, config = _estimate_at_mean(args, scenario, settings)
    mc = McConfig(
        settings.mc_samples,
        settings.seed,
        stds_deg=[s.std for s in stats],
    )
    result = validate_propagation(scenario, attitude, config, mc)
    pairs = [("config", args.config), ("sample_count", str(result.sample_count))]
    for label, cov in (
        ("propagated", result.propagated),
        ("coupled", result.coupled),
        ("sampled", result.sampled),
    ):
        pairs += [
            (f"{label}_u11", format_float(cov.u11)),
            (f"{label}_u12", format_float(cov.u12)),
            (f"{label}_u22", format_float(cov.u22)),
        ]
    pairs += [
        ("gap_propagated", format_float(result.gap_propagated)),
        ("gap_coupled", format_float(result.gap_coupled)),
    ]
    _print_kv(pairs)
    return 0


def _cmd_report(args):
    scenario, settings = _load_setup(args)
    series = _read_series(args, settings)
    config_kinds = tuple(args.config) if args.config else settings.config_kinds
    region_kinds = tuple(args.region) if args.region else REGION_KINDS
    k_values = {"ellipse": settings.k_ellipse, "annulus": settings.k_annulus}
    if args.k is not None:
        for kind in region_kinds:
            k_values[kind] = args.k
    mc = None
    if settings.mc_samples > 0:
        mc = McConfig(settings.mc_samples, settings.seed, stds_deg=(0.0, 0.0, 0.0))
    report = run_experiment(
        scenario,
        series,
        config_kinds=config_kinds,
        region_kinds=region_kinds,
        k_values=k_values,
        mc=mc,
        seed=settings.seed,
        angle_uncertainty_source=settings.angle_uncertainty_source,
        bias_correction=settings.bias_correction,
    )
    paths = emit_report(report, args.out)
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    print("config,region,k,success_rate,mean_area,empirical_coverage")
    for a in report.aggregates:
        print(
            f"{a.config_kind},{a.region_kind},{format_float(a.k)},"
            f"{format_float(a.success_rate)},{format_float(a.mean_area)},"
            f"{format_float(a.empirical_coverage)}"
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except _InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (FlightLogError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # numerical contract violations from the library
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

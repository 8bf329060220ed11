"""End-to-end evaluation on an orientation-error series.

Per time step the platform truly hovers at zero attitude while the estimator
reports the logged error, so the estimate is the error itself. Each
configuration is built from the estimated attitude, the channel estimate and
its covariance are propagated at that attitude, and the ground truth is the
exact model at the true attitude under the same configuration. A step
succeeds when the truth falls inside the region drawn around the estimate.
"""

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from . import _kernels
from .channel import CONFIG_KINDS, make_config
from .complexprop import Covariance2, UncertainComplex, propagate_full_chain
from .coverage import (
    DegenerateRegionError,
    annulus_from,
    ellipse_from,
    region_area,
    region_contains,
)
from .dataio import OrientationErrorSeries, format_float
from .geometry import Scenario, distances
from .gumstats import stats_per_angle
from .lpu import AngleUncertainty
from .montecarlo import McConfig, empirical_coverage, sample_truths
from .seeding import STREAM_CONFIG, philox_generator

REGION_KINDS = ("ellipse", "annulus")
DEFAULT_K = {"ellipse": 2.0, "annulus": 2.24}


class ExperimentError(RuntimeError):
    """A stage failed at one time step; carries the step index and timestamp."""

    def __init__(self, step: int, time_s: float, cause: Exception):
        super().__init__(f"step {step} (t = {format_float(time_s)} s): {cause}")
        self.step = step
        self.time_s = time_s


@dataclass(frozen=True, eq=False)
class PointRow:
    """One scored time step for one configuration kind and one region kind."""

    step: int
    time_s: float
    config_kind: str
    region_kind: str
    k: float
    estimate: complex
    cov: Covariance2
    gt: complex
    region: object
    area: float
    success: Optional[bool]


@dataclass(frozen=True, eq=False)
class ComboAggregate:
    """Success statistics of one (configuration, region) combination."""

    config_kind: str
    region_kind: str
    k: float
    n_points: int
    n_scored: int
    success_rate: float
    mean_area: float
    empirical_coverage: float


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    rows: Tuple[PointRow, ...]
    aggregates: Tuple[ComboAggregate, ...]
    meta: Dict[str, str]


def aggregates_from_rows(rows, empirical=None):
    """Group rows by (config, region, k) and recompute the summary statistics.

    empirical maps combo keys to the Monte Carlo coverage; combos without an
    entry get nan. This is the only path that produces aggregates, so a table
    recomputed from re-ingested rows matches the emitted one exactly.
    """
    empirical = empirical or {}
    groups: Dict[Tuple[str, str, float], list] = {}
    for r in rows:
        groups.setdefault((r.config_kind, r.region_kind, r.k), []).append(r)
    out = []
    for key, group in groups.items():
        scored = [r for r in group if r.success is not None]
        rate = sum(r.success for r in scored) / len(scored) if scored else math.nan
        mean_area = (
            float(np.mean([r.area for r in scored])) if scored else math.nan
        )
        out.append(
            ComboAggregate(
                config_kind=key[0],
                region_kind=key[1],
                k=key[2],
                n_points=len(group),
                n_scored=len(scored),
                success_rate=rate,
                mean_area=mean_area,
                empirical_coverage=empirical.get(key, math.nan),
            )
        )
    return tuple(out)


def _angle_uncertainty(stats, source: str) -> AngleUncertainty:
    if source == "per_sample":
        stds = [s.std for s in stats]
    elif source == "of_mean":
        stds = [s.std_of_mean for s in stats]
    else:
        raise ValueError(f"angle_uncertainty_source must be per_sample or of_mean, got {source!r}")
    return AngleUncertainty.from_std_degrees(*stds)


def _build_configs(scenario, q_hat, timestamps, config_kinds, seed):
    """Per-step phase arrays, one (n, M) block per kind; validates geometry."""
    n = q_hat.shape[0]
    m_count = scenario.ris.element_count
    cfg = {kind: np.empty((n, m_count)) for kind in config_kinds}
    for i in range(n):
        try:
            distances(scenario, q_hat[i])
            for kind in config_kinds:
                if kind == "random":
                    rng = philox_generator(seed, STREAM_CONFIG, block=i)
                    built = make_config("random", scenario, q_hat[i], seed=rng)
                else:
                    built = make_config(kind, scenario, q_hat[i])
                cfg[kind][i] = built.phases
        except Exception as e:
            raise ExperimentError(i, timestamps[i], e) from e
    return cfg


def _calibration_coverage(
    scenario, pooled_rad, est_err_deg, angle_unc, kind, region_kind, k, seed, mc, n_steps
):
    """Monte Carlo coverage of the region built at the pooled estimate.

    Truths are exact channels at attitude (pooled - error) with the
    configuration frozen at the pooled estimate, so the number measures how
    often the region around a typical estimate captures the real channel.
    """
    if kind == "random":
        rng = philox_generator(seed, STREAM_CONFIG, block=n_steps)
        config = make_config("random", scenario, pooled_rad, seed=rng)
    else:
        config = make_config(kind, scenario, pooled_rad)
    uc = propagate_full_chain(scenario, pooled_rad, angle_unc, config).total
    try:
        region = ellipse_from(uc, k) if region_kind == "ellipse" else annulus_from(uc, k)
    except DegenerateRegionError:
        return math.nan
    draws = McConfig(
        mc.sample_count,
        mc.seed,
        stds_deg=np.std(est_err_deg, axis=0, ddof=1),
        means_deg=-np.mean(est_err_deg, axis=0),
    )
    truths = sample_truths(scenario, pooled_rad, config, draws)
    return empirical_coverage(region, truths)


def run_experiment(
    scenario: Scenario,
    series: OrientationErrorSeries,
    config_kinds=("off", "random", "optimized"),
    region_kinds=REGION_KINDS,
    k_values=None,
    mc: Optional[McConfig] = None,
    seed: int = 0,
    angle_uncertainty_source: str = "per_sample",
    bias_correction: bool = False,
) -> ExperimentReport:
    """Score every time step of the series under every requested combination.

    k_values maps region kind to its coverage factor (defaults: ellipse 2.0,
    annulus 2.24). mc, when given, adds a Monte Carlo coverage calibration per
    combination; its draw count and seed are used with the error distribution
    taken from the series itself. bias_correction subtracts the mean error
    before any step is evaluated.
    """
    config_kinds = tuple(config_kinds)
    region_kinds = tuple(region_kinds)
    for kind in config_kinds:
        if kind not in CONFIG_KINDS:
            raise ValueError(f"config kind must be one of {CONFIG_KINDS}, got {kind!r}")
    for kind in region_kinds:
        if kind not in REGION_KINDS:
            raise ValueError(f"region kind must be one of {REGION_KINDS}, got {kind!r}")
    k_map = dict(DEFAULT_K)
    k_map.update(k_values or {})
    for kind in region_kinds:
        if not k_map.get(kind, 0.0) > 0:
            raise ValueError(f"coverage factor for {kind} must be positive")

    stats = stats_per_angle(series)
    errors_deg = series.errors_deg()
    est_err_deg = errors_deg - np.mean(errors_deg, axis=0) if bias_correction else errors_deg
    angle_unc = _angle_uncertainty(stats, angle_uncertainty_source)

    n = len(series)
    q_hat = np.radians(est_err_deg)
    q_true = np.zeros((n, 3))
    cfg = _build_configs(scenario, q_hat, series.timestamps, config_kinds, seed)

    gain = math.sqrt(scenario.gain_tx * scenario.gain_rx)
    geo = (scenario.p_tx, scenario.p_rx, scenario.p_c, scenario.ris.element_offsets)
    rows = []
    for kind in config_kinds:
        values, u11, u12, u22 = _kernels.batch_chain(
            *geo, scenario.frequency, cfg[kind], q_hat, angle_unc.as_array()
        )
        gt_vals = gain * _kernels.batch_heff(*geo, scenario.frequency, cfg[kind], q_true)
        estimates = gain * values
        for region_kind in region_kinds:
            k = k_map[region_kind]
            build = ellipse_from if region_kind == "ellipse" else annulus_from
            for i in range(n):
                uc = UncertainComplex(
                    complex(estimates[i]), Covariance2(float(u11[i]), float(u12[i]), float(u22[i]))
                )
                try:
                    region = build(uc, k)
                except DegenerateRegionError:
                    region = None
                gt = complex(gt_vals[i])
                rows.append(
                    PointRow(
                        step=i,
                        time_s=float(series.timestamps[i]),
                        config_kind=kind,
                        region_kind=region_kind,
                        k=k,
                        estimate=uc.value,
                        cov=uc.cov,
                        gt=gt,
                        region=region,
                        area=region_area(region) if region is not None else math.nan,
                        success=region_contains(region, gt) if region is not None else None,
                    )
                )

    empirical: Dict[Tuple[str, str, float], float] = {}
    if mc is not None:
        pooled = np.radians(np.mean(est_err_deg, axis=0))
        for kind in config_kinds:
            for region_kind in region_kinds:
                k = k_map[region_kind]
                empirical[(kind, region_kind, k)] = _calibration_coverage(
                    scenario, pooled, est_err_deg, angle_unc, kind, region_kind, k, seed, mc, n
                )

    meta = _run_metadata(
        scenario, series, stats, config_kinds, region_kinds, k_map, mc, seed,
        angle_uncertainty_source, bias_correction,
    )
    return ExperimentReport(
        rows=tuple(rows),
        aggregates=aggregates_from_rows(rows, empirical),
        meta=meta,
    )


def _run_metadata(
    scenario, series, stats, config_kinds, region_kinds, k_map, mc, seed, source, bias
):
    def vec(v):
        return ",".join(format_float(x) for x in np.asarray(v, dtype=float))

    meta = {
        "seed": str(seed),
        "n_steps": str(len(series)),
        "rate_hz": format_float(series.rate_hz),
        "config_kinds": ",".join(config_kinds),
        "region_kinds": ",".join(region_kinds),
        "k_ellipse": format_float(k_map["ellipse"]),
        "k_annulus": format_float(k_map["annulus"]),
        "frequency_hz": format_float(scenario.frequency),
        "p_tx_m": vec(scenario.p_tx),
        "p_rx_m": vec(scenario.p_rx),
        "p_c_m": vec(scenario.p_c),
        "ris_rows": str(scenario.ris.rows),
        "ris_cols": str(scenario.ris.cols),
        "element_pitch_m": format_float(scenario.ris.element_pitch),
        "mount_offset_m": vec(scenario.ris.mount_offset),
        "gain_tx": format_float(scenario.gain_tx),
        "gain_rx": format_float(scenario.gain_rx),
        "error_mean_deg": vec([s.mean for s in stats]),
        "error_std_deg": vec([s.std for s in stats]),
        "angle_uncertainty_source": source,
        "bias_correction": "true" if bias else "false",
        "mc_samples": str(mc.sample_count) if mc is not None else "",
        "mc_seed": str(mc.seed) if mc is not None else "",
        "backend": _kernels.BACKEND,
    }
    digest = hashlib.sha256(
        "\n".join(f"{k}={meta[k]}" for k in sorted(meta)).encode()
    ).hexdigest()
    meta["config_hash"] = digest
    return meta


_POINT_COLUMNS = (
    "step", "time_s", "config", "region", "k",
    "estimate_re", "estimate_im", "u11", "u12", "u22",
    "gt_re", "gt_im", "area", "success",
)


def _write_rows(path, header, rows):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e}") from e


def _ellipse_geometry(row):
    """Semi-axes and major-axis angle of the scaled covariance ellipse."""
    vals, vecs = np.linalg.eigh(row.cov.matrix())
    semi_minor = row.k * math.sqrt(max(vals[0], 0.0))
    semi_major = row.k * math.sqrt(max(vals[1], 0.0))
    angle = math.atan2(vecs[1, 1], vecs[0, 1]) % math.pi
    return semi_major, semi_minor, angle


def emit_report(report: ExperimentReport, out_dir) -> Dict[str, str]:
    """Write the report as delimited text plus a metadata file.

    points.csv holds every scored step; aggregate.csv pivots success rates
    into region rows by configuration columns; aggregate_detail.csv carries
    the full per-combination statistics; regions_ellipse.csv and
    regions_annulus.csv describe the drawn regions; run_meta.json records the
    seed and the complete configuration. Returns the path of each file.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create {out_dir}: {e}") from e
    paths = {}

    f = format_float
    paths["points"] = os.path.join(out_dir, "points.csv")
    _write_rows(
        paths["points"],
        _POINT_COLUMNS,
        [
            (
                r.step, f(r.time_s), r.config_kind, r.region_kind, f(r.k),
                f(r.estimate.real), f(r.estimate.imag),
                f(r.cov.u11), f(r.cov.u12), f(r.cov.u22),
                f(r.gt.real), f(r.gt.imag), f(r.area),
                "" if r.success is None else int(r.success),
            )
            for r in report.rows
        ],
    )

    config_order = []
    region_order = []
    for agg in report.aggregates:
        if agg.config_kind not in config_order:
            config_order.append(agg.config_kind)
        if agg.region_kind not in region_order:
            region_order.append(agg.region_kind)
    rate = {(a.config_kind, a.region_kind): a.success_rate for a in report.aggregates}
    paths["aggregate"] = os.path.join(out_dir, "aggregate.csv")
    _write_rows(
        paths["aggregate"],
        ["region"] + config_order,
        [
            [rk] + [f(rate.get((ck, rk), math.nan)) for ck in config_order]
            for rk in region_order
        ],
    )

    paths["aggregate_detail"] = os.path.join(out_dir, "aggregate_detail.csv")
    _write_rows(
        paths["aggregate_detail"],
        ("config", "region", "k", "n_points", "n_scored",
         "success_rate", "mean_area", "empirical_coverage"),
        [
            (a.config_kind, a.region_kind, f(a.k), a.n_points, a.n_scored,
             f(a.success_rate), f(a.mean_area), f(a.empirical_coverage))
            for a in report.aggregates
        ],
    )

    ellipse_rows = []
    annulus_rows = []
    for r in report.rows:
        if r.region is None:
            continue
        if r.region_kind == "ellipse":
            major, minor, angle = _ellipse_geometry(r)
            ellipse_rows.append(
                (r.step, f(r.time_s), r.config_kind, f(r.k),
                 f(r.estimate.real), f(r.estimate.imag), f(major), f(minor), f(angle))
            )
        else:
            ann = r.region
            annulus_rows.append(
                (r.step, f(r.time_s), r.config_kind, f(r.k),
                 f(ann.r0), f(ann.dr), f(ann.theta0), f(ann.dtheta))
            )
    paths["regions_ellipse"] = os.path.join(out_dir, "regions_ellipse.csv")
    _write_rows(
        paths["regions_ellipse"],
        ("step", "time_s", "config", "k", "center_re", "center_im",
         "semi_major", "semi_minor", "angle_rad"),
        ellipse_rows,
    )
    paths["regions_annulus"] = os.path.join(out_dir, "regions_annulus.csv")
    _write_rows(
        paths["regions_annulus"],
        ("step", "time_s", "config", "k", "r0", "dr", "theta0", "dtheta"),
        annulus_rows,
    )

    paths["metadata"] = os.path.join(out_dir, "run_meta.json")
    try:
        with open(paths["metadata"], "w", encoding="utf-8", newline="") as fh:
            json.dump(report.meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as e:
        raise OSError(f"cannot write {paths['metadata']}: {e}") from e
    return paths


def read_points_table(path):
    """Re-ingest points.csv into rows fit for aggregates_from_rows.

    Region objects are not reconstructed; success and area come back exactly
    as written, so recomputed aggregates match the emitted ones.
    """
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != _POINT_COLUMNS:
            raise ValueError(f"{path}: unexpected points header {header}")
        for cells in reader:
            success = None if cells[13] == "" else bool(int(cells[13]))
            rows.append(
                PointRow(
                    step=int(cells[0]),
                    time_s=float(cells[1]),
                    config_kind=cells[2],
                    region_kind=cells[3],
                    k=float(cells[4]),
                    estimate=complex(float(cells[5]), float(cells[6])),
                    cov=Covariance2(float(cells[7]), float(cells[8]), float(cells[9])),
                    gt=complex(float(cells[10]), float(cells[11])),
                    region=None,
                    area=float(cells[12]),
                    success=success,
                )
            )
    return rows

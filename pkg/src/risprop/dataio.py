"""Flight-log ingestion, preprocessing, synthesis, and run configuration.

Logs are delimited text with a header row, degrees throughout, in one of two
column layouts: precomputed errors (timestamp, roll_err, pitch_err, yaw_err)
or paired estimate/reference columns (timestamp, roll_ekf, pitch_ekf,
yaw_ekf, roll_ref, pitch_ref, yaw_ref), where errors are estimate minus
reference. Scenario plus run settings live in one TOML file with units in the
field names.
"""

import csv
import math
import sys
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .geometry import SPEED_OF_LIGHT, RisGeometry, Scenario
from .seeding import STREAM_SYNTH, STREAM_WINDOW, philox_generator

_ERROR_COLUMNS = ("timestamp", "roll_err", "pitch_err", "yaw_err")
_PAIRED_COLUMNS = (
    "timestamp",
    "roll_ekf",
    "pitch_ekf",
    "yaw_ekf",
    "roll_ref",
    "pitch_ref",
    "yaw_ref",
)


class FlightLogError(ValueError):
    """Malformed flight-log content; message carries file, row, and column."""


@dataclass(frozen=True, eq=False)
class OrientationErrorSeries:
    """Per-sample attitude errors in degrees on a strictly increasing clock."""

    timestamps: np.ndarray
    roll_err: np.ndarray
    pitch_err: np.ndarray
    yaw_err: np.ndarray
    rate_hz: float = 100.0

    def __post_init__(self):
        for name in ("timestamps", "roll_err", "pitch_err", "yaw_err"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.timestamps.size
        if any(getattr(self, name).size != n for name in ("roll_err", "pitch_err", "yaw_err")):
            raise ValueError("all series columns must have equal length")
        if n >= 2 and not np.all(np.diff(self.timestamps) > 0):
            raise ValueError("timestamps must be strictly increasing")
        if self.rate_hz <= 0:
            raise ValueError(f"rate must be positive, got {self.rate_hz}")

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def errors_deg(self) -> np.ndarray:
        """Errors stacked (n, 3), ordered roll/pitch/yaw, degrees."""
        return np.column_stack([self.roll_err, self.pitch_err, self.yaw_err])


def _split_line(line: str):
    return [c.strip() for c in (line.split(",") if "," in line else line.split())]


def load_flight_log(path, fmt: str = "auto") -> OrientationErrorSeries:
    """Parse a log into an error series; fmt in {auto, errors, paired}.

    auto picks the layout from the header. Delimiter is comma when the header
    contains one, otherwise whitespace.
    """
    if fmt not in ("auto", "errors", "paired"):
        raise ValueError(f"fmt must be auto, errors, or paired, got {fmt!r}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise FlightLogError(f"{path}: empty file")
    header = tuple(c.lower() for c in _split_line(lines[0]))
    if header == _ERROR_COLUMNS:
        layout = "errors"
    elif header == _PAIRED_COLUMNS:
        layout = "paired"
    else:
        raise FlightLogError(f"{path}: unrecognized header {header}")
    if fmt != "auto" and fmt != layout:
        raise FlightLogError(f"{path}: expected {fmt} columns, found {layout}")

    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = _split_line(line)
        if len(cells) != len(header):
            raise FlightLogError(
                f"{path}: row at line {lineno} has {len(cells)} cells, expected {len(header)}"
            )
        parsed = []
        for col, cell in zip(header, cells):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise FlightLogError(
                    f"{path}: non-numeric value {cell!r} at line {lineno}, column {col}"
                ) from None
        rows.append(parsed)
    if not rows:
        raise FlightLogError(f"{path}: no data rows")

    data = np.asarray(rows, dtype=float)
    t = data[:, 0]
    if t.size >= 2 and not np.all(np.diff(t) > 0):
        # diff index i pairs data rows i and i+1; the offender is row i+1, line i+3
        bad_line = int(np.flatnonzero(np.diff(t) <= 0)[0]) + 3
        raise FlightLogError(f"{path}: timestamps not strictly increasing at line {bad_line}")
    if layout == "errors":
        err = data[:, 1:4]
    else:
        err = data[:, 1:4] - data[:, 4:7]
    rate = 100.0
    if t.size >= 2:
        rate = float((t.size - 1) / (t[-1] - t[0]))
    return OrientationErrorSeries(t, err[:, 0], err[:, 1], err[:, 2], rate_hz=rate)


def preprocess(
    series: OrientationErrorSeries,
    trim_seconds: float = 5.0,
    window_seconds: Optional[float] = 10.0,
    seed: int = 0,
) -> OrientationErrorSeries:
    """Drop both ends, then keep one seeded-random contiguous window.

    window_seconds=None keeps everything that survives the trim.
    """
    if trim_seconds < 0:
        raise ValueError(f"trim must be nonnegative, got {trim_seconds}")
    t = series.timestamps
    keep = (t >= t[0] + trim_seconds) & (t <= t[-1] - trim_seconds)
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        raise ValueError(f"series of {len(series)} points is too short for a {trim_seconds} s trim")
    lo, hi = int(idx[0]), int(idx[-1]) + 1
    if window_seconds is None:
        sl = slice(lo, hi)
    else:
        count = int(round(window_seconds * series.rate_hz))
        if count < 1 or count > hi - lo:
            raise ValueError(
                f"cannot cut a {window_seconds} s window ({count} points) from "
                f"{hi - lo} trimmed points"
            )
        rng = philox_generator(seed, STREAM_WINDOW)
        start = lo + int(rng.integers(0, hi - lo - count + 1))
        sl = slice(start, start + count)
    return OrientationErrorSeries(
        series.timestamps[sl],
        series.roll_err[sl],
        series.pitch_err[sl],
        series.yaw_err[sl],
        rate_hz=series.rate_hz,
    )


def synthesize_series(stats, n: int, rate: float = 100.0, seed: int = 0) -> OrientationErrorSeries:
    """I.i.d. Gaussian errors per angle; stats is three (mean, std) pairs in degrees."""
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    stats = [(float(m), float(s)) for m, s in stats]
    if len(stats) != 3:
        raise ValueError("stats must give (mean, std) for roll, pitch, and yaw")
    if any(s < 0 for _, s in stats):
        raise ValueError("standard deviations must be nonnegative")
    rng = philox_generator(seed, STREAM_SYNTH)
    cols = [m + s * rng.standard_normal(n) for m, s in stats]
    t = np.arange(n) / rate
    return OrientationErrorSeries(t, cols[0], cols[1], cols[2], rate_hz=rate)


def write_flight_log(path, series: OrientationErrorSeries) -> None:
    """Emit the errors layout, 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_ERROR_COLUMNS)
        for i in range(len(series)):
            writer.writerow(
                [
                    format_float(series.timestamps[i]),
                    format_float(series.roll_err[i]),
                    format_float(series.pitch_err[i]),
                    format_float(series.yaw_err[i]),
                ]
            )


def format_float(x: float) -> str:
    """17 significant digits: every double round-trips exactly."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class RunSettings:
    """Knobs of one evaluation run, file-loadable and flag-overridable."""

    seed: int = 0
    config_kinds: Tuple[str, ...] = ("off", "random", "optimized")
    k_ellipse: float = 2.0
    k_annulus: float = 2.24
    mc_samples: int = 100_000
    trim_seconds: float = 5.0
    window_seconds: Optional[float] = 10.0
    angle_uncertainty_source: str = "per_sample"
    bias_correction: bool = False

    def __post_init__(self):
        if self.angle_uncertainty_source not in ("per_sample", "of_mean"):
            raise ValueError(
                "angle_uncertainty_source must be per_sample or of_mean, "
                f"got {self.angle_uncertainty_source!r}"
            )


def _build_scenario(doc: dict) -> Scenario:
    sc = doc.get("scenario", {})
    ris = doc.get("ris", {})
    frequency = float(sc.get("frequency_hz", 5.0e9))
    pitch = ris.get("element_pitch_m")
    if pitch is None:
        pitch = 0.5 * SPEED_OF_LIGHT / frequency
    geometry = RisGeometry.grid(
        int(ris.get("rows", 12)),
        int(ris.get("cols", 10)),
        float(pitch),
        ris.get("mount_offset_m", (0.0, 0.0, -0.3)),
    )
    return Scenario(
        p_tx=sc.get("p_tx_m", (0.0, 0.0, 0.1)),
        p_rx=sc.get("p_rx_m", (2.0, 0.0, 0.1)),
        p_c=sc.get("p_c_m", (1.0, 1.0, 1.0)),
        ris=geometry,
        frequency=frequency,
        gain_tx=float(sc.get("gain_tx", 1.0)),
        gain_rx=float(sc.get("gain_rx", 1.0)),
    )


def _build_settings(doc: dict) -> RunSettings:
    run = doc.get("run", {})
    known = {
        "seed": int,
        "k_ellipse": float,
        "k_annulus": float,
        "mc_samples": int,
        "trim_seconds": float,
        "angle_uncertainty_source": str,
        "bias_correction": bool,
    }
    kwargs = {}
    for key, cast in known.items():
        if key in run:
            kwargs[key] = cast(run[key])
    if "config_kinds" in run:
        kwargs["config_kinds"] = tuple(str(k) for k in run["config_kinds"])
    if "window_seconds" in run:
        w = run["window_seconds"]
        kwargs["window_seconds"] = None if w == "full" else float(w)
    return RunSettings(**kwargs)


def load_config(path) -> Tuple[Scenario, RunSettings]:
    """Scenario and run settings from one TOML document; absent fields default."""
    with open(path, "rb") as fh:
        try:
            doc = _toml.load(fh)
        except _toml.TOMLDecodeError as e:
            raise FlightLogError(f"{path}: {e}") from e
    return _build_scenario(doc), _build_settings(doc)

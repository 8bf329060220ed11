"""Rigid-body pose of the reflecting-element grid and analytic distance sensitivities.

Angles are roll/pitch/yaw in radians, composed intrinsically as R_z(yaw) @
R_y(pitch) @ R_x(roll). Degrees appear only at file and CLI boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

#: order of the angle axes everywhere in this package
ANGLE_AXES = ("roll", "pitch", "yaw")


class DegenerateGeometryError(ValueError):
    """A reflecting element (nearly) coincides with an antenna."""


@dataclass(frozen=True)
class EulerAngles:
    """Roll/pitch/yaw record in radians."""

    roll: float
    pitch: float
    yaw: float

    @classmethod
    def from_degrees(cls, roll: float, pitch: float, yaw: float) -> "EulerAngles":
        return cls(math.radians(roll), math.radians(pitch), math.radians(yaw))

    def as_array(self) -> np.ndarray:
        return np.array([self.roll, self.pitch, self.yaw], dtype=float)


def _angles_array(angles) -> np.ndarray:
    if isinstance(angles, EulerAngles):
        return angles.as_array()
    q = np.asarray(angles, dtype=float)
    if q.shape != (3,):
        raise ValueError(f"expected 3 angles (roll, pitch, yaw), got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("angles must be finite")
    return q


@dataclass(frozen=True, eq=False)
class RisGeometry:
    """Element grid in the body frame: rows x cols, centered on the mount offset."""

    rows: int
    cols: int
    element_pitch: float
    mount_offset: np.ndarray
    element_offsets: np.ndarray = field(repr=False)

    @classmethod
    def grid(cls, rows: int, cols: int, element_pitch: float, mount_offset) -> "RisGeometry":
        """Build a centered, row-major grid of rows*cols element offsets."""
        if rows < 1 or cols < 1:
            raise ValueError("grid needs at least one row and one column")
        if element_pitch <= 0:
            raise ValueError("element pitch must be positive")
        offset = np.asarray(mount_offset, dtype=float).reshape(3)
        ii, jj = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
        x = (ii.ravel() - (rows - 1) / 2.0) * element_pitch
        y = (jj.ravel() - (cols - 1) / 2.0) * element_pitch
        disp = np.column_stack([x, y, np.zeros(rows * cols)])
        return cls(rows, cols, float(element_pitch), offset, offset + disp)

    @property
    def element_count(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True, eq=False)
class Scenario:
    """Antenna and platform placement plus carrier settings.

    Parameters
    ----------
    p_tx, p_rx : array-like, shape (3,)
        Transmitter and receiver positions, meters.
    p_c : array-like, shape (3,)
        Center of gravity the grid rotates around, meters.
    ris : RisGeometry
    frequency : float
        Carrier frequency, hertz.
    gain_tx, gain_rx : float
        Scalar antenna gains.
    min_separation : float
        Distances below this are treated as a degenerate geometry, meters.
    """

    p_tx: np.ndarray
    p_rx: np.ndarray
    p_c: np.ndarray
    ris: RisGeometry
    frequency: float
    gain_tx: float = 1.0
    gain_rx: float = 1.0
    min_separation: float = 1e-6

    def __post_init__(self):
        for name in ("p_tx", "p_rx", "p_c"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if self.gain_tx <= 0 or self.gain_rx <= 0:
            raise ValueError("antenna gains must be positive")
        if np.array_equal(self.p_tx, self.p_c) or np.array_equal(self.p_rx, self.p_c):
            raise ValueError("antennas must not coincide with the center of gravity")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    def endpoint(self, which: str) -> np.ndarray:
        if which == "tx":
            return self.p_tx
        if which == "rx":
            return self.p_rx
        raise ValueError(f"endpoint must be 'tx' or 'rx', got {which!r}")


def default_scenario(frequency: float = 5.0e9) -> Scenario:
    """Built-in hover scenario: Tx (0,0,0.1), Rx (2,0,0.1), platform at (1,1,1)
    with a 12x10 grid mounted 0.3 m below, pitch half a wavelength."""
    pitch = 0.5 * SPEED_OF_LIGHT / frequency
    ris = RisGeometry.grid(12, 10, pitch, [0.0, 0.0, -0.3])
    return Scenario(
        p_tx=[0.0, 0.0, 0.1],
        p_rx=[2.0, 0.0, 0.1],
        p_c=[1.0, 1.0, 1.0],
        ris=ris,
        frequency=frequency,
    )


def rotation_matrix(angles) -> np.ndarray:
    """3x3 rotation for roll/pitch/yaw, composed as R_z(yaw) R_y(pitch) R_x(roll)."""
    roll, pitch, yaw = _angles_array(angles)
    cx, sx = math.cos(roll), math.sin(roll)
    cy, sy = math.cos(pitch), math.sin(pitch)
    cz, sz = math.cos(yaw), math.sin(yaw)
    return np.array(
        [
            [cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx],
            [sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx],
            [-sy, cy * sx, cy * cx],
        ]
    )


def _factor_matrices(roll: float, pitch: float, yaw: float):
    cx, sx = math.cos(roll), math.sin(roll)
    cy, sy = math.cos(pitch), math.sin(pitch)
    cz, sz = math.cos(yaw), math.sin(yaw)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]], dtype=float)
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]], dtype=float)
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]], dtype=float)
    drx = np.array([[0, 0, 0], [0, -sx, -cx], [0, cx, -sx]], dtype=float)
    dry = np.array([[-sy, 0, cy], [0, 0, 0], [-cy, 0, -sy]], dtype=float)
    drz = np.array([[-sz, -cz, 0], [cz, -sz, 0], [0, 0, 0]], dtype=float)
    return (rx, ry, rz), (drx, dry, drz)


def rotation_matrix_derivative(angles, which: str) -> np.ndarray:
    """Analytic d(rotation)/d(angle) obtained by differentiating one factor."""
    roll, pitch, yaw = _angles_array(angles)
    (rx, ry, rz), (drx, dry, drz) = _factor_matrices(roll, pitch, yaw)
    if which == "roll":
        return rz @ ry @ drx
    if which == "pitch":
        return rz @ dry @ rx
    if which == "yaw":
        return drz @ ry @ rx
    raise ValueError(f"axis must be one of {ANGLE_AXES}, got {which!r}")


def rotation_matrix_derivatives(angles) -> np.ndarray:
    """All three derivatives stacked, shape (3, 3, 3), indexed [axis]."""
    roll, pitch, yaw = _angles_array(angles)
    (rx, ry, rz), (drx, dry, drz) = _factor_matrices(roll, pitch, yaw)
    return np.stack([rz @ ry @ drx, rz @ dry @ rx, drz @ ry @ rx])


def element_positions(scenario: Scenario, angles) -> np.ndarray:
    """World positions of all elements, shape (M, 3): p_c + R @ r_m."""
    R = rotation_matrix(angles)
    return scenario.p_c + scenario.ris.element_offsets @ R.T


def element_position(scenario: Scenario, angles, m: int) -> np.ndarray:
    if not 0 <= m < scenario.ris.element_count:
        raise IndexError(f"element index {m} outside 0..{scenario.ris.element_count - 1}")
    return element_positions(scenario, angles)[m]


def distances(scenario: Scenario, angles, check: bool = True):
    """Element-to-antenna distances (d_tx, d_rx), each shape (M,)."""
    p = element_positions(scenario, angles)
    d_tx = np.linalg.norm(p - scenario.p_tx, axis=1)
    d_rx = np.linalg.norm(p - scenario.p_rx, axis=1)
    if check:
        eps = scenario.min_separation
        if d_tx.min() < eps or d_rx.min() < eps:
            m = int(np.argmin(np.minimum(d_tx, d_rx)))
            raise DegenerateGeometryError(
                f"element at {element_positions(scenario, angles)[m]} is within "
                f"{eps} m of an antenna"
            )
    return d_tx, d_rx


def distance(scenario: Scenario, angles, m: int, endpoint: str) -> float:
    if not 0 <= m < scenario.ris.element_count:
        raise IndexError(f"element index {m} outside 0..{scenario.ris.element_count - 1}")
    p = element_positions(scenario, angles)[m]
    d = float(np.linalg.norm(p - scenario.endpoint(endpoint)))
    if d < scenario.min_separation:
        raise DegenerateGeometryError(f"element at {p} is within {scenario.min_separation} m of an antenna")
    return d


def distance_sensitivities(scenario: Scenario, angles):
    """d(distance)/d(angle) for every element and both endpoints.

    Returns (c_tx, c_rx), each shape (M, 3) ordered roll/pitch/yaw:
    the unit displacement dotted with the rotated offset derivative.
    """
    q = _angles_array(angles)
    derivs = rotation_matrix_derivatives(q)
    p = element_positions(scenario, q)
    out = []
    for endpoint in ("tx", "rx"):
        v = p - scenario.endpoint(endpoint)
        d = np.linalg.norm(v, axis=1)
        if d.min() < scenario.min_separation:
            raise DegenerateGeometryError("degenerate geometry: element on top of an antenna")
        unit = v / d[:, None]
        cols = [
            np.einsum("mi,mi->m", unit, scenario.ris.element_offsets @ derivs[a].T)
            for a in range(3)
        ]
        out.append(np.column_stack(cols))
    return out[0], out[1]


def distance_sensitivity(scenario: Scenario, angles, m: int, endpoint: str) -> np.ndarray:
    """(d d/d roll, d d/d pitch, d d/d yaw) for one element, meters/radian."""
    if not 0 <= m < scenario.ris.element_count:
        raise IndexError(f"element index {m} outside 0..{scenario.ris.element_count - 1}")
    scenario.endpoint(endpoint)
    c_tx, c_rx = distance_sensitivities(scenario, angles)
    return (c_tx if endpoint == "tx" else c_rx)[m]

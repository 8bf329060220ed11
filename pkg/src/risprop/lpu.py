"""First-order propagation of angle uncertainty to distances and to amplitude/phase.

The production route is staged exactly like the underlying model: angle
variances push through the distance sensitivities, then through the
amplitude/phase sensitivities, keeping every cross covariance along the way.
A composed-Jacobian shortcut is exposed for cross-checking the stages.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import amp_phase
from .geometry import Scenario, _angles_array, distance_sensitivities, distances

_CS_SLACK = 1.0 + 1e-9


class NotPositiveSemidefiniteError(ValueError):
    """Raised when an input covariance matrix is asymmetric or indefinite."""


@dataclass(frozen=True)
class AngleUncertainty:
    """Variances of the three attitude angles, radians^2, mutually independent."""

    var_roll: float
    var_pitch: float
    var_yaw: float

    def __post_init__(self):
        if self.var_roll < 0 or self.var_pitch < 0 or self.var_yaw < 0:
            raise ValueError("angle variances must be nonnegative")

    @classmethod
    def from_std_degrees(cls, roll: float, pitch: float, yaw: float) -> "AngleUncertainty":
        return cls(math.radians(roll) ** 2, math.radians(pitch) ** 2, math.radians(yaw) ** 2)

    def as_array(self) -> np.ndarray:
        return np.array([self.var_roll, self.var_pitch, self.var_yaw])


def _check_pair(var_a: float, var_b: float, cov: float, what: str) -> None:
    if var_a < 0 or var_b < 0:
        raise ValueError(f"{what} variances must be nonnegative")
    if abs(cov) > math.sqrt(var_a * var_b) * _CS_SLACK:
        raise ValueError(f"{what} covariance violates Cauchy-Schwarz")


@dataclass(frozen=True)
class DistanceUncertainty:
    """Second moments of the two leg distances of one element, meters^2."""

    var_tx: float
    var_rx: float
    cov: float

    def __post_init__(self):
        _check_pair(self.var_tx, self.var_rx, self.cov, "distance")


@dataclass(frozen=True)
class AmpPhaseUncertainty:
    """Second moments of one cascaded amplitude/phase pair."""

    var_amp: float
    var_phase: float
    cov: float

    def __post_init__(self):
        _check_pair(self.var_amp, self.var_phase, self.cov, "amplitude/phase")

    def matrix(self) -> np.ndarray:
        return np.array([[self.var_amp, self.cov], [self.cov, self.var_phase]])


def propagate_lpu(terms) -> float:
    """Combined variance of independent inputs: sum of c_i^2 u^2(x_i)."""
    total = 0.0
    for c, var in terms:
        if var < 0:
            raise ValueError(f"input variance must be nonnegative, got {var}")
        total += c * c * var
    return total


def propagate_lpu_correlated(sensitivities, covariance) -> float:
    """Combined variance with cross terms: the full quadratic form c^T U c."""
    c = np.asarray(sensitivities, dtype=float)
    cov = np.asarray(covariance, dtype=float)
    if cov.shape != (c.size, c.size):
        raise ValueError(f"covariance shape {cov.shape} does not match {c.size} sensitivities")
    scale = max(float(np.abs(cov).max()), 1.0)
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * scale):
        raise NotPositiveSemidefiniteError("input covariance is not symmetric")
    if float(np.linalg.eigvalsh(cov).min()) < -1e-12 * scale:
        raise NotPositiveSemidefiniteError("input covariance has a negative eigenvalue")
    return float(c @ cov @ c)


def distance_uncertainties(scenario: Scenario, angles, angle_unc: AngleUncertainty):
    """Leg-distance variances and their covariance for every element.

    Returns (var_tx, var_rx, cov), each shape (M,): each distance collects the
    three independent angle variances through its own sensitivities, and the
    shared angles couple the two legs.
    """
    c_tx, c_rx = distance_sensitivities(scenario, angles)
    q = angle_unc.as_array()
    var_tx = (c_tx * c_tx) @ q
    var_rx = (c_rx * c_rx) @ q
    cov = (c_tx * c_rx) @ q
    return var_tx, var_rx, cov


def distance_uncertainty(scenario: Scenario, angles, angle_unc: AngleUncertainty, m: int) -> DistanceUncertainty:
    if not 0 <= m < scenario.ris.element_count:
        raise IndexError(f"element index {m} outside 0..{scenario.ris.element_count - 1}")
    var_tx, var_rx, cov = distance_uncertainties(scenario, angles, angle_unc)
    return DistanceUncertainty(float(var_tx[m]), float(var_rx[m]), float(cov[m]))


def _amp_phase_sensitivities(scenario: Scenario, angles):
    """Per-element (dA/dd_tx, dA/dd_rx) and the common dP/dd, at the given attitude."""
    d_tx, d_rx = distances(scenario, angles)
    amps, _ = amp_phase(scenario, angles)
    return -amps / d_tx, -amps / d_rx, 2.0 * np.pi / scenario.wavelength


def amp_phase_uncertainties(scenario: Scenario, angles, dist_unc):
    """Amplitude/phase second moments for every element.

    dist_unc is the (var_tx, var_rx, cov) triple from distance_uncertainties.
    Returns (var_amp, var_phase, cov), each shape (M,).
    """
    var_tx, var_rx, cov = (np.asarray(v, dtype=float) for v in dist_unc)
    c_a_tx, c_a_rx, c_p = _amp_phase_sensitivities(scenario, angles)
    var_amp = c_a_tx**2 * var_tx + c_a_rx**2 * var_rx + 2.0 * c_a_tx * c_a_rx * cov
    var_phase = c_p * c_p * (var_tx + var_rx + 2.0 * cov)
    cov_ap = c_p * (c_a_tx * var_tx + c_a_rx * var_rx + (c_a_tx + c_a_rx) * cov)
    # the quadratic forms are nonnegative up to rounding
    return np.maximum(var_amp, 0.0), np.maximum(var_phase, 0.0), cov_ap


def amp_phase_uncertainty(
    scenario: Scenario, angles, dist_unc: DistanceUncertainty, m: int
) -> AmpPhaseUncertainty:
    if not 0 <= m < scenario.ris.element_count:
        raise IndexError(f"element index {m} outside 0..{scenario.ris.element_count - 1}")
    triple = (
        np.full(scenario.ris.element_count, dist_unc.var_tx),
        np.full(scenario.ris.element_count, dist_unc.var_rx),
        np.full(scenario.ris.element_count, dist_unc.cov),
    )
    var_amp, var_phase, cov_ap = amp_phase_uncertainties(scenario, angles, triple)
    return AmpPhaseUncertainty(float(var_amp[m]), float(var_phase[m]), float(cov_ap[m]))


def phase_variance_closed_form(scenario: Scenario, dist_unc: DistanceUncertainty) -> float:
    """Internal cross-check: both legs share the phase sensitivity 2 pi / lambda,
    so the phase variance collapses to a single bracket."""
    k = 2.0 * np.pi / scenario.wavelength
    return k * k * (dist_unc.var_tx + dist_unc.var_rx + 2.0 * dist_unc.cov)


def amp_phase_angle_jacobian(scenario: Scenario, angles) -> np.ndarray:
    """Composed d(A_m, P_m)/d(roll, pitch, yaw), shape (M, 2, 3).

    Chains the distance sensitivities with the amplitude/phase sensitivities;
    pushing diag(angle variances) through this equals the staged propagation.
    """
    q = _angles_array(angles)
    c_tx, c_rx = distance_sensitivities(scenario, q)
    c_a_tx, c_a_rx, c_p = _amp_phase_sensitivities(scenario, q)
    row_amp = c_a_tx[:, None] * c_tx + c_a_rx[:, None] * c_rx
    row_phase = c_p * (c_tx + c_rx)
    return np.stack([row_amp, row_phase], axis=1)

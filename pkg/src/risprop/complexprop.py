"""Second-moment propagation through the complex channel chain.

Each cascaded term carries a 2x2 covariance over its real and imaginary part,
obtained from the polar (amplitude, phase) moments. Applying an element phase
rotates that covariance, and the effective total sums value and covariance
termwise, treating elements as independent. A coupled diagnostic that keeps
the cross-element correlation induced by the shared attitude error is provided
alongside for comparison; the two answers differ and both are reported.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .channel import RisConfig, amp_phase
from .geometry import Scenario, _angles_array
from .lpu import (
    AmpPhaseUncertainty,
    AngleUncertainty,
    amp_phase_angle_jacobian,
    amp_phase_uncertainties,
    distance_uncertainties,
)

_DET_TOL = 1e-15


@dataclass(frozen=True)
class Covariance2:
    """Symmetric 2x2 covariance over (real, imaginary); u21 mirrors u12."""

    u11: float
    u12: float
    u22: float

    def __post_init__(self):
        if self.trace() < -_DET_TOL:
            raise ValueError(f"covariance trace must be nonnegative, got {self.trace()}")
        if self.det() < -_DET_TOL:
            raise ValueError(f"covariance is indefinite, determinant {self.det()}")

    @property
    def u21(self) -> float:
        return self.u12

    def trace(self) -> float:
        return self.u11 + self.u22

    def det(self) -> float:
        return self.u11 * self.u22 - self.u12 * self.u12

    def matrix(self) -> np.ndarray:
        return np.array([[self.u11, self.u12], [self.u12, self.u22]])

    @classmethod
    def from_matrix(cls, m) -> "Covariance2":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))


@dataclass(frozen=True)
class UncertainComplex:
    """A complex value together with the covariance of its real/imaginary pair."""

    value: complex
    cov: Covariance2


class ChainStageError(RuntimeError):
    """A stage of the end-to-end propagation failed; .stage names it."""

    def __init__(self, stage: str, original: BaseException):
        super().__init__(f"{stage} stage failed: {original}")
        self.stage = stage


def cascaded_covariance(amp: float, phase: float, apu: AmpPhaseUncertainty) -> UncertainComplex:
    """Real/imaginary covariance of one cascaded term from its polar moments.

    Componentwise expansion of J U J^T with J = [[cos P, -A sin P],
    [sin P, A cos P]].
    """
    s, c = math.sin(phase), math.cos(phase)
    va, vp, cav = apu.var_amp, apu.var_phase, apu.cov
    a2 = amp * amp
    u11 = c * c * va + a2 * s * s * vp - 2.0 * amp * s * c * cav
    u22 = s * s * va + a2 * c * c * vp + 2.0 * amp * s * c * cav
    u12 = s * c * va - a2 * s * c * vp + amp * (c * c - s * s) * cav
    return UncertainComplex(amp * complex(c, s), Covariance2(u11, u12, u22))


def apply_phase_shift(h: UncertainComplex, phi: float) -> UncertainComplex:
    """Multiply by e^{j phi}: the covariance is conjugated by the 2D rotation."""
    s, c = math.sin(phi), math.cos(phi)
    u11, u12, u22 = h.cov.u11, h.cov.u12, h.cov.u22
    r11 = c * c * u11 - 2.0 * s * c * u12 + s * s * u22
    r22 = s * s * u11 + 2.0 * s * c * u12 + c * c * u22
    r12 = s * c * (u11 - u22) + (c * c - s * s) * u12
    return UncertainComplex(h.value * complex(c, s), Covariance2(r11, r12, r22))


def sum_effective(terms) -> UncertainComplex:
    """Total of independently uncertain terms: values add, covariances add."""
    terms = list(terms)
    if not terms:
        raise ValueError("cannot sum an empty collection of channels")
    value = 0j
    u11 = u12 = u22 = 0.0
    for t in terms:
        value += t.value
        u11 += t.cov.u11
        u12 += t.cov.u12
        u22 += t.cov.u22
    return UncertainComplex(value, Covariance2(u11, u12, u22))


@dataclass(frozen=True)
class ChainResult:
    """End-to-end output plus the per-element intermediates that built it."""

    total: UncertainComplex
    cascaded: Tuple[UncertainComplex, ...]
    effective: Tuple[UncertainComplex, ...]


def propagate_full_chain(
    scenario: Scenario, angles, angle_unc: AngleUncertainty, config: RisConfig
) -> ChainResult:
    """Run geometry, distance and polar moments, per-term rotation, and summation.

    Antenna gains scale the total value only; they carry no uncertainty.
    A failure in any stage is re-raised as ChainStageError naming the stage.
    """
    if config.phases.size != scenario.ris.element_count:
        raise ChainStageError(
            "config",
            ValueError(
                f"configuration has {config.phases.size} phases for "
                f"{scenario.ris.element_count} elements"
            ),
        )
    try:
        amps, phases = amp_phase(scenario, angles)
        dist_unc = distance_uncertainties(scenario, angles, angle_unc)
    except Exception as e:
        raise ChainStageError("geometry", e) from e
    try:
        va, vp, cav = amp_phase_uncertainties(scenario, angles, dist_unc)
        cascaded = tuple(
            cascaded_covariance(
                float(amps[m]), float(phases[m]), AmpPhaseUncertainty(float(va[m]), float(vp[m]), float(cav[m]))
            )
            for m in range(amps.size)
        )
    except Exception as e:
        raise ChainStageError("cascade", e) from e
    try:
        effective = tuple(
            apply_phase_shift(h, float(phi)) for h, phi in zip(cascaded, config.phases)
        )
    except Exception as e:
        raise ChainStageError("phase", e) from e
    try:
        total = sum_effective(effective)
    except Exception as e:
        raise ChainStageError("sum", e) from e
    gain = math.sqrt(scenario.gain_tx * scenario.gain_rx)
    return ChainResult(UncertainComplex(gain * total.value, total.cov), cascaded, effective)


def _stacked_value_jacobian(scenario: Scenario, angles, config: RisConfig) -> np.ndarray:
    """d(Re, Im) of the ungained effective sum with respect to the three angles."""
    amps, phases = amp_phase(scenario, angles)
    jac = amp_phase_angle_jacobian(scenario, angles)
    shifted = phases + config.phases
    s, c = np.sin(shifted), np.cos(shifted)
    # rows of d(Re, Im)/d(A_m, P_m) after the exact phase offset
    d_re = c[:, None] * jac[:, 0, :] - (amps * s)[:, None] * jac[:, 1, :]
    d_im = s[:, None] * jac[:, 0, :] + (amps * c)[:, None] * jac[:, 1, :]
    return np.stack([d_re.sum(axis=0), d_im.sum(axis=0)])


def coupled_covariance(
    scenario: Scenario,
    angles,
    angle_unc: AngleUncertainty,
    config: RisConfig,
    method: str = "analytic",
) -> Covariance2:
    """Diagnostic total covariance that keeps all cross-element correlation.

    Every element feels the same three angle errors, so the exact linearized
    total is J_total diag(u^2) J_total^T with J_total the Jacobian of the
    whole sum. methods: "analytic" chains the closed-form sensitivities;
    "finite_difference" replaces J_total with central differences.
    """
    q = _angles_array(angles)
    if method == "analytic":
        jac = _stacked_value_jacobian(scenario, q, config)
    elif method == "finite_difference":
        def f(qq):
            amps, phases = amp_phase(scenario, qq)
            total = np.sum(amps * np.exp(1j * (phases + config.phases)))
            return np.array([total.real, total.imag])

        step = 1e-7
        cols = []
        for i in range(3):
            e = np.zeros(3)
            e[i] = step
            cols.append((f(q + e) - f(q - e)) / (2.0 * step))
        jac = np.stack(cols, axis=-1)
    else:
        raise ValueError(f"method must be 'analytic' or 'finite_difference', got {method!r}")
    total = jac @ np.diag(angle_unc.as_array()) @ jac.T
    return Covariance2.from_matrix(total)

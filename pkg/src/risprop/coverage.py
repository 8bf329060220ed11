"""Expanded-uncertainty regions in the complex plane and their scoring.

Two region shapes: a covariance ellipse scaled by a coverage factor k, and an
annular section built from the polar moments of the same covariance. Both use
inclusive boundaries, so a zero-uncertainty region still contains its center.
"""

import math
from dataclasses import dataclass

import numpy as np

from .complexprop import Covariance2, UncertainComplex

K_ELLIPSE_95 = 2.0
K_ANNULUS_95 = 2.24
K_ANNULUS_REDUCED_95 = 1.445

_RANGE_TOL = 1e-12


class DegenerateRegionError(ValueError):
    """The requested region is undefined, e.g. an annulus around the origin."""


@dataclass(frozen=True)
class CoverageEllipse:
    """{p : (p - center)^T cov^{-1} (p - center) <= k^2}, pseudo-inverse when singular."""

    center: complex
    cov: Covariance2
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"coverage factor must be positive, got {self.k}")


@dataclass(frozen=True)
class AnnularSection:
    """Radial interval times wrapped angular interval, both inclusive.

    The radial interval is [max(r0 - dr, 0), r0 + dr]; dtheta is a half-width
    on the wrapped angular distance, capped at pi (a full ring).
    """

    r0: float
    dr: float
    theta0: float
    dtheta: float

    def __post_init__(self):
        if self.r0 < 0 or self.dr < 0:
            raise ValueError("radius and radial half-width must be nonnegative")
        if not 0 <= self.dtheta <= math.pi:
            raise ValueError(f"angular half-width must lie in [0, pi], got {self.dtheta}")


def ellipse_from(uc: UncertainComplex, k: float) -> CoverageEllipse:
    return CoverageEllipse(uc.value, uc.cov, k)


def annulus_from(uc: UncertainComplex, k: float, origin_eps: float = 1e-12) -> AnnularSection:
    """Annular section from the polar first-order moments at the estimate.

    u(r), u(theta) come from conjugating the covariance with the polar
    Jacobian [[cos t, sin t], [-sin t / r, cos t / r]]; the angular half-width
    k u(theta) is capped at pi.
    """
    if not k > 0:
        raise ValueError(f"coverage factor must be positive, got {k}")
    # same numpy routines as the containment check, so a point equal to the
    # estimate sits exactly on r0/theta0 and a zero-width section keeps it
    r0 = float(np.abs(np.complex128(uc.value)))
    if r0 <= origin_eps:
        raise DegenerateRegionError("annular section is undefined at the origin")
    theta0 = float(np.angle(np.complex128(uc.value)))
    s, c = math.sin(theta0), math.cos(theta0)
    jac = np.array([[c, s], [-s / r0, c / r0]])
    polar = jac @ uc.cov.matrix() @ jac.T
    u_r = math.sqrt(max(polar[0, 0], 0.0))
    u_t = math.sqrt(max(polar[1, 1], 0.0))
    return AnnularSection(r0, k * u_r, theta0, min(k * u_t, math.pi))


def region_contains_many(region, points) -> np.ndarray:
    """Vectorized membership for complex points, boundary inclusive."""
    z = np.asarray(points, dtype=complex).ravel()
    if isinstance(region, CoverageEllipse):
        d = np.stack([z.real - region.center.real, z.imag - region.center.imag], axis=1)
        mat = region.cov.matrix()
        pinv = np.linalg.pinv(mat)
        # deviations must lie in the covariance range space (singular case)
        resid = np.linalg.norm(d @ (mat @ pinv).T - d, axis=1)
        in_range = resid <= _RANGE_TOL * np.linalg.norm(d, axis=1)
        mahal2 = np.einsum("ni,ij,nj->n", d, pinv, d)
        return in_range & (mahal2 <= region.k * region.k)
    if isinstance(region, AnnularSection):
        radial = np.abs(np.abs(z) - region.r0) <= region.dr
        # wrap the plain angle difference: exactly zero for an exact match,
        # where multiplying by a unit phasor would leave rounding residue
        wrapped = np.angle(np.exp(1j * (np.angle(z) - region.theta0)))
        return radial & (np.abs(wrapped) <= region.dtheta)
    raise TypeError(f"unknown region type {type(region).__name__}")


def region_contains(region, p: complex) -> bool:
    return bool(region_contains_many(region, [p])[0])


def ellipse_contains(e: CoverageEllipse, p: complex) -> bool:
    return region_contains(e, p)


def annulus_contains(a: AnnularSection, p: complex) -> bool:
    return region_contains(a, p)


def region_area(region) -> float:
    """Ellipse: pi k^2 sqrt(det cov). Annular section: dtheta ((r0+dr)^2 - lo^2)
    with the inner radius clamped at zero."""
    if isinstance(region, CoverageEllipse):
        return math.pi * region.k * region.k * math.sqrt(max(region.cov.det(), 0.0))
    if isinstance(region, AnnularSection):
        lo = max(region.r0 - region.dr, 0.0)
        hi = region.r0 + region.dr
        return region.dtheta * (hi * hi - lo * lo)
    raise TypeError(f"unknown region type {type(region).__name__}")


def coverage_probability(k: float) -> float:
    """Probability mass of a bivariate normal inside its k-factor ellipse."""
    return 1.0 - math.exp(-0.5 * k * k)


def success_rate(regions, truths) -> float:
    """Fraction of indices whose truth lies in its region; None regions are
    skipped together with their truth, and an empty remainder is an error."""
    regions = list(regions)
    truths = list(truths)
    if len(regions) != len(truths):
        raise ValueError(f"{len(regions)} regions vs {len(truths)} truths")
    pairs = [(r, t) for r, t in zip(regions, truths) if r is not None]
    if not pairs:
        raise ValueError("no usable regions to score")
    return sum(region_contains(r, t) for r, t in pairs) / len(pairs)

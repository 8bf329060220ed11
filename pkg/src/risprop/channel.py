"""Geometric channel model: cascaded per-element channels, phase configurations,
and the coherently summed effective channel."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Scenario, distances

CONFIG_KINDS = ("off", "random", "optimized", "quantized")


@dataclass(frozen=True)
class CascadedChannel:
    """One element's two-hop channel: amplitude, cumulative phase, complex value."""

    amplitude: float
    phase: float

    @property
    def value(self) -> complex:
        return self.amplitude * complex(math.cos(self.phase), math.sin(self.phase))


@dataclass(frozen=True, eq=False)
class RisConfig:
    """Per-element phase shifts plus the kind that produced them."""

    phases: np.ndarray
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "phases", np.asarray(self.phases, dtype=float).reshape(-1))
        if self.kind not in CONFIG_KINDS:
            raise ValueError(f"config kind must be one of {CONFIG_KINDS}, got {self.kind!r}")
        if self.kind == "off" and np.any(self.phases != 0.0):
            raise ValueError("off configuration must have all-zero phases")
        if self.kind == "quantized":
            binary = np.isclose(self.phases, 0.0) | np.isclose(self.phases, np.pi)
            if not np.all(binary):
                raise ValueError("quantized configuration phases must be 0 or pi")


@dataclass(frozen=True, eq=False)
class EffectiveChannel:
    """Summed channel value and the per-element terms it was built from.

    value = sqrt(gain_tx * gain_rx) * sum(terms); the gain factor is applied
    once, to the sum, never inside the per-element terms.
    """

    value: complex
    terms: np.ndarray


def amp_phase(scenario: Scenario, angles):
    """Amplitude and unwrapped phase of every cascaded channel, each shape (M,).

    amplitude = c^2 / ((4 pi nu)^2 d_tx d_rx), phase = (2 pi / lambda)(d_tx + d_rx).
    """
    d_tx, d_rx = distances(scenario, angles)
    c = 299_792_458.0
    amps = c**2 / ((4.0 * np.pi * scenario.frequency) ** 2 * d_tx * d_rx)
    phases = 2.0 * np.pi / scenario.wavelength * (d_tx + d_rx)
    return amps, phases


def cascaded_channel(scenario: Scenario, angles, m: int) -> CascadedChannel:
    if not 0 <= m < scenario.ris.element_count:
        raise IndexError(f"element index {m} outside 0..{scenario.ris.element_count - 1}")
    amps, phases = amp_phase(scenario, angles)
    return CascadedChannel(float(amps[m]), float(phases[m]))


def make_config(kind: str, scenario: Scenario, angles, seed=None) -> RisConfig:
    """Build a phase configuration of the requested kind.

    off: all zeros. random: i.i.d. uniform [0, 2 pi) from the seed (required).
    optimized: each phase cancels its element's cascaded phase. quantized:
    optimized rounded to the nearer of {0, pi}.
    """
    M = scenario.ris.element_count
    if kind == "off":
        return RisConfig(np.zeros(M), "off")
    if kind == "random":
        if seed is None:
            raise ValueError("random configuration needs a seed or a Generator")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        return RisConfig(rng.uniform(0.0, 2.0 * np.pi, M), "random")
    if kind in ("optimized", "quantized"):
        _, phases = amp_phase(scenario, angles)
        opt = (-phases) % (2.0 * np.pi)
        if kind == "optimized":
            return RisConfig(opt, "optimized")
        # wrapped distance to 0 beyond pi/2 means pi is the nearer level
        wrapped = np.angle(np.exp(1j * opt))
        return RisConfig(np.where(np.abs(wrapped) <= np.pi / 2, 0.0, np.pi), "quantized")
    raise ValueError(f"config kind must be one of {CONFIG_KINDS}, got {kind!r}")


def effective_channel(scenario: Scenario, angles, config: RisConfig) -> EffectiveChannel:
    """Coherent sum of all per-element channels under the given configuration."""
    M = scenario.ris.element_count
    if config.phases.shape != (M,):
        raise ValueError(f"configuration has {config.phases.size} phases for {M} elements")
    amps, phases = amp_phase(scenario, angles)
    terms = amps * np.exp(1j * (phases + config.phases))
    gain = math.sqrt(scenario.gain_tx * scenario.gain_rx)
    return EffectiveChannel(complex(gain * terms.sum()), terms)

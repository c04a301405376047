"""Amplitude loss models: spreading, absorption, bottom reflection.

All functions return linear amplitude ratios in (0, 1] and accept scalars or
numpy arrays. Frequencies are absolute (carrier + baseband offset); the Thorp
attenuation takes kHz, everything else Hz.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .scenario import BottomConfig

__all__ = [
    "PathKind",
    "LossBreakdown",
    "thorp_attenuation",
    "absorption_loss",
    "spreading_loss",
    "bottom_reflection",
    "path_gain",
]


class PathKind(Enum):
    """Propagation class of a path: direct, last bounce above, or below."""

    LOS = "los"
    DA = "da"  # downward arrival: final reflection at the surface
    UA = "ua"  # upward arrival: final reflection at the bottom


@dataclass(frozen=True)
class LossBreakdown:
    """Multiplicative amplitude-loss factors and their product."""

    spreading: float
    absorption: float
    bottom: float

    @property
    def total(self) -> float:
        return self.spreading * self.absorption * self.bottom


def thorp_attenuation(f_khz):
    """Seawater attenuation in dB/km at frequency ``f_khz`` (kHz, > 0)."""
    f = np.asarray(f_khz, dtype=float)
    if np.any(f <= 0):
        raise ValueError(f"frequency must be > 0 kHz, got {f_khz!r}")
    f2 = f * f
    alpha = 0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003
    return float(alpha) if np.ndim(f_khz) == 0 else alpha


def absorption_loss(distance_m, f_khz):
    """Amplitude ratio after absorption over ``distance_m`` meters."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d < 0):
        raise ValueError(f"distance must be >= 0 m, got {distance_m!r}")
    loss = 10.0 ** (-(d * thorp_attenuation(f_khz)) / 20000.0)
    return float(loss) if np.ndim(loss) == 0 else loss


def spreading_loss(distance_m):
    """Spherical spreading amplitude ratio 1/d for a point source."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError(f"distance must be > 0 m, got {distance_m!r}")
    loss = 1.0 / d
    return float(loss) if np.ndim(loss) == 0 else loss


def bottom_reflection(incidence, bottom: BottomConfig, water_sound_speed: float):
    """|Rayleigh reflection coefficient| at the bottom.

    ``incidence`` is measured from the bottom normal, in [0, pi/2). Beyond
    the critical angle the radicand goes negative, the root is purely
    imaginary and the magnitude is exactly 1 (total internal reflection).
    """
    phi = np.asarray(incidence, dtype=float)
    if np.any(phi < 0) or np.any(phi >= math.pi / 2):
        raise ValueError(f"incidence must lie in [0, pi/2), got {incidence!r}")
    m = bottom.density_ratio
    n = water_sound_speed / bottom.sound_speed
    radicand = n * n - np.sin(phi) ** 2
    a = m * np.cos(phi)
    with np.errstate(invalid="ignore"):
        q = np.sqrt(np.maximum(radicand, 0.0))
        sub = np.abs((a - q) / (a + q))
    coeff = np.where(radicand < 0.0, 1.0, sub)
    return float(coeff) if np.ndim(coeff) == 0 else coeff


def path_gain(
    kind: PathKind,
    distance_m,
    freq_hz,
    incidence=None,
    bottom_bounces: int = 0,
    bottom: BottomConfig | None = None,
    water_sound_speed: float | None = None,
) -> LossBreakdown:
    """Compose the amplitude gain of one path at an absolute frequency.

    Every diffuse ray of a reflected path carries its path's gain; the
    bottom factor is raised to the path's bottom-contact count.
    """
    f = np.asarray(freq_hz, dtype=float)
    if np.any(f <= 0):
        raise ValueError(f"absolute frequency must be > 0 Hz, got {freq_hz!r}")
    spreading = spreading_loss(distance_m)
    absorption = absorption_loss(distance_m, f / 1000.0)
    if kind is PathKind.LOS:
        if incidence is not None or bottom_bounces:
            raise ValueError("a direct path has no bottom incidence or bounces")
        bottom_factor = 1.0
    else:
        if bottom_bounces < 0:
            raise ValueError(f"bottom_bounces must be >= 0, got {bottom_bounces}")
        if bottom_bounces == 0:
            bottom_factor = 1.0
        else:
            if incidence is None or bottom is None or water_sound_speed is None:
                raise ValueError("bottom-interacting paths need incidence, bottom and water_sound_speed")
            bottom_factor = bottom_reflection(incidence, bottom, water_sound_speed) ** bottom_bounces
    return LossBreakdown(spreading=spreading, absorption=absorption, bottom=bottom_factor)

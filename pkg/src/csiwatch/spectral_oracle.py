"""Analytic line spectrum and bandwidth rules for the motion-modulated signal.

For a sinusoidal velocity v(t) = v_max*cos(omega_o*t), the generic stream
y(t) = A*cos(beta'*sin(omega_o*t) + dmu) expands into a Bessel line series:
the n-th harmonic of f_o carries A*cos(dmu)*J_n(beta') for even n and
j*A*sin(dmu)*J_n(beta') for odd n (positive-frequency delta weights; the
n = 0 line equals the signal mean).

The bandwidth of that series follows a Carson-style rule,

    BW = (beta' + 1) * f_o     for beta' >= 1
    BW = 2 * f_o               for beta' <  1,

which feeds the per-motion-class bounds (breathing / seizure / normal sleep
event) and the classification threshold f_th that separates seizures from
normal movements.

Pure and stateless throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import jv

from .signal_model import SceneGeometry

__all__ = [
    "LineSpectrum",
    "MotionClass",
    "MotionClassParams",
    "default_n_max",
    "line_mass",
    "bessel_line_spectrum",
    "carson_bandwidth",
    "grid_resolved_bandwidth",
    "captured_power_fraction",
    "class_bandwidth_bound",
    "derive_f_th",
]

# Two-sided line-mass completeness demanded of a truncated spectrum.
MIN_LINE_MASS = 0.999


@dataclass(frozen=True)
class LineSpectrum:
    """Truncated one-sided line spectrum of a sinusoidally modulated stream.

    amplitudes[n] is the complex weight of the positive-frequency delta at
    n*f_o. Even-n weights are real (scaled by cos(dmu)); odd-n weights are
    imaginary (scaled by sin(dmu)). amplitudes[0] equals the signal mean.
    """

    frequencies_hz: np.ndarray
    amplitudes: np.ndarray
    fundamental_hz: float
    modulation_index: float

    @property
    def n_lines(self) -> int:
        return self.frequencies_hz.size

    def power(self, include_dc: bool = False) -> np.ndarray:
        """Per-line power; n >= 1 lines count both frequency signs."""
        p = np.abs(self.amplitudes) ** 2
        p[1:] *= 2.0
        if not include_dc:
            p = p.copy()
            p[0] = 0.0
        return p


class MotionClass(Enum):
    BREATHING = "breathing"
    SEIZURE = "seizure"
    NORMAL_EVENT = "normal_event"


# Motion parameter extrema per class: breathing rate 0.2-0.3 Hz with chest
# speed <= 0.01 m/s; clonic jerking 1.5-5 Hz with peak speed >= 0.48 m/s
# (a_max >= 15 m/s^2 at 5 Hz); normal sleep movements bandlimited to 2 Hz
# with 99th-percentile speed 0.33 m/s.
_CLASS_DEFAULTS = {
    MotionClass.BREATHING: (0.3, 0.01),
    MotionClass.SEIZURE: (1.5, 0.48),
    MotionClass.NORMAL_EVENT: (2.0, 0.33),
}


@dataclass(frozen=True)
class MotionClassParams:
    """Motion-class parameters feeding the bandwidth bound.

    Defaults are the bound-forming extrema: the seizure bound uses the class
    minima (slowest credible seizure), the normal-event bound the class
    maxima (fastest credible normal movement).
    """

    motion_class: MotionClass
    f_o_hz: float | None = None
    v_max_mps: float | None = None

    def resolved(self) -> tuple[float, float]:
        f_def, v_def = _CLASS_DEFAULTS[self.motion_class]
        f_o = self.f_o_hz if self.f_o_hz is not None else f_def
        v = self.v_max_mps if self.v_max_mps is not None else v_def
        if f_o <= 0 or v < 0:
            raise ValueError(f"invalid motion parameters f_o={f_o}, v_max={v}")
        return f_o, v

    @classmethod
    def breathing(cls, f_o_hz: float = 0.3, v_max_mps: float = 0.01):
        return cls(MotionClass.BREATHING, f_o_hz, v_max_mps)

    @classmethod
    def seizure_lower_bound(cls):
        return cls(MotionClass.SEIZURE)

    @classmethod
    def normal_upper_bound(cls):
        return cls(MotionClass.NORMAL_EVENT)


def default_n_max(beta_prime: float) -> int:
    """Truncation order guaranteeing >= 99.9% of the two-sided line mass."""
    return math.ceil(beta_prime) + max(8, math.ceil(4.0 * beta_prime ** (1.0 / 3.0)))


def line_mass(beta_prime: float, n_max: int) -> float:
    """Two-sided Bessel mass J_0^2 + 2*sum_{n=1..n_max} J_n^2 (total is 1)."""
    n = np.arange(n_max + 1)
    j = jv(n, beta_prime)
    return float(j[0] ** 2 + 2.0 * np.sum(j[1:] ** 2))


def bessel_line_spectrum(
    beta_prime: float,
    f_o_hz: float,
    delta_mu_rad: float,
    amplitude: float = 1.0,
    n_max: int | None = None,
) -> LineSpectrum:
    """Line spectrum of A*cos(beta'*sin(2*pi*f_o*t) + dmu), truncated at n_max.

    Raises ValueError if n_max leaves more than 0.1% of the line mass
    uncaptured.
    """
    if beta_prime < 0:
        raise ValueError(f"beta_prime must be >= 0, got {beta_prime}")
    if f_o_hz <= 0:
        raise ValueError(f"f_o_hz must be > 0, got {f_o_hz}")
    if n_max is None:
        n_max = default_n_max(beta_prime)
    if line_mass(beta_prime, n_max) < MIN_LINE_MASS:
        raise ValueError(
            f"n_max = {n_max} captures less than {MIN_LINE_MASS:.1%} of the line "
            f"mass for beta' = {beta_prime}; need n_max >= {default_n_max(beta_prime)}"
        )
    n = np.arange(n_max + 1)
    j = jv(n, beta_prime)
    amps = np.where(
        n % 2 == 0,
        amplitude * math.cos(delta_mu_rad) * j,
        1j * amplitude * math.sin(delta_mu_rad) * j,
    ).astype(complex)
    return LineSpectrum(
        frequencies_hz=n * f_o_hz,
        amplitudes=amps,
        fundamental_hz=f_o_hz,
        modulation_index=beta_prime,
    )


def carson_bandwidth(beta_prime: float, f_o_hz: float) -> float:
    """Carson-style bandwidth: (beta'+1)*f_o for beta' >= 1, else 2*f_o."""
    if beta_prime < 0 or f_o_hz <= 0:
        raise ValueError("beta_prime must be >= 0 and f_o_hz > 0")
    if beta_prime >= 1.0:
        return (beta_prime + 1.0) * f_o_hz
    return 2.0 * f_o_hz


def grid_resolved_bandwidth(bandwidth_hz: float, f_o_hz: float) -> float:
    """Bandwidth rounded up to the harmonic grid n*f_o.

    The spectrum is a line series with spacing f_o, so a bandwidth edge
    falling between harmonics resolves to the next line: the harmonic it
    cuts through is counted as inside. Without this, an edge sitting just
    below an integer harmonic would exclude a line that still carries
    non-negligible mass.
    """
    n_edge = math.ceil(bandwidth_hz / f_o_hz - 1e-9)
    return n_edge * f_o_hz


def captured_power_fraction(spectrum: LineSpectrum, bandwidth_hz: float) -> float:
    """Fraction of non-DC line power at |f| <= the grid-resolved bandwidth."""
    p = spectrum.power(include_dc=False)
    total = p.sum()
    if total == 0.0:
        return 1.0
    edge = grid_resolved_bandwidth(bandwidth_hz, spectrum.fundamental_hz)
    in_band = spectrum.frequencies_hz <= edge + 1e-9 * spectrum.fundamental_hz
    return float(p[in_band].sum() / total)


def class_bandwidth_bound(params: MotionClassParams, geometry: SceneGeometry) -> float:
    """Bandwidth bound for a motion class at the given geometry.

    Breathing: 2*f_o (its modulation index stays below 1 for any pose).
    Seizure / normal event: psi*v_max/lambda + f_o, a lower bound when
    evaluated at the seizure minima and an upper bound at the normal-event
    maxima.
    """
    f_o, v_max = params.resolved()
    if params.motion_class is MotionClass.BREATHING:
        return 2.0 * f_o
    return geometry.psi * v_max / geometry.wavelength_m + f_o


def derive_f_th(geometry: SceneGeometry) -> float:
    """Classification threshold: midpoint of the seizure and normal bounds."""
    bw_sz = class_bandwidth_bound(MotionClassParams.seizure_lower_bound(), geometry)
    bw_nm = class_bandwidth_bound(MotionClassParams.normal_upper_bound(), geometry)
    return 0.5 * (bw_sz + bw_nm)

"""Intensity correction: beam-pattern and incidence-angle (Lambertian) steps.

The backscatter model is ``I = K * Phi(phi) * R * f(theta)`` where ``f`` is
one of three angular response laws (cos, cos^2, cot). Correction divides a
raw ping by the beam gain and then by the law's angular factor, leaving an
intensity proportional to seafloor reflectivity alone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryDomainError, StageError
from .geometry import PingGeometry, SensorConfig

# Fraction of the first sinc lobe at which the beam argument is clamped
# during whole-ping correction (keeps processing total near beam nulls).
_LOBE_CLAMP = 0.999 * math.pi


class LambertianLaw(enum.Enum):
    """Angular backscatter response law."""

    COS = "cos"
    COS_SQUARED = "cos2"
    COT = "cot"

    @classmethod
    def from_name(cls, name: str) -> "LambertianLaw":
        for law in cls:
            if law.value == name:
                return law
        raise ValueError(f"unknown Lambertian law {name!r}; expected one of "
                         f"{[law.value for law in cls]}")


class Stage(enum.Enum):
    RAW = "raw"
    BEAM_CORRECTED = "beam_corrected"
    INCIDENCE_CORRECTED = "incidence_corrected"


@dataclass(frozen=True)
class IntensityPing:
    """One ping's intensity samples, index-aligned with a PingGeometry."""

    values: np.ndarray
    stage: Stage = Stage.RAW

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or len(values) == 0:
            raise ValueError("ping values must be a nonempty 1-D array")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("ping values must be finite and nonnegative")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


def _beam_argument(phi_rad: np.ndarray | float, config: SensorConfig):
    return config.k_phi * np.sin(np.asarray(phi_rad, dtype=np.float64) - config.phi0_rad)


def _gain_from_argument(x: np.ndarray, config: SensorConfig) -> np.ndarray:
    # x / sin(x) == 1 / sinc(x / pi); exact analytic limit 1 at x == 0
    gain = (1.0 / np.sinc(x / math.pi)) ** config.beam_exponent
    if config.beam_reciprocal:
        gain = 1.0 / gain
    return gain


def beam_pattern_gain(phi_rad: float, config: SensorConfig) -> float:
    """Beam gain ``(x / sin x)**p`` with ``x = k_phi * sin(phi - phi0)``.

    Equals 1 at boresight and is symmetric about ``phi0``. Only the first
    lobe ``|x| < pi`` is a valid domain.

    Raises
    ------
    GeometryDomainError
        If the argument falls outside the first lobe (beam null).
    """
    x = float(_beam_argument(phi_rad, config))
    if abs(x) >= math.pi:
        raise GeometryDomainError(
            f"beam null: |k_phi*sin(phi-phi0)| = {abs(x):.4f} >= pi")
    return float(_gain_from_argument(np.asarray(x), config))


def _beam_gains_clamped(phi_rad: np.ndarray, config: SensorConfig) -> np.ndarray:
    """Vectorized beam gain with the lobe argument clamped near the null."""
    x = np.clip(_beam_argument(phi_rad, config), -_LOBE_CLAMP, _LOBE_CLAMP)
    return _gain_from_argument(x, config)


def lambertian_factor(theta_rad: float, law: LambertianLaw) -> float:
    """Angular divisor of the chosen law: cos, cos^2 or cot of ``theta``.

    This is the factor the forward model multiplies reflectivity by;
    correction divides it out.
    """
    if not 0 <= theta_rad < math.pi / 2:
        raise GeometryDomainError(f"incidence angle {theta_rad!r} outside [0, pi/2)")
    c = math.cos(theta_rad)
    if law is LambertianLaw.COS:
        return c
    if law is LambertianLaw.COS_SQUARED:
        return c * c
    s = math.sin(theta_rad)
    if s == 0.0:
        raise GeometryDomainError("cot law diverges at normal incidence (theta = 0)")
    return c / s


def _lambertian_factors(theta_rad: np.ndarray, law: LambertianLaw) -> np.ndarray:
    c = np.cos(theta_rad)
    if law is LambertianLaw.COS:
        return c
    if law is LambertianLaw.COS_SQUARED:
        return c * c
    s = np.sin(theta_rad)
    if np.any(s == 0.0):
        raise GeometryDomainError("cot law diverges at normal incidence (theta = 0)")
    return c / s


def _require_stage(ping: IntensityPing, stage: Stage, op: str):
    if ping.stage is not stage:
        raise StageError(f"{op} expects a {stage.value} ping, got {ping.stage.value}")


def _require_aligned(ping: IntensityPing, geom: PingGeometry):
    if len(ping) != geom.num_retained:
        raise ValueError(
            f"ping length {len(ping)} != retained bin count {geom.num_retained}")


def correct_beam_pattern(ping: IntensityPing, geom: PingGeometry,
                         config: SensorConfig) -> IntensityPing:
    """Divide a raw ping by the per-bin beam gain.

    Bins whose depression angle falls outside the first lobe use the gain
    clamped at the lobe edge instead of failing mid-ping.
    """
    _require_stage(ping, Stage.RAW, "correct_beam_pattern")
    _require_aligned(ping, geom)
    gains = _beam_gains_clamped(geom.depression_angles_rad, config)
    return IntensityPing(ping.values / gains, Stage.BEAM_CORRECTED)


def correct_incidence(ping: IntensityPing, geom: PingGeometry,
                      law: LambertianLaw) -> IntensityPing:
    """Divide a beam-corrected ping by the law's angular factor per bin."""
    _require_stage(ping, Stage.BEAM_CORRECTED, "correct_incidence")
    _require_aligned(ping, geom)
    factors = _lambertian_factors(geom.incidence_angles_rad, law)
    return IntensityPing(ping.values / factors, Stage.INCIDENCE_CORRECTED)


def normalize_dynamic_range(image: np.ndarray, clip_percentile: float = 99.9) -> np.ndarray:
    """Clip at an upper percentile and map affinely onto [0, 1].

    The minimum finite value maps to 0 and the clip level to 1; values above
    the clip level saturate at 1. Non-finite entries pass through unchanged.
    An all-equal input maps to all zeros.
    """
    image = np.asarray(image, dtype=np.float64)
    if not 0 < clip_percentile <= 100:
        raise ValueError(f"clip_percentile must lie in (0, 100], got {clip_percentile!r}")
    finite = np.isfinite(image)
    if not finite.any():
        raise ValueError("image has no finite values")
    vals = image[finite]
    lo = vals.min()
    hi = np.percentile(vals, clip_percentile)
    out = image.copy()
    if hi <= lo:
        out[finite] = 0.0
        return out
    out[finite] = np.clip((vals - lo) / (hi - lo), 0.0, 1.0)
    return out

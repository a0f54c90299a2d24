"""Flat-seafloor sidescan geometry.

Maps per-bin slant ranges to ground ranges and incidence/depression angles
for a sonar flying at altitude ``h`` over an assumed horizontal seafloor.
Angle convention: the incidence angle ``theta`` is measured from the
vertical (so ``cos(theta) = h / r_s``), the depression angle ``phi`` from
the horizontal; the two are complementary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryDomainError
from ._validation import check_angle_deg, check_count, check_positive


@dataclass(frozen=True)
class SensorConfig:
    """Sonar constants shared by the forward model and the corrections.

    Parameters
    ----------
    slant_resolution_m : float
        Slant range covered by one bin.
    num_bins : int
        Bins per ping (one side).
    k_phi : float
        Beam-pattern constant of the linear-array model (2.78 for a
        3 dB beam width of 60 degrees).
    phi0_deg : float
        Depression angle at which the sonar is mounted (boresight).
    beam_exponent : int
        Exponent applied to the linear-array beam term.
    theta0_deg : float
        Incidence-angle cutoff; bins closer to nadir than this are
        treated as nadir zone and removed.
    lambertian_k : float
        Normalization constant of the backscatter model.
    beam_reciprocal : bool
        If True, use the reciprocal (physical sinc-type) beam gain
        instead of the literal grows-off-boresight form.
    """

    slant_resolution_m: float
    num_bins: int
    k_phi: float = 2.78
    phi0_deg: float = 30.0
    beam_exponent: int = 4
    theta0_deg: float = 30.0
    lambertian_k: float = 1.0
    beam_reciprocal: bool = False

    def __post_init__(self):
        check_positive("slant_resolution_m", self.slant_resolution_m)
        check_count("num_bins", self.num_bins)
        check_positive("k_phi", self.k_phi)
        check_angle_deg("phi0_deg", self.phi0_deg)
        check_angle_deg("theta0_deg", self.theta0_deg)
        if int(self.beam_exponent) != self.beam_exponent or self.beam_exponent < 1:
            raise ValueError(f"beam_exponent must be an integer >= 1, got {self.beam_exponent!r}")
        check_positive("lambertian_k", self.lambertian_k)

    @property
    def max_slant_range_m(self) -> float:
        return self.num_bins * self.slant_resolution_m

    @property
    def phi0_rad(self) -> float:
        return math.radians(self.phi0_deg)

    @property
    def theta0_rad(self) -> float:
        return math.radians(self.theta0_deg)

    def bin_slant_ranges(self) -> np.ndarray:
        """Slant range of every bin center, ``(j + 1/2) * slant_resolution_m``."""
        return (np.arange(self.num_bins) + 0.5) * self.slant_resolution_m


@dataclass(frozen=True)
class PingGeometry:
    """Per-bin geometry of one ping after the nadir cut.

    ``first_bin_index`` is the index of the first retained bin in the raw
    ping, so raw intensities align with these arrays via
    ``raw[first_bin_index:]``.
    """

    altitude_m: float
    first_bin_index: int
    slant_ranges_m: np.ndarray
    ground_ranges_m: np.ndarray
    incidence_angles_rad: np.ndarray
    depression_angles_rad: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.slant_ranges_m, self.ground_ranges_m,
                    self.incidence_angles_rad, self.depression_angles_rad):
            arr.flags.writeable = False
        if self.altitude_m <= 0:
            raise ValueError("altitude_m must be positive")
        n = len(self.slant_ranges_m)
        if not (len(self.ground_ranges_m) == len(self.incidence_angles_rad)
                == len(self.depression_angles_rad) == n) or n == 0:
            raise ValueError("geometry arrays must be nonempty and index-aligned")

    @property
    def num_retained(self) -> int:
        return len(self.slant_ranges_m)


def slant_to_ground(r_s: float, h: float) -> float:
    """Project a slant range onto the flat seafloor: ``sqrt(r_s**2 - h**2)``.

    Raises
    ------
    GeometryDomainError
        If ``r_s < h`` (bin above seafloor; belongs to nadir/water column).
    """
    h = check_positive("h", h)
    if r_s < h:
        raise GeometryDomainError(
            f"slant range {r_s} < altitude {h}: bin above seafloor; "
            "belongs to nadir/water column")
    return math.sqrt(r_s * r_s - h * h)


def incidence_angle(r_s: float, h: float) -> float:
    """Incidence angle from the vertical, ``arccos(h / r_s)``, in radians."""
    h = check_positive("h", h)
    if r_s < h:
        raise GeometryDomainError(
            f"slant range {r_s} < altitude {h}: no seafloor incidence")
    return math.acos(min(h / r_s, 1.0))


def depression_angle(r_s: float, h: float) -> float:
    """Depression angle from the horizontal, ``arcsin(h / r_s)``, in radians."""
    h = check_positive("h", h)
    if r_s < h:
        raise GeometryDomainError(
            f"slant range {r_s} < altitude {h}: no seafloor intersection")
    return math.asin(min(h / r_s, 1.0))


def ground_range_window(h: float, r_s_max: float, theta0_rad: float) -> tuple[float, float]:
    """Usable ground-range window ``(h*tan(theta0), sqrt(r_s_max**2 - h**2))``.

    The lower edge is where the incidence angle reaches the nadir cutoff,
    the upper edge is the ground projection of the maximum slant range.

    Raises
    ------
    GeometryDomainError
        If ``r_s_max <= h / cos(theta0)``: the entire ping lies inside the
        nadir cutoff.
    """
    h = check_positive("h", h)
    if not 0 <= theta0_rad < math.pi / 2:
        raise ValueError(f"theta0_rad must lie in [0, pi/2), got {theta0_rad!r}")
    if r_s_max <= h / math.cos(theta0_rad):
        raise GeometryDomainError(
            f"max slant range {r_s_max} <= {h / math.cos(theta0_rad):.4f}: "
            "entire ping inside nadir cutoff")
    return h * math.tan(theta0_rad), math.sqrt(r_s_max * r_s_max - h * h)


def build_ping_geometry(h: float, config: SensorConfig) -> PingGeometry:
    """Assemble per-bin geometry for one ping, discarding nadir-zone bins.

    Bin ``j`` sits at slant range ``(j + 1/2) * slant_resolution_m``; bins
    with incidence angle below ``config.theta0_deg`` (equivalently
    ``r_s < h / cos(theta0)``) are dropped, which also removes all
    water-column bins.
    """
    h = check_positive("h", h)
    r_s = config.bin_slant_ranges()
    cutoff = h / math.cos(config.theta0_rad)
    first = int(np.searchsorted(r_s, cutoff, side="left"))
    if first >= config.num_bins:
        raise GeometryDomainError(
            f"no bin survives the nadir cut at altitude {h} "
            f"(need slant range >= {cutoff:.4f}, max is {r_s[-1]:.4f})")
    r_s = r_s[first:]
    ratio = np.minimum(h / r_s, 1.0)
    return PingGeometry(
        altitude_m=h,
        first_bin_index=first,
        slant_ranges_m=r_s,
        ground_ranges_m=np.sqrt(r_s * r_s - h * h),
        incidence_angles_rad=np.arccos(ratio),
        depression_angles_rad=np.arcsin(ratio),
    )

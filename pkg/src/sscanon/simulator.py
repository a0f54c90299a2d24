"""Synthetic flat-seafloor survey generator.

Runs the backscatter model forward over a known reflectivity map to produce
raw waterfalls from several altitudes/offsets, together with exact keypoint
correspondences (the same world point located in each line by inverse
geometry). Serves as ground truth for evaluating the canonical transform.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import GeometryDomainError
from .geometry import SensorConfig
from .intensity import LambertianLaw, _beam_gains_clamped
from .pipeline import Side, Waterfall
from ._validation import check_count, check_nonnegative, check_positive


@dataclass(frozen=True)
class CurveFeature:
    """A bright ridge following a (optionally bowed) line across the map.

    The ridge runs from ``(x_start, y_start)`` to ``(x_end, y_end)`` in
    world meters, bowed laterally by ``bow_m`` at mid-span, with a Gaussian
    cross-section of the given width and peak reflectivity boost."""

    x_start_m: float
    x_end_m: float
    y_start_m: float
    y_end_m: float
    width_m: float = 1.0
    amplitude: float = 0.8
    bow_m: float = 0.0


@dataclass(frozen=True)
class ReflectivityMap:
    """World reflectivity sampled on a uniform grid.

    ``values[ix, iy]`` covers world point ``(ix * cell_size_m, iy * cell_size_m)``;
    x runs along track, y across track. Values are strictly positive.
    ``feature_points_world`` lists annotation-worthy world points on the
    inserted features.
    """

    values: np.ndarray
    cell_size_m: float
    seed: int
    feature_points_world: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        check_positive("cell_size_m", self.cell_size_m)
        if self.values.ndim != 2:
            raise ValueError("reflectivity values must be 2-D")
        if np.any(self.values <= 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("reflectivity must be strictly positive and finite")
        self.values.flags.writeable = False

    @property
    def extent_m(self) -> tuple[float, float]:
        """Largest (x, y) at which bilinear sampling is defined."""
        nx, ny = self.values.shape
        return (nx - 1) * self.cell_size_m, (ny - 1) * self.cell_size_m

    def sample_bilinear(self, x, y) -> np.ndarray:
        """Bilinear reflectivity at world coordinates (arrays broadcast)."""
        fx = np.asarray(x, dtype=np.float64) / self.cell_size_m
        fy = np.asarray(y, dtype=np.float64) / self.cell_size_m
        nx, ny = self.values.shape
        if np.any(fx < 0) or np.any(fy < 0) or np.any(fx > nx - 1) or np.any(fy > ny - 1):
            raise GeometryDomainError("sample position outside reflectivity map")
        ix = np.minimum(fx.astype(np.int64), nx - 2)
        iy = np.minimum(fy.astype(np.int64), ny - 2)
        tx = fx - ix
        ty = fy - iy
        v = self.values
        return ((1 - tx) * (1 - ty) * v[ix, iy] + tx * (1 - ty) * v[ix + 1, iy]
                + (1 - tx) * ty * v[ix, iy + 1] + tx * ty * v[ix + 1, iy + 1])


@dataclass(frozen=True)
class SurveyLineSpec:
    """One straight survey pass: altitude, cross-track offset of the sonar
    track, ping count, relative noise level and the forward response law."""

    altitude_m: float
    lateral_offset_m: float
    ping_count: int
    noise_sigma: float = 0.0
    law: LambertianLaw = LambertianLaw.COS_SQUARED
    ping_spacing_m: float | None = None
    line_id: str = ""

    def __post_init__(self):
        check_positive("altitude_m", self.altitude_m)
        check_count("ping_count", self.ping_count)
        check_nonnegative("noise_sigma", self.noise_sigma)
        check_nonnegative("lateral_offset_m", self.lateral_offset_m)


def make_reflectivity_map(seed: int, size: tuple[int, int],
                          feature_spec: tuple[CurveFeature, ...] = (),
                          cell_size_m: float = 0.25,
                          background_range: tuple[float, float] = (0.1, 0.45),
                          smoothness_m: float = 0.8,
                          feature_point_spacing_m: float = 1.5) -> ReflectivityMap:
    """Deterministic reflectivity texture: smoothed noise plus ridge features.

    ``size`` is the grid shape in cells (along-track, cross-track). Feature
    points are sampled along every curve at roughly the requested spacing
    and stored on the map for correspondence generation. Values are clamped
    to [0.05, 1].
    """
    nx, ny = size
    check_count("size[0]", nx)
    check_count("size[1]", ny)
    rng = np.random.default_rng(seed)
    base = ndimage.gaussian_filter(rng.standard_normal((nx, ny)),
                                   sigma=smoothness_m / cell_size_m, mode="reflect")
    lo, hi = background_range
    span = base.max() - base.min()
    if span > 0:
        base = lo + (hi - lo) * (base - base.min()) / span
    else:
        base = np.full((nx, ny), lo)

    xs = np.arange(nx) * cell_size_m
    ys = np.arange(ny) * cell_size_m
    points: list[tuple[float, float]] = []
    for feat in feature_spec:
        length = math.hypot(feat.x_end_m - feat.x_start_m, feat.y_end_m - feat.y_start_m)
        n_dense = max(int(length / (0.25 * cell_size_m)), 8)
        t = np.linspace(0.0, 1.0, n_dense)
        cx = feat.x_start_m + (feat.x_end_m - feat.x_start_m) * t
        cy = (feat.y_start_m + (feat.y_end_m - feat.y_start_m) * t
              + feat.bow_m * np.sin(math.pi * t))
        mask = np.zeros((nx, ny), dtype=bool)
        ix = np.clip(np.round(cx / cell_size_m).astype(int), 0, nx - 1)
        iy = np.clip(np.round(cy / cell_size_m).astype(int), 0, ny - 1)
        mask[ix, iy] = True
        dist = ndimage.distance_transform_edt(~mask, sampling=cell_size_m)
        base += feat.amplitude * np.exp(-0.5 * (dist / feat.width_m) ** 2)

        n_pts = max(int(length / feature_point_spacing_m), 2)
        for tt in np.linspace(0.05, 0.95, n_pts):
            px = feat.x_start_m + (feat.x_end_m - feat.x_start_m) * tt
            py = (feat.y_start_m + (feat.y_end_m - feat.y_start_m) * tt
                  + feat.bow_m * math.sin(math.pi * tt))
            if 0 <= px <= xs[-1] and 0 <= py <= ys[-1]:
                points.append((float(px), float(py)))

    return ReflectivityMap(values=np.clip(base, 0.05, 1.0), cell_size_m=cell_size_m,
                           seed=int(seed), feature_points_world=tuple(points))


def _forward_factors(theta: np.ndarray, law: LambertianLaw) -> np.ndarray:
    c = np.cos(theta)
    if law is LambertianLaw.COS:
        return c
    if law is LambertianLaw.COS_SQUARED:
        return c * c
    s = np.sin(theta)
    return np.where(s > 0, c / np.maximum(s, 1e-300), 0.0)


def simulate_ping(rmap: ReflectivityMap, pose: tuple[float, float, float],
                  config: SensorConfig, law: LambertianLaw,
                  noise_sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Forward-model one raw ping at pose ``(x, lateral_offset, h)``.

    Bin j gets ``K * Phi(phi_j) * R(p_j) * f(theta_j)`` times relative
    Gaussian noise, clamped nonnegative; water-column bins (slant range
    above the seafloor) return 0. Reflectivity is sampled bilinearly at the
    bin's ground position.
    """
    x, y0, h = pose
    check_positive("altitude", h)
    r_s = config.bin_slant_ranges()
    floor = r_s >= h
    values = np.zeros(config.num_bins)
    if not floor.any():
        return values
    rs = r_s[floor]
    r_g = np.sqrt(np.maximum(rs * rs - h * h, 0.0))
    ratio = np.minimum(h / rs, 1.0)
    theta = np.arccos(ratio)
    phi = np.arcsin(ratio)

    ext_x, ext_y = rmap.extent_m
    if not (0 <= x <= ext_x) or y0 < 0 or y0 + r_g[-1] > ext_y:
        raise GeometryDomainError(
            f"swath footprint (x={x:.2f}, y up to {y0 + r_g[-1]:.2f}) outside map "
            f"extent ({ext_x:.2f}, {ext_y:.2f})")

    reflectivity = rmap.sample_bilinear(np.full_like(r_g, x), y0 + r_g)
    gains = _beam_gains_clamped(phi, config)
    factors = _forward_factors(theta, law)
    clean = config.lambertian_k * gains * reflectivity * factors
    if noise_sigma > 0:
        clean = clean * (1.0 + noise_sigma * rng.standard_normal(len(clean)))
    values[floor] = np.maximum(clean, 0.0)
    return values


@dataclass(frozen=True)
class KeypointCorrespondence:
    """One world point located in two survey lines, as (ping, bin) pairs."""

    line_a: str
    line_b: str
    kp_a: tuple[int, int]
    kp_b: tuple[int, int]
    side: Side = Side.STARBOARD


def _locate(point: tuple[float, float], spec: SurveyLineSpec,
            config: SensorConfig, spacing: float) -> tuple[int, int] | None:
    """(ping, bin) of a world point in one line, or None if not visible."""
    px, py = point
    ping = int(np.floor(px / spacing))
    if not 0 <= ping < spec.ping_count:
        return None
    r_g = py - spec.lateral_offset_m
    if r_g <= 0:
        return None
    r_s = math.hypot(r_g, spec.altitude_m)
    if r_s < spec.altitude_m / math.cos(config.theta0_rad):
        return None  # inside nadir cutoff
    bin_idx = int(r_s / config.slant_resolution_m)
    if bin_idx >= config.num_bins:
        return None
    return ping, bin_idx


def simulate_survey(rmap: ReflectivityMap, specs: list[SurveyLineSpec],
                    config: SensorConfig) -> tuple[list[Waterfall], list[KeypointCorrespondence]]:
    """Simulate every line and derive exact cross-line correspondences.

    Correspondences are emitted for each pair of lines, only at feature
    points visible (outside the nadir cutoff and within the swath) in both;
    invisible points are skipped with a warning.
    """
    if not rmap.feature_points_world:
        raise ValueError("reflectivity map defines no feature points")
    waterfalls = []
    for idx, spec in enumerate(specs):
        spacing = spec.ping_spacing_m or rmap.cell_size_m
        rng = np.random.default_rng([rmap.seed, idx])
        rows = [simulate_ping(rmap, ((p + 0.5) * spacing, spec.lateral_offset_m,
                                     spec.altitude_m),
                              config, spec.law, spec.noise_sigma, rng)
                for p in range(spec.ping_count)]
        waterfalls.append(Waterfall(
            intensities=np.vstack(rows),
            altitudes_m=np.full(spec.ping_count, spec.altitude_m),
            side=Side.STARBOARD,
            config=config,
            line_id=spec.line_id or f"line{idx}",
        ))

    correspondences = []
    for ia in range(len(specs)):
        for ib in range(ia + 1, len(specs)):
            spacing_a = specs[ia].ping_spacing_m or rmap.cell_size_m
            spacing_b = specs[ib].ping_spacing_m or rmap.cell_size_m
            for point in rmap.feature_points_world:
                kp_a = _locate(point, specs[ia], config, spacing_a)
                kp_b = _locate(point, specs[ib], config, spacing_b)
                if kp_a is None or kp_b is None:
                    warnings.warn(
                        f"feature point {point} not visible in both lines "
                        f"{waterfalls[ia].line_id}/{waterfalls[ib].line_id}; skipped",
                        stacklevel=2)
                    continue
                correspondences.append(KeypointCorrespondence(
                    line_a=waterfalls[ia].line_id, line_b=waterfalls[ib].line_id,
                    kp_a=kp_a, kp_b=kp_b))
    return waterfalls, correspondences

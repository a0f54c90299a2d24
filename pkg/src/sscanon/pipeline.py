"""Whole-waterfall orchestration.

Splits two-sided waterfalls, runs beam + incidence + slant-range correction
per ping onto one common ground grid, assembles the canonical image, and
keeps enough transform metadata to map raw keypoints into canonical
coordinates.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import FormatError, PipelineError
from .geometry import PingGeometry, SensorConfig, build_ping_geometry, ground_range_window
from .intensity import (IntensityPing, LambertianLaw, correct_beam_pattern,
                        correct_incidence, normalize_dynamic_range)
from .slantrange import GroundGrid, build_weight_kernel, resample_ping

THREADS_ENV = "SSCANON_THREADS"


class Side(enum.Enum):
    PORT = "port"
    STARBOARD = "starboard"


@dataclass(frozen=True)
class Waterfall:
    """One survey line, one side: pings x slant bins plus per-ping altitude."""

    intensities: np.ndarray
    altitudes_m: np.ndarray
    side: Side
    config: SensorConfig
    line_id: str

    def __post_init__(self):
        intensities = np.asarray(self.intensities, dtype=np.float64)
        altitudes = np.asarray(self.altitudes_m, dtype=np.float64)
        if intensities.ndim != 2:
            raise ValueError("intensities must be 2-D (pings x bins)")
        if intensities.shape[1] != self.config.num_bins:
            raise ValueError(
                f"waterfall has {intensities.shape[1]} bins but the sensor "
                f"config declares {self.config.num_bins}")
        if len(altitudes) != intensities.shape[0]:
            raise ValueError("one altitude per ping required")
        if np.any(altitudes <= 0) or not np.all(np.isfinite(altitudes)):
            raise ValueError("altitudes must be positive and finite")
        if np.any(intensities < 0) or not np.all(np.isfinite(intensities)):
            raise ValueError("intensities must be nonnegative and finite")
        intensities.flags.writeable = False
        altitudes.flags.writeable = False
        object.__setattr__(self, "intensities", intensities)
        object.__setattr__(self, "altitudes_m", altitudes)

    @property
    def num_pings(self) -> int:
        return self.intensities.shape[0]


@dataclass(frozen=True)
class CanonicalImage:
    """Pings x uniform ground-range bins in [0, 1], with validity mask."""

    values: np.ndarray
    validity: np.ndarray
    grid: GroundGrid
    law: LambertianLaw
    source_line_id: str
    side: Side

    def __post_init__(self):
        if self.values.shape != self.validity.shape:
            raise ValueError("values and validity shapes differ")
        if self.values.shape[1] != self.grid.num_bins:
            raise ValueError("image width does not match ground grid")
        if not np.all(np.isfinite(self.values[self.validity])):
            raise ValueError("values must be finite where valid")
        self.values.flags.writeable = False
        self.validity.flags.writeable = False

    @property
    def num_pings(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class TransformMeta:
    """Everything needed to send raw (ping, slant-bin) coordinates into the
    canonical frame of the image produced alongside it."""

    altitudes_m: np.ndarray
    grid: GroundGrid
    config: SensorConfig
    law: LambertianLaw
    source_line_id: str
    side: Side

    def __post_init__(self):
        self.altitudes_m.flags.writeable = False


def split_sides(full, altitudes_m=None, config: SensorConfig = None,
                line_id: str = "line"):
    """Split a two-sided waterfall matrix into port and starboard Waterfalls.

    The port half is mirrored left of nadir in the input, so it is flipped
    to make bin index increase with range on both outputs. A Waterfall
    passed in is treated as already split and returned unchanged.
    """
    if isinstance(full, Waterfall):
        return (full,)
    full = np.asarray(full, dtype=np.float64)
    if full.ndim != 2 or full.shape[1] % 2 != 0:
        raise FormatError(
            f"two-sided waterfall needs an even column count, got {full.shape}")
    half = full.shape[1] // 2
    if config is None:
        raise ValueError("config is required when splitting a raw matrix")
    if config.num_bins != half:
        raise FormatError(
            f"config.num_bins = {config.num_bins} but each side has {half} bins")
    port = Waterfall(intensities=np.ascontiguousarray(full[:, half - 1::-1]),
                     altitudes_m=altitudes_m, side=Side.PORT,
                     config=config, line_id=line_id)
    starboard = Waterfall(intensities=np.ascontiguousarray(full[:, half:]),
                          altitudes_m=altitudes_m, side=Side.STARBOARD,
                          config=config, line_id=line_id)
    return port, starboard


def default_ground_resolution(wf: Waterfall) -> float:
    """Mid-swath ground spacing of the first ping; the sane default for the
    arbitrary output resolution."""
    geom = build_ping_geometry(float(wf.altitudes_m[0]), wf.config)
    spacing = np.diff(geom.ground_ranges_m)
    return float(spacing[len(spacing) // 2])


def _common_grid(wf: Waterfall, delta_g: float) -> GroundGrid:
    """Intersection of the per-ping ground windows, snapped to delta_g."""
    r_s_max = wf.config.max_slant_range_m
    theta0 = wf.config.theta0_rad
    lows = np.empty(wf.num_pings)
    highs = np.empty(wf.num_pings)
    for p, h in enumerate(wf.altitudes_m):
        try:
            lows[p], highs[p] = ground_range_window(float(h), r_s_max, theta0)
        except Exception as exc:
            raise PipelineError(f"ping {p}: {exc}") from exc
    lo, hi = lows.max(), highs.min()
    start = math.ceil(lo / delta_g - 1e-9) * delta_g
    num = int(math.floor((hi - start) / delta_g + 1e-9))
    if num < 1:
        raise PipelineError(
            "empty common ground grid: ping "
            f"{int(np.argmax(lows))} pushes the near edge to {lo:.3f} m while "
            f"ping {int(np.argmin(highs))} caps the far edge at {hi:.3f} m")
    return GroundGrid(resolution_m=delta_g, start_m=start, num_bins=num)


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def canonify(wf: Waterfall, law: LambertianLaw, delta_g: float | None = None,
             clip_percentile: float = 99.9) -> tuple[CanonicalImage, TransformMeta]:
    """Transform one waterfall into its canonical representation.

    Per ping: beam-pattern correction, incidence correction under ``law``,
    then slant-range resampling onto a grid common to all pings (the
    intersection of per-ping ground windows, snapped to ``delta_g``).
    The assembled image is normalized to [0, 1] in one global step so that
    no along-track seams are introduced.
    """
    if delta_g is None:
        delta_g = default_ground_resolution(wf)
    grid = _common_grid(wf, delta_g)

    geoms: dict[float, PingGeometry] = {}
    kernels = {}
    for h in wf.altitudes_m:
        h = float(h)
        if h not in geoms:
            geoms[h] = build_ping_geometry(h, wf.config)
            kernels[h] = build_weight_kernel(geoms[h], grid)

    values = np.empty((wf.num_pings, grid.num_bins))
    validity = np.empty((wf.num_pings, grid.num_bins), dtype=bool)

    def process(p: int):
        h = float(wf.altitudes_m[p])
        geom = geoms[h]
        ping = IntensityPing(wf.intensities[p, geom.first_bin_index:])
        ping = correct_beam_pattern(ping, geom, wf.config)
        ping = correct_incidence(ping, geom, law)
        values[p], validity[p] = resample_ping(ping, kernels[h])

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(process, range(wf.num_pings)))
    else:
        for p in range(wf.num_pings):
            process(p)

    values[~validity] = np.nan
    values = normalize_dynamic_range(values, clip_percentile)
    validity &= np.isfinite(values)
    values = np.nan_to_num(values, nan=0.0)

    image = CanonicalImage(values=values, validity=validity, grid=grid, law=law,
                           source_line_id=wf.line_id, side=wf.side)
    meta = TransformMeta(altitudes_m=wf.altitudes_m.copy(), grid=grid,
                         config=wf.config, law=law,
                         source_line_id=wf.line_id, side=wf.side)
    return image, meta


def map_keypoint(kp: tuple[int, int], meta: TransformMeta) -> tuple[int, int] | None:
    """Map a raw (ping, slant-bin) keypoint into canonical coordinates.

    Returns None ("dropped") for keypoints inside the nadir cut or outside
    the common grid; raises for coordinates outside the source waterfall.
    """
    ping, bin_idx = kp
    if not 0 <= ping < len(meta.altitudes_m):
        raise ValueError(f"keypoint ping {ping} outside source waterfall")
    if not 0 <= bin_idx < meta.config.num_bins:
        raise ValueError(f"keypoint bin {bin_idx} outside source waterfall")
    h = float(meta.altitudes_m[ping])
    r_s = (bin_idx + 0.5) * meta.config.slant_resolution_m
    if r_s < h / math.cos(meta.config.theta0_rad):
        return None
    r_g = math.sqrt(r_s * r_s - h * h)
    g = int(np.rint((r_g - meta.grid.start_m) / meta.grid.resolution_m - 0.5))
    if not 0 <= g < meta.grid.num_bins:
        return None
    return int(ping), g

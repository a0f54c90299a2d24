"""Sensor-independent slant-range correction.

Each intensity-corrected bin is spread over its ground-range cell (the
interval between the midpoints to its neighbours); an output bin on a
uniform ground grid is the overlap-weighted average of the source cells it
intersects. Weights per output bin are normalized to sum to one, so every
valid output is a convex combination of inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryDomainError
from .geometry import PingGeometry, SensorConfig, build_ping_geometry
from .intensity import IntensityPing, Stage, _require_stage
from ._validation import check_count, check_positive


@dataclass(frozen=True)
class GroundGrid:
    """Uniform ground-range grid. ``start_m`` is the left edge of bin 0;
    bin ``i`` covers ``[start_m + i*res, start_m + (i+1)*res]`` with its
    center at ``start_m + (i + 1/2)*res``."""

    resolution_m: float
    start_m: float
    num_bins: int

    def __post_init__(self):
        check_positive("resolution_m", self.resolution_m)
        check_count("num_bins", self.num_bins)

    def edges(self) -> np.ndarray:
        return self.start_m + np.arange(self.num_bins + 1) * self.resolution_m

    def centers(self) -> np.ndarray:
        return self.start_m + (np.arange(self.num_bins) + 0.5) * self.resolution_m

    @property
    def end_m(self) -> float:
        return self.start_m + self.num_bins * self.resolution_m


@dataclass(frozen=True)
class WeightKernel:
    """Sparse row-stochastic mapping from source bins to ground-grid bins.

    Stored CSR-style: row ``i`` uses ``indices[indptr[i]:indptr[i+1]]`` and
    ``weights[indptr[i]:indptr[i+1]]``. Source indices inside a row are
    contiguous and increasing; empty rows mark output bins with no data.
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    num_sources: int

    def __post_init__(self):
        for arr in (self.indptr, self.indices, self.weights):
            arr.flags.writeable = False

    @property
    def num_rows(self) -> int:
        return len(self.indptr) - 1

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        sl = slice(self.indptr[i], self.indptr[i + 1])
        return self.indices[sl], self.weights[sl]

    def row_sums(self) -> np.ndarray:
        return np.add.reduceat(
            np.append(self.weights, 0.0), self.indptr[:-1])[: self.num_rows] \
            * (np.diff(self.indptr) > 0)

    def nonempty(self) -> np.ndarray:
        return np.diff(self.indptr) > 0

    def apply(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Weighted sums per row; returns (outputs, validity)."""
        values = np.asarray(values, dtype=np.float64)
        if len(values) != self.num_sources:
            raise ValueError(
                f"expected {self.num_sources} source values, got {len(values)}")
        contrib = self.weights * values[self.indices]
        out = np.add.reduceat(np.append(contrib, 0.0), self.indptr[:-1])[: self.num_rows]
        valid = self.nonempty()
        out[~valid] = 0.0
        return out, valid


def _source_cell_edges(ground_ranges: np.ndarray) -> np.ndarray:
    """Midpoint cell edges around each source ground range; the first and
    last cells are mirrored to full width from their inner spacing."""
    r = ground_ranges
    if len(r) < 2:
        raise GeometryDomainError("need at least two retained bins to form ground cells")
    edges = np.empty(len(r) + 1)
    edges[1:-1] = 0.5 * (r[:-1] + r[1:])
    edges[0] = r[0] - 0.5 * (r[1] - r[0])
    edges[-1] = r[-1] + 0.5 * (r[-1] - r[-2])
    return edges


def build_weight_kernel(geom: PingGeometry, grid: GroundGrid) -> WeightKernel:
    """Build the per-ping sparse resampling kernel for a ground grid.

    Output bin ``i`` collects every source cell it overlaps, weighted by the
    overlap length and normalized to sum to one. Boundary contributors get
    partial-overlap weights, interior contributors their full cell width.
    Output bins that overlap no source cell are left empty (no
    extrapolation beyond the measured swath).
    """
    src_edges = _source_cell_edges(geom.ground_ranges_m)
    out_edges = grid.edges()
    if out_edges[-1] <= src_edges[0] or out_edges[0] >= src_edges[-1]:
        raise GeometryDomainError(
            "ground grid does not overlap the ping's ground extent "
            f"[{src_edges[0]:.3f}, {src_edges[-1]:.3f}]")

    n_src = len(src_edges) - 1
    # first/last source cell with positive overlap per output bin
    j_lo = np.clip(np.searchsorted(src_edges, out_edges[:-1], side="right") - 1, 0, n_src - 1)
    j_hi = np.clip(np.searchsorted(src_edges, out_edges[1:], side="left") - 1, 0, n_src - 1)

    counts = np.zeros(grid.num_bins, dtype=np.int64)
    overlaps = (out_edges[1:] > src_edges[0]) & (out_edges[:-1] < src_edges[-1])
    counts[overlaps] = j_hi[overlaps] - j_lo[overlaps] + 1
    indptr = np.concatenate(([0], np.cumsum(counts)))

    indices = np.empty(indptr[-1], dtype=np.int64)
    weights = np.empty(indptr[-1], dtype=np.float64)
    for i in np.flatnonzero(overlaps):
        js = np.arange(j_lo[i], j_hi[i] + 1)
        w = (np.minimum(out_edges[i + 1], src_edges[js + 1])
             - np.maximum(out_edges[i], src_edges[js]))
        total = w.sum()
        sl = slice(indptr[i], indptr[i + 1])
        indices[sl] = js
        weights[sl] = w / total
    return WeightKernel(indptr=indptr, indices=indices, weights=weights,
                        num_sources=geom.num_retained)


def resample_ping(ping: IntensityPing, kernel: WeightKernel) -> tuple[np.ndarray, np.ndarray]:
    """Resample an intensity-corrected ping through a weight kernel.

    Returns the canonical ping values and a validity mask; invalid bins had
    no overlapping source data. Each valid output lies between the minimum
    and maximum of its contributing inputs.
    """
    _require_stage(ping, Stage.INCIDENCE_CORRECTED, "resample_ping")
    return kernel.apply(ping.values)


def oracle_resample(ping: IntensityPing, geom: PingGeometry, grid: GroundGrid,
                    supersample: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    """Brute-force reference resampler.

    Deposits every source bin's value uniformly over its ground cell (a
    piecewise-constant profile) and box-averages it into each grid bin with
    ``supersample`` evenly spaced probes per bin. Converges to
    :func:`resample_ping` as ``supersample`` grows; kept deliberately
    independent of the kernel construction.
    """
    if supersample < 100:
        raise ValueError(f"supersample must be >= 100, got {supersample}")
    if len(ping) != geom.num_retained:
        raise ValueError("ping length does not match geometry")
    src_edges = _source_cell_edges(geom.ground_ranges_m)
    left = grid.edges()[:-1]
    offsets = (np.arange(supersample) + 0.5) * (grid.resolution_m / supersample)
    probes = left[:, None] + offsets[None, :]
    cell = np.searchsorted(src_edges, probes, side="right") - 1
    inside = (cell >= 0) & (cell < geom.num_retained)
    vals = np.where(inside, ping.values[np.clip(cell, 0, geom.num_retained - 1)], 0.0)
    hits = inside.sum(axis=1)
    valid = hits > 0
    out = np.zeros(grid.num_bins)
    out[valid] = vals.sum(axis=1)[valid] / hits[valid]
    return out, valid


def slant_range_correct(ping: IntensityPing, h: float, config: SensorConfig,
                        grid: GroundGrid) -> tuple[np.ndarray, np.ndarray]:
    """Full per-ping slant-range correction onto a uniform ground grid."""
    geom = build_ping_geometry(h, config)
    return resample_ping(ping, build_weight_kernel(geom, grid))

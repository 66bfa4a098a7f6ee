"""Voxel down-sampling and Doppler range correction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from orora.core import CorrespondenceSet, Pose2, RadarPoint, cartesian_of


@dataclass(frozen=True)
class VoxelConfig:
    size: float = 0.8

    def __post_init__(self) -> None:
        if not self.size > 0:
            raise ValueError(f"voxel size must be positive, got {self.size}")


@dataclass(frozen=True)
class DopplerConfig:
    """``beta`` converts radial velocity (m/s) into a range bias (m)."""

    beta: float = 0.049
    scan_period: float = 0.25
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError(f"doppler beta must be non-negative, got {self.beta}")
        if not self.scan_period > 0:
            raise ValueError(f"scan period must be positive, got {self.scan_period}")


def voxel_sample(points: list[RadarPoint], cfg: VoxelConfig) -> list[RadarPoint]:
    """Keep one point per ``size x size`` cell.

    The survivor of each cell is the point nearest the mean of the cell's
    points (earliest input wins ties). Output is ordered by cell index.
    """
    if not points:
        return []
    xy = np.array([(p.x, p.y) for p in points])
    keep = voxel_sample_indices(xy, cfg.size)
    return [points[k] for k in keep]


def voxel_sample_indices(xy: np.ndarray, size: float) -> np.ndarray:
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    if len(xy) == 0:
        return np.zeros(0, dtype=int)
    cells = np.floor(xy / size).astype(np.int64)
    # lexsort keys are last-major: cell x, then cell y, then input order
    order = np.lexsort((np.arange(len(xy)), cells[:, 1], cells[:, 0]))
    sorted_cells = cells[order]
    starts = np.flatnonzero(np.any(np.diff(sorted_cells, axis=0) != 0, axis=1)) + 1
    keep = []
    for group in np.split(order, starts):
        centroid = xy[group].mean(axis=0)
        dist = np.sum((xy[group] - centroid) ** 2, axis=1)
        keep.append(group[int(np.argmin(dist))])
    return np.array(keep, dtype=int)


def doppler_shift(azimuths: np.ndarray, velocity_x: float, beta: float) -> np.ndarray:
    """Range bias of a beam at ``azimuths`` for a sensor moving forward."""
    return beta * velocity_x * np.cos(azimuths)


def doppler_compensate(
    corr: CorrespondenceSet, prev_pose: Pose2, cfg: DopplerConfig
) -> CorrespondenceSet:
    """Add the Doppler range bias back onto every point of both scans.

    Velocity comes from the previous relative pose under a constant-velocity,
    no-side-slip model (lateral velocity is taken as zero). Azimuths are left
    bit-identical; ranges that would turn negative are clipped at zero.
    """
    velocity_x = prev_pose.x / cfg.scan_period
    if not cfg.enabled or cfg.beta == 0.0 or velocity_x == 0.0 or len(corr) == 0:
        return corr
    src = corr.src_polar.copy()
    dst = corr.dst_polar.copy()
    for polar in (src, dst):
        polar[:, 0] = np.maximum(polar[:, 0] + doppler_shift(polar[:, 1], velocity_x, cfg.beta), 0.0)
    return CorrespondenceSet(
        cartesian_of(src), cartesian_of(dst), src, dst, corr.src_index, corr.dst_index
    )

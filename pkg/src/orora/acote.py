"""Per-axis translation by interval consensus with inverse-variance averaging.

Once the rotation is fixed, every correspondence votes for the translation
with ``v = q - R p``. Each axis is solved on its own: every vote defines an
interval ``[v - s, v + s]``; for each gap between consecutive interval
endpoints the votes whose interval covers the gap form a consensus set, whose
inverse-variance mean is a candidate. The candidate minimising::

    sum_{in} ((t - v) / s)^2 + sum_{out} s

wins, so excluding a vote costs its own standard deviation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from orora.core import CorrespondenceSet, DegenerateError, rotation_matrix
from orora.uncertainty import NoiseParams, polar_covariances, rotate_covariance

TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TranslationMeasurement:
    """``(M, 2)`` translation votes and their per-axis standard deviations."""

    v: np.ndarray
    sigma: np.ndarray

    def __len__(self) -> int:
        return len(self.v)


@dataclass(frozen=True, eq=False)
class BoundarySet:
    values: np.ndarray
    owner: np.ndarray
    is_upper: np.ndarray


@dataclass(frozen=True, eq=False)
class AxisEstimate:
    value: float
    inliers: np.ndarray
    probe: float
    cost: float


def build_measurements(
    inliers: CorrespondenceSet,
    rotation: float,
    noise: NoiseParams,
    sigma_floor: float = 1e-4,
) -> TranslationMeasurement:
    if len(inliers) == 0:
        raise DegenerateError("no correspondences for translation")
    rot = rotation_matrix(rotation)
    v = inliers.dst_xy - inliers.src_xy @ rot.T
    cov_src = inliers.covariances_src
    if cov_src is None:
        cov_src = polar_covariances(inliers.src_polar[:, 0], inliers.src_polar[:, 1], noise)
    cov_dst = inliers.covariances_dst
    if cov_dst is None:
        cov_dst = polar_covariances(inliers.dst_polar[:, 0], inliers.dst_polar[:, 1], noise)
    cov = cov_dst + rotate_covariance(cov_src, rot)
    sigma = np.sqrt(np.maximum(np.diagonal(cov, axis1=1, axis2=2), 0.0))
    return TranslationMeasurement(v, np.maximum(sigma, sigma_floor))


def boundary_set(values: np.ndarray, sigmas: np.ndarray) -> BoundarySet:
    m = len(values)
    ends = np.concatenate((values - sigmas, values + sigmas))
    owner = np.concatenate((np.arange(m), np.arange(m)))
    upper = np.concatenate((np.zeros(m, dtype=bool), np.ones(m, dtype=bool)))
    order = np.argsort(ends, kind="stable")
    return BoundarySet(ends[order], owner[order], upper[order])


def _better(cost: float, size: int, value: float, best: tuple[float, int, float]) -> bool:
    b_cost, b_size, b_value = best
    if cost < b_cost - TIE_TOL:
        return True
    if cost > b_cost + TIE_TOL:
        return False
    if size != b_size:
        return size > b_size
    return abs(value) < abs(b_value)


def estimate_axis(values: np.ndarray, sigmas: np.ndarray) -> AxisEstimate:
    """Solve one axis; ``values`` and ``sigmas`` are the votes and their spreads."""
    values = np.asarray(values, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    if len(values) == 0:
        raise DegenerateError("no translation votes on this axis")
    ends = boundary_set(values, sigmas).values
    gaps = np.flatnonzero(np.diff(ends) > 0)
    probes = 0.5 * (ends[gaps] + ends[gaps + 1])
    members = (probes[:, None] - values[None, :]) ** 2 <= sigmas[None, :] ** 2
    inv_var = 1.0 / sigmas**2
    weight_sum = members @ inv_var
    nonempty = weight_sum > 0
    members, probes, weight_sum = members[nonempty], probes[nonempty], weight_sum[nonempty]
    means = (members @ (values * inv_var)) / weight_sum
    fit = np.where(members, ((means[:, None] - values[None, :]) / sigmas[None, :]) ** 2, 0.0)
    costs = fit.sum(axis=1) + (~members) @ sigmas
    sizes = members.sum(axis=1)

    best_g = 0
    for g in range(1, len(costs)):
        if _better(costs[g], sizes[g], means[g], (costs[best_g], sizes[best_g], means[best_g])):
            best_g = g
    return AxisEstimate(
        float(means[best_g]), np.flatnonzero(members[best_g]), float(probes[best_g]),
        float(costs[best_g]),
    )


def estimate_translation(
    inliers: CorrespondenceSet,
    rotation: float,
    noise: NoiseParams,
    sigma_floor: float = 1e-4,
) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
    meas = build_measurements(inliers, rotation, noise, sigma_floor)
    x = estimate_axis(meas.v[:, 0], meas.sigma[:, 0])
    y = estimate_axis(meas.v[:, 1], meas.sigma[:, 1])
    return np.array([x.value, y.value]), (x.inliers, y.inliers)

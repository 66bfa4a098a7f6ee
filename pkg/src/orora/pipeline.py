"""Frame-to-frame odometry: Doppler -> clique pruning -> rotation -> translation."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from orora.acote import estimate_translation
from orora.core import CorrespondenceSet, DegenerateError, Pose2
from orora.gnc import GncConfig, estimate_rotation
from orora.mcis import prune
from orora.preprocess import DopplerConfig, VoxelConfig, doppler_compensate
from orora.uncertainty import NoiseParams

log = logging.getLogger(__name__)

STAGES = ("doppler", "mcis", "rotation", "translation")

# (voxel size, truncation bound, bearing sigma in degrees)
PRESETS = {
    "obstructed": (0.6, 0.75, 10.8),
    "open": (0.8, 1.0, 1.8),
}


@dataclass(frozen=True)
class OdometryConfig:
    noise: NoiseParams = field(default_factory=NoiseParams)
    doppler: DopplerConfig = field(default_factory=DopplerConfig)
    voxel: VoxelConfig = field(default_factory=VoxelConfig)
    gnc: GncConfig = field(default_factory=GncConfig)
    mcis_cbar: float = 1.0
    mcis_time_budget_ms: float = 100.0
    sigma_floor: float = 1e-4
    preset: str = "open"

    def __post_init__(self) -> None:
        if self.preset not in PRESETS:
            raise ValueError(f"preset must be one of {sorted(PRESETS)}, got {self.preset!r}")
        if not self.mcis_cbar > 0:
            raise ValueError(f"mcis cbar must be positive, got {self.mcis_cbar}")
        if not self.sigma_floor > 0:
            raise ValueError(f"sigma floor must be positive, got {self.sigma_floor}")

    @classmethod
    def from_preset(cls, name: str, **overrides) -> OdometryConfig:
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        voxel, cbar, sigma_az_deg = PRESETS[name]
        cfg = cls(
            noise=NoiseParams(0.1, math.radians(sigma_az_deg)),
            voxel=VoxelConfig(voxel),
            gnc=GncConfig(cbar=cbar, kappa=1.4),
            mcis_cbar=cbar,
            preset=name,
        )
        return replace(cfg, **overrides)


@dataclass
class FrameResult:
    """Estimate for one frame: ``pose`` maps scan-t points into scan t-1."""

    pose: Pose2
    inlier_count: int
    outlier_count: int
    gnc_iterations: int = 0
    timings_us: dict[str, int] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    stage_trace: list[str] = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return "degenerate" in self.flags


def estimate_frame(
    corr: CorrespondenceSet, prev_pose: Pose2, cfg: OdometryConfig | None = None
) -> FrameResult:
    """Relative pose of scan t in scan t-1 from putative correspondences.

    Any stage running out of usable data yields ``prev_pose`` again (constant
    velocity) with the ``degenerate`` flag set.
    """
    cfg = cfg or OdometryConfig()
    n = len(corr)
    result = FrameResult(prev_pose, 0, n)
    clock = time.perf_counter_ns

    def stage(name: str, fn, *args):
        start = clock()
        out = fn(*args)
        result.timings_us[name] = (clock() - start) // 1000
        result.stage_trace.append(name)
        return out

    try:
        if n == 0:
            raise DegenerateError("no correspondences")
        compensated = stage("doppler", doppler_compensate, corr, prev_pose, cfg.doppler)
        pruned = stage(
            "mcis", prune, compensated, cfg.noise, cfg.mcis_cbar, cfg.mcis_time_budget_ms
        )
        result.inlier_count = len(pruned.inliers)
        result.outlier_count = n - result.inlier_count
        if not pruned.exact:
            result.flags.append("suboptimal_clique")
        gnc = stage("rotation", estimate_rotation, pruned.inliers, cfg.gnc)
        result.gnc_iterations = gnc.iteration
        if not gnc.converged:
            result.flags.append("non_converged")
        t, _ = stage(
            "translation", estimate_translation, pruned.inliers, gnc.rotation, cfg.noise,
            cfg.sigma_floor,
        )
    except DegenerateError as exc:
        log.debug("degenerate frame: %s", exc)
        result.pose = prev_pose
        result.flags.append("degenerate")
        return result
    result.pose = Pose2(gnc.rotation, (float(t[0]), float(t[1])))
    return result


def run_sequence(
    frames: Iterable[CorrespondenceSet], cfg: OdometryConfig | None = None
) -> tuple[list[Pose2], list[FrameResult]]:
    """Chain frame estimates into absolute poses, starting at the identity."""
    cfg = cfg or OdometryConfig()
    trajectory = [Pose2.identity()]
    results: list[FrameResult] = []
    prev = Pose2.identity()
    for corr in frames:
        res = estimate_frame(corr, prev, cfg)
        results.append(res)
        trajectory.append(trajectory[-1] @ res.pose)
        prev = res.pose
    if not results:
        raise ValueError("run_sequence needs at least one frame")
    return trajectory, results


def pose_error(estimate: Pose2, truth: Pose2) -> tuple[float, float]:
    """(translation error in m, absolute rotation error in rad)."""
    dt = float(np.hypot(estimate.x - truth.x, estimate.y - truth.y))
    return dt, abs(Pose2(estimate.angle - truth.angle).angle)

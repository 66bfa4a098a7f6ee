"""Synthetic correspondences with known ground truth.

Inlier destinations are the rigidly moved sources with range and bearing
noise applied exactly (bearing noise rotates the point about the sensor
rather than shifting it along the tangent). Outlier destinations are drawn
from the same workspace distribution as the sources.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from orora.core import CorrespondenceSet, Pose2
from orora.preprocess import DopplerConfig, doppler_shift
from orora.uncertainty import NoiseParams

SHAPES = ("disk", "corridor")
NOISE_MODELS = ("gaussian", "bounded")
MIN_RANGE = 2.0


@dataclass(frozen=True)
class SceneSpec:
    """Recipe for one synthetic frame or sequence.

    ``extent`` is the workspace diameter in metres. ``noise=None`` gives
    noiseless inliers; ``noise_model="bounded"`` draws each perturbation
    uniformly within one standard deviation instead of from a Gaussian.
    ``pose=None`` draws a random relative pose per frame. ``doppler_beta``
    only affects sequences, where frame ``k`` is range-biased by the
    velocity of frame ``k - 1``; its default matches the compensation
    default so a default sequence is undone exactly by the pipeline.
    """

    point_count: int = 200
    extent: float = 100.0
    pose: Pose2 | None = None
    outlier_ratio: float = 0.0
    noise: NoiseParams | None = None
    noise_model: str = "gaussian"
    shape: str = "disk"
    seed: int = 0
    max_rotation: float = math.radians(30.0)
    max_translation: float = 5.0
    doppler_beta: float = DopplerConfig.beta
    scan_period: float = DopplerConfig.scan_period

    def __post_init__(self) -> None:
        if self.point_count < 0:
            raise ValueError(f"point_count must be non-negative, got {self.point_count}")
        if not 0.0 <= self.outlier_ratio < 1.0:
            raise ValueError(f"outlier_ratio must lie in [0, 1), got {self.outlier_ratio}")
        if not self.extent > 2 * MIN_RANGE:
            raise ValueError(f"extent must exceed {2 * MIN_RANGE} m, got {self.extent}")
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(f"noise_model must be one of {NOISE_MODELS}, got {self.noise_model!r}")

    def with_env_seed(self) -> SceneSpec:
        """Apply the ``ORORA_SEED`` override, if set."""
        env = os.environ.get("ORORA_SEED")
        return self if env is None else replace(self, seed=int(env))


def sample_workspace(rng: np.random.Generator, n: int, spec: SceneSpec) -> np.ndarray:
    radius = spec.extent / 2.0
    if spec.shape == "disk":
        r = np.sqrt(rng.uniform(MIN_RANGE**2, radius**2, n))
        phi = rng.uniform(-math.pi, math.pi, n)
        return np.column_stack((r * np.cos(phi), r * np.sin(phi)))
    # corridor: long along x, narrow along y, nothing right at the sensor
    x = rng.uniform(-radius, radius, n)
    y = rng.uniform(MIN_RANGE, radius / 8.0, n) * rng.choice((-1.0, 1.0), n)
    return np.column_stack((x, y))


def perturb(
    xy: np.ndarray, noise: NoiseParams, rng: np.random.Generator, model: str = "gaussian"
) -> np.ndarray:
    """Apply range noise and an exact bearing rotation to each point."""
    n = len(xy)
    if model == "gaussian":
        d_range = rng.normal(0.0, noise.sigma_range, n)
        d_az = rng.normal(0.0, noise.sigma_azimuth, n)
    else:
        d_range = rng.uniform(-noise.sigma_range, noise.sigma_range, n)
        d_az = rng.uniform(-noise.sigma_azimuth, noise.sigma_azimuth, n)
    rng_true = np.hypot(xy[:, 0], xy[:, 1])
    az = np.arctan2(xy[:, 1], xy[:, 0]) + d_az
    r = np.maximum(rng_true + d_range, 0.0)
    return np.column_stack((r * np.cos(az), r * np.sin(az)))


def random_pose(rng: np.random.Generator, spec: SceneSpec) -> Pose2:
    angle = rng.uniform(-spec.max_rotation, spec.max_rotation)
    t = rng.uniform(-spec.max_translation, spec.max_translation, 2)
    return Pose2(angle, (t[0], t[1]))


def _pair(
    rng: np.random.Generator, spec: SceneSpec, pose: Pose2
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = spec.point_count
    src = sample_workspace(rng, n, spec)
    dst = pose.transform(src)
    if spec.noise is not None:
        dst = perturb(dst, spec.noise, rng, spec.noise_model)
    n_out = int(round(spec.outlier_ratio * n))
    inlier = np.ones(n, dtype=bool)
    inlier[rng.choice(n, n_out, replace=False)] = False
    dst[~inlier] = sample_workspace(rng, n_out, spec)
    return src, dst, inlier


def generate_pair(spec: SceneSpec) -> tuple[CorrespondenceSet, Pose2, np.ndarray]:
    """One frame: correspondences, the true pose and per-row inlier labels."""
    rng = np.random.default_rng(spec.seed)
    pose = spec.pose if spec.pose is not None else random_pose(rng, spec)
    src, dst, inlier = _pair(rng, spec, pose)
    return CorrespondenceSet.from_arrays(src, dst), pose, inlier


def generate_sequence(
    spec: SceneSpec, frames: int
) -> tuple[list[CorrespondenceSet], list[Pose2], list[np.ndarray]]:
    """``frames`` consecutive frames and the absolute ground-truth trajectory.

    The trajectory has ``frames + 1`` poses starting at the identity.
    """
    rng = np.random.default_rng(spec.seed)
    sets, labels = [], []
    trajectory = [Pose2.identity()]
    prev = Pose2.identity()
    for _ in range(frames):
        pose = spec.pose if spec.pose is not None else random_pose(rng, spec)
        src, dst, inlier = _pair(rng, spec, pose)
        corr = CorrespondenceSet.from_arrays(src, dst)
        velocity_x = prev.x / spec.scan_period
        if spec.doppler_beta > 0 and velocity_x != 0:
            src_polar, dst_polar = corr.src_polar.copy(), corr.dst_polar.copy()
            for polar in (src_polar, dst_polar):
                polar[:, 0] -= doppler_shift(polar[:, 1], velocity_x, spec.doppler_beta)
            corr = CorrespondenceSet.from_polar(src_polar, dst_polar)
        sets.append(corr)
        labels.append(inlier)
        trajectory.append(trajectory[-1] @ pose)
        prev = pose
    return sets, trajectory, labels

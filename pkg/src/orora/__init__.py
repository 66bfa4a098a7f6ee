"""Outlier-robust 2D radar odometry from putative point correspondences."""

from orora.core import (
    CorrespondenceSet,
    DegenerateError,
    Pose2,
    RadarPoint,
    ScanGeometry,
    polar_to_cartesian,
)
from orora.gnc import GncConfig, estimate_rotation
from orora.acote import estimate_axis, estimate_translation
from orora.mcis import build_consistency_graph, max_clique, prune
from orora.metrics import evaluate
from orora.pipeline import FrameResult, OdometryConfig, estimate_frame, run_sequence
from orora.preprocess import DopplerConfig, VoxelConfig, doppler_compensate, voxel_sample
from orora.uncertainty import NoiseParams, point_covariance

__all__ = [
    "CorrespondenceSet",
    "DegenerateError",
    "DopplerConfig",
    "FrameResult",
    "GncConfig",
    "NoiseParams",
    "OdometryConfig",
    "Pose2",
    "RadarPoint",
    "ScanGeometry",
    "VoxelConfig",
    "build_consistency_graph",
    "doppler_compensate",
    "estimate_axis",
    "estimate_frame",
    "estimate_rotation",
    "estimate_translation",
    "evaluate",
    "max_clique",
    "point_covariance",
    "polar_to_cartesian",
    "prune",
    "run_sequence",
    "voxel_sample",
]

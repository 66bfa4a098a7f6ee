"""Segment-based relative trajectory error (translation % and deg/100 m).

For every start frame and every segment length ``L`` the first frame at
least ``L`` metres further along the ground-truth path closes a segment. The
relative motion over the segment is compared between estimate and truth;
translation error is normalised by ``L`` and reported in percent, rotation
error in degrees per 100 m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from orora.core import Pose2

DEFAULT_SEGMENTS = (100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0)
LENGTH_TOL = 1e-9


@dataclass(frozen=True)
class SegmentError:
    first: int
    last: int
    length: float
    translation: float
    rotation: float


@dataclass(frozen=True)
class TrajectoryError:
    t_rel: float
    r_rel: float
    segments: list[SegmentError] = field(default_factory=list)


def path_distances(trajectory: Sequence[Pose2]) -> np.ndarray:
    xy = np.array([p.translation for p in trajectory])
    steps = np.hypot(*np.diff(xy, axis=0).T) if len(xy) > 1 else np.zeros(0)
    return np.concatenate(([0.0], np.cumsum(steps)))


def evaluate(
    estimated: Sequence[Pose2],
    truth: Sequence[Pose2],
    segment_lengths: Sequence[float] = DEFAULT_SEGMENTS,
) -> TrajectoryError:
    if len(estimated) != len(truth):
        raise ValueError(f"trajectory lengths differ: {len(estimated)} vs {len(truth)}")
    if len(truth) < 2:
        raise ValueError("need at least two poses to evaluate")
    dist = path_distances(truth)
    segments = []
    for first in range(len(truth)):
        for length in segment_lengths:
            target = dist[first] + length - LENGTH_TOL
            last = int(np.searchsorted(dist, target, side="left"))
            if last >= len(truth):
                continue
            delta_gt = truth[first].inverse() @ truth[last]
            delta_est = estimated[first].inverse() @ estimated[last]
            err = delta_est.inverse() @ delta_gt
            segments.append(
                SegmentError(first, last, float(length), math.hypot(*err.translation), abs(err.angle))
            )
    if not segments:
        raise ValueError(
            f"trajectory covers {dist[-1]:.3f} m, shorter than the smallest segment "
            f"({min(segment_lengths)} m)"
        )
    t_rel = 100.0 * float(np.mean([s.translation / s.length for s in segments]))
    r_rel = 100.0 * float(np.mean([math.degrees(s.rotation) / s.length for s in segments]))
    return TrajectoryError(t_rel, r_rel, segments)

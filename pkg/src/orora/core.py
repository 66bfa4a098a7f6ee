"""Geometric value types shared by every stage of the estimator.

Points are kept in both Cartesian and polar form. Correspondence sets store
their points as parallel numpy arrays so the numerical stages can stay
vectorised; :class:`RadarPoint` and :class:`Correspondence` are per-element
views on top of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class DegenerateError(ValueError):
    """Raised when a stage has too little data to produce an estimate."""


def wrap_angle(angle: float) -> float:
    """Wrap ``angle`` to the half-open interval (-pi, pi]."""
    wrapped = math.remainder(angle, TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


def wrap_angles(angles: np.ndarray) -> np.ndarray:
    wrapped = np.remainder(np.asarray(angles, dtype=float) + math.pi, TWO_PI) - math.pi
    wrapped[wrapped <= -math.pi] += TWO_PI
    return wrapped


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class ScanGeometry:
    """Pixel layout of a polar radar image.

    ``rows`` is the number of range bins, ``cols`` the number of azimuth bins
    and ``range_resolution`` the metres covered by one range bin.
    """

    rows: int
    cols: int
    range_resolution: float

    def __post_init__(self) -> None:
        if self.rows <= 0 or self.cols <= 0 or not self.range_resolution > 0:
            raise ValueError(f"scan geometry must be positive, got {self}")


@dataclass(frozen=True)
class RadarPoint:
    x: float
    y: float
    range: float
    azimuth: float

    @classmethod
    def from_cartesian(cls, x: float, y: float) -> RadarPoint:
        rng = math.hypot(x, y)
        azimuth = wrap_angle(math.atan2(y, x)) if rng > 0.0 else 0.0
        return cls(float(x), float(y), rng, azimuth)

    @classmethod
    def from_polar(cls, rng: float, azimuth: float) -> RadarPoint:
        if rng < 0.0:
            raise ValueError(f"range must be non-negative, got {rng}")
        azimuth = wrap_angle(azimuth) if rng > 0.0 else 0.0
        return cls(rng * math.cos(azimuth), rng * math.sin(azimuth), float(rng), azimuth)

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])


def polar_to_cartesian(h: float, w: float, geometry: ScanGeometry) -> RadarPoint:
    """Convert a feature at pixel (row ``h``, column ``w``) to a point."""
    if h < 0 or w < 0:
        raise ValueError(f"pixel coordinates must be non-negative, got ({h}, {w})")
    if w >= geometry.cols:
        raise ValueError(f"azimuth column {w} outside [0, {geometry.cols})")
    return RadarPoint.from_polar(h * geometry.range_resolution, TWO_PI * w / geometry.cols)


@dataclass(frozen=True)
class Pose2:
    """Rigid transform in the plane: ``x -> R(angle) @ x + translation``."""

    angle: float = 0.0
    translation: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "angle", wrap_angle(float(self.angle)))
        tx, ty = self.translation
        object.__setattr__(self, "translation", (float(tx), float(ty)))

    @classmethod
    def identity(cls) -> Pose2:
        return cls()

    @classmethod
    def from_xyyaw(cls, x: float, y: float, yaw: float) -> Pose2:
        return cls(yaw, (x, y))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> Pose2:
        m = np.asarray(matrix, dtype=float)
        return cls(math.atan2(m[1, 0], m[0, 0]), (m[0, 2], m[1, 2]))

    @property
    def x(self) -> float:
        return self.translation[0]

    @property
    def y(self) -> float:
        return self.translation[1]

    @property
    def rotation(self) -> np.ndarray:
        return rotation_matrix(self.angle)

    def as_matrix(self) -> np.ndarray:
        m = np.eye(3)
        m[:2, :2] = self.rotation
        m[:2, 2] = self.translation
        return m

    def compose(self, other: Pose2) -> Pose2:
        """Return ``self * other`` (apply ``other`` first)."""
        c, s = math.cos(self.angle), math.sin(self.angle)
        ox, oy = other.translation
        return Pose2(
            self.angle + other.angle,
            (c * ox - s * oy + self.x, s * ox + c * oy + self.y),
        )

    __matmul__ = compose

    def inverse(self) -> Pose2:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return Pose2(-self.angle, (-(c * self.x + s * self.y), s * self.x - c * self.y))

    def transform(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + np.asarray(self.translation)


@dataclass(frozen=True)
class Correspondence:
    src_index: int
    dst_index: int
    src: RadarPoint
    dst: RadarPoint


def _polar_of(xy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rng = np.hypot(xy[:, 0], xy[:, 1])
    az = np.where(rng > 0.0, np.arctan2(xy[:, 1], xy[:, 0]), 0.0)
    az[az <= -math.pi] += TWO_PI
    return rng, az


@dataclass(frozen=True, eq=False)
class CorrespondenceSet:
    """Putative matches between scan ``t`` (src, p) and scan ``t-1`` (dst, q).

    Row ``k`` pairs ``src_xy[k]`` with ``dst_xy[k]``. Ranges and azimuths are
    carried alongside so range corrections can leave the azimuth untouched.
    Covariance arrays are optional and, when present, have shape ``(N, 2, 2)``.
    """

    src_xy: np.ndarray
    dst_xy: np.ndarray
    src_polar: np.ndarray
    dst_polar: np.ndarray
    src_index: np.ndarray
    dst_index: np.ndarray
    covariances_src: np.ndarray | None = field(default=None)
    covariances_dst: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        n = len(self.src_xy)
        for name in ("dst_xy", "src_polar", "dst_polar", "src_index", "dst_index"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, expected {n}")
        if len(np.unique(self.src_index)) != n or len(np.unique(self.dst_index)) != n:
            raise ValueError("a point may appear in at most one correspondence")
        for name in ("covariances_src", "covariances_dst"):
            cov = getattr(self, name)
            if cov is not None and cov.shape != (n, 2, 2):
                raise ValueError(f"{name} has shape {cov.shape}, expected {(n, 2, 2)}")

    @classmethod
    def from_arrays(
        cls,
        src_xy: Sequence | np.ndarray,
        dst_xy: Sequence | np.ndarray,
        src_index: Sequence[int] | np.ndarray | None = None,
        dst_index: Sequence[int] | np.ndarray | None = None,
    ) -> CorrespondenceSet:
        src = np.asarray(src_xy, dtype=float).reshape(-1, 2)
        dst = np.asarray(dst_xy, dtype=float).reshape(-1, 2)
        if src.shape != dst.shape:
            raise ValueError(f"src and dst differ in shape: {src.shape} vs {dst.shape}")
        if not (np.all(np.isfinite(src)) and np.all(np.isfinite(dst))):
            raise ValueError("correspondence coordinates must be finite")
        n = len(src)
        src_index = np.arange(n) if src_index is None else np.asarray(src_index, dtype=int)
        dst_index = np.arange(n) if dst_index is None else np.asarray(dst_index, dtype=int)
        return cls(
            src, dst, np.column_stack(_polar_of(src)), np.column_stack(_polar_of(dst)),
            src_index, dst_index,
        )

    @classmethod
    def from_polar(
        cls,
        src_polar: np.ndarray,
        dst_polar: np.ndarray,
        src_index: np.ndarray | None = None,
        dst_index: np.ndarray | None = None,
    ) -> CorrespondenceSet:
        sp = np.asarray(src_polar, dtype=float).reshape(-1, 2).copy()
        dp = np.asarray(dst_polar, dtype=float).reshape(-1, 2).copy()
        for polar in (sp, dp):
            if np.any(polar[:, 0] < 0):
                raise ValueError("ranges must be non-negative")
            polar[:, 1] = np.where(polar[:, 0] > 0, wrap_angles(polar[:, 1]), 0.0)
        n = len(sp)
        return cls(
            cartesian_of(sp), cartesian_of(dp), sp, dp,
            np.arange(n) if src_index is None else np.asarray(src_index, dtype=int),
            np.arange(n) if dst_index is None else np.asarray(dst_index, dtype=int),
        )

    @classmethod
    def from_pairs(cls, pairs: Sequence[Correspondence]) -> CorrespondenceSet:
        def table(fields):
            return np.array([fields(c) for c in pairs], dtype=float).reshape(-1, 2)

        return cls(
            table(lambda c: (c.src.x, c.src.y)),
            table(lambda c: (c.dst.x, c.dst.y)),
            table(lambda c: (c.src.range, c.src.azimuth)),
            table(lambda c: (c.dst.range, c.dst.azimuth)),
            np.array([c.src_index for c in pairs], dtype=int),
            np.array([c.dst_index for c in pairs], dtype=int),
        )

    def __len__(self) -> int:
        return len(self.src_xy)

    def __iter__(self) -> Iterator[Correspondence]:
        for k in range(len(self)):
            yield self[k]

    def __getitem__(self, k: int) -> Correspondence:
        return Correspondence(
            int(self.src_index[k]),
            int(self.dst_index[k]),
            RadarPoint(*self.src_xy[k], *self.src_polar[k]),
            RadarPoint(*self.dst_xy[k], *self.dst_polar[k]),
        )

    @property
    def pairs(self) -> list[Correspondence]:
        return list(self)

    def subset(self, rows: Sequence[int] | np.ndarray) -> CorrespondenceSet:
        """Rows ``rows`` in the given order, covariances included."""
        rows = np.asarray(rows, dtype=int)
        return CorrespondenceSet(
            self.src_xy[rows], self.dst_xy[rows], self.src_polar[rows], self.dst_polar[rows],
            self.src_index[rows], self.dst_index[rows],
            None if self.covariances_src is None else self.covariances_src[rows],
            None if self.covariances_dst is None else self.covariances_dst[rows],
        )

    def with_covariances(self, src: np.ndarray, dst: np.ndarray) -> CorrespondenceSet:
        return CorrespondenceSet(
            self.src_xy, self.dst_xy, self.src_polar, self.dst_polar,
            self.src_index, self.dst_index, src, dst,
        )


def cartesian_of(polar: np.ndarray) -> np.ndarray:
    return np.column_stack((polar[:, 0] * np.cos(polar[:, 1]), polar[:, 0] * np.sin(polar[:, 1])))

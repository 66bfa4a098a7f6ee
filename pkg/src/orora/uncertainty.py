"""Anisotropic noise model of radar feature points.

A point observed at range ``g`` and bearing ``theta`` is perturbed along the
beam by the range noise and across the beam by the bearing noise, which
grows linearly with range. To first order the position error is::

    d = [u | g * B @ u] @ [d_range, d_azimuth]

with ``u = (cos theta, sin theta)`` and ``B`` the 90 degree rotation, so the
covariance is ``A @ diag(sigma_range**2, sigma_azimuth**2) @ A.T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from orora.core import Pose2, RadarPoint, rotation_matrix


@dataclass(frozen=True)
class NoiseParams:
    sigma_range: float = 0.1
    sigma_azimuth: float = float(np.deg2rad(1.8))

    def __post_init__(self) -> None:
        if not (self.sigma_range > 0 and self.sigma_azimuth > 0):
            raise ValueError(f"noise standard deviations must be positive, got {self}")

    def radius(self, ranges: np.ndarray | float) -> np.ndarray | float:
        """First-order bound on the displacement of a point at ``ranges``."""
        return self.sigma_range + np.asarray(ranges) * self.sigma_azimuth


def point_covariance(p: RadarPoint, noise: NoiseParams) -> np.ndarray:
    """2x2 covariance of a single point (see module docstring)."""
    if p.range < 0:
        raise ValueError(f"range must be non-negative, got {p.range}")
    return polar_covariances(np.array([p.range]), np.array([p.azimuth]), noise)[0]


def polar_covariances(ranges: np.ndarray, azimuths: np.ndarray, noise: NoiseParams) -> np.ndarray:
    """Vectorised :func:`point_covariance`; returns shape ``(N, 2, 2)``."""
    ranges = np.asarray(ranges, dtype=float)
    azimuths = np.where(ranges > 0, azimuths, 0.0)
    u = np.stack((np.cos(azimuths), np.sin(azimuths)), axis=-1)
    bu = np.stack((-u[:, 1], u[:, 0]), axis=-1)
    radial = noise.sigma_range**2 * np.einsum("ni,nj->nij", u, u)
    lateral = (ranges * noise.sigma_azimuth)[:, None, None] ** 2 * np.einsum("ni,nj->nij", bu, bu)
    return radial + lateral


def rotate_covariance(cov: np.ndarray, rotation: float | np.ndarray | Pose2) -> np.ndarray:
    """``R @ C @ R.T`` for one ``(2, 2)`` or a stack of ``(N, 2, 2)`` covariances.

    ``rotation`` may be an angle, a 2x2 matrix or a :class:`Pose2` (whose
    translation is ignored).
    """
    if isinstance(rotation, Pose2):
        rot = rotation.rotation
    elif np.ndim(rotation) == 0:
        rot = rotation_matrix(float(rotation))
    else:
        rot = np.asarray(rotation, dtype=float)
    return rot @ np.asarray(cov, dtype=float) @ rot.T

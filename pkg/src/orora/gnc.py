"""Rotation from translation-invariant measurements with GNC-TLS.

Subtracting two correspondences cancels the translation, leaving pairs
``(alpha, beta)`` with ``beta ~= R @ alpha``. The rotation is found by
alternating a closed-form weighted rotation fit with the truncated-least-
squares weight update while the control parameter ``mu`` grows
geometrically, so the surrogate moves from convex towards the truncated
quadratic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from orora.core import CorrespondenceSet, DegenerateError, rotation_matrix

MU_FLOOR = 1e-6


@dataclass(frozen=True)
class GncConfig:
    cbar: float = 1.0
    kappa: float = 1.4
    max_iterations: int = 100
    convergence_tol: float = 1e-7
    tim_chain: str = "closed"

    def __post_init__(self) -> None:
        if not self.cbar > 0:
            raise ValueError(f"cbar must be positive, got {self.cbar}")
        if not self.kappa > 1:
            raise ValueError(f"kappa must exceed 1, got {self.kappa}")
        if not self.convergence_tol > 0:
            raise ValueError(f"convergence_tol must be positive, got {self.convergence_tol}")
        if self.max_iterations < 0:
            raise ValueError(f"max_iterations must be non-negative, got {self.max_iterations}")
        if self.tim_chain not in ("closed", "open"):
            raise ValueError(f"tim_chain must be 'closed' or 'open', got {self.tim_chain!r}")


@dataclass(frozen=True)
class TimPair:
    alpha: np.ndarray
    beta: np.ndarray
    prior_ranges: tuple[float, float]


@dataclass(frozen=True, eq=False)
class TimSet:
    """``M`` measurements as arrays: ``alpha``/``beta`` are ``(M, 2)``.

    ``prior_ranges`` holds the ranges of the two scan ``t-1`` points each
    measurement was built from.
    """

    alpha: np.ndarray
    beta: np.ndarray
    prior_ranges: np.ndarray

    def __len__(self) -> int:
        return len(self.alpha)

    def __getitem__(self, m: int) -> TimPair:
        a, b = self.prior_ranges[m]
        return TimPair(self.alpha[m], self.beta[m], (float(a), float(b)))

    @classmethod
    def from_vectors(cls, alpha, beta, prior_ranges=None) -> TimSet:
        alpha = np.asarray(alpha, dtype=float).reshape(-1, 2)
        beta = np.asarray(beta, dtype=float).reshape(-1, 2)
        if prior_ranges is None:
            prior_ranges = np.ones((len(alpha), 2))
        return cls(alpha, beta, np.asarray(prior_ranges, dtype=float).reshape(-1, 2))


@dataclass
class HalfStep:
    """Objective values around one alternation, for auditing monotonicity.

    ``rotation_before``/``rotation_after`` are the weighted residual sums at
    the previous weights before and after the rotation solve;
    ``weights_before``/``weights_after`` are the full surrogate objective at
    the new rotation and current ``mu`` before and after the weight update.
    """

    rotation_before: float
    rotation_after: float
    weights_before: float
    weights_after: float


@dataclass
class GncState:
    mu: float
    weights: np.ndarray
    rotation: float
    iteration: int = 0
    mu_history: list[float] = field(default_factory=list)
    cost_history: list[float] = field(default_factory=list)
    half_steps: list[HalfStep] = field(default_factory=list)
    prior_weights: np.ndarray | None = None
    converged: bool = False


def build_tims(inliers: CorrespondenceSet, chain: str = "closed") -> TimSet:
    """Differences of consecutive correspondences.

    The closed chain also pairs the last correspondence with the first, so
    ``M`` correspondences give ``M`` measurements; the open chain gives
    ``M - 1``.
    """
    m = len(inliers)
    if m < 2:
        raise DegenerateError(f"need at least 2 correspondences, got {m}")
    nxt = np.arange(1, m + 1) % m
    cur = np.arange(m)
    if chain == "open":
        nxt, cur = nxt[:-1], cur[:-1]
    elif chain != "closed":
        raise ValueError(f"unknown chain {chain!r}")
    rng = inliers.dst_polar[:, 0]
    return TimSet(
        inliers.src_xy[nxt] - inliers.src_xy[cur],
        inliers.dst_xy[nxt] - inliers.dst_xy[cur],
        np.column_stack((rng[cur], rng[nxt])),
    )


def residuals(tims: TimSet, rotation: float) -> np.ndarray:
    """Squared residuals ``|beta - R alpha|^2``."""
    diff = tims.beta - tims.alpha @ rotation_matrix(rotation).T
    return np.einsum("ij,ij->i", diff, diff)


def solve_weighted_rotation(tims: TimSet, weights: np.ndarray) -> float:
    """Closed-form minimiser of ``sum w |beta - R alpha|^2`` over SO(2)."""
    w = np.asarray(weights, dtype=float)
    a, b = tims.alpha, tims.beta
    cross = float(np.dot(w, a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]))
    dot = float(np.dot(w, a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]))
    if abs(cross) < 1e-12 and abs(dot) < 1e-12:
        raise DegenerateError("rotation is unobservable from the weighted measurements")
    return math.atan2(cross, dot)


def tls_weights(res: np.ndarray, mu: float, cbar: float) -> np.ndarray:
    """Closed-form weight minimising ``w r + mu (1 - w) cbar^2 / (mu + w)``."""
    res = np.asarray(res, dtype=float)
    c2 = cbar * cbar
    upper = (mu + 1.0) / mu * c2
    lower = mu / (mu + 1.0) * c2
    w = np.ones_like(res)
    mid = (res >= lower) & (res < upper)
    w[mid] = cbar * np.sqrt(mu * (mu + 1.0) / res[mid]) - mu
    w[res >= upper] = 0.0
    return np.clip(w, 0.0, 1.0)


def update_weights(tims: TimSet, rotation: float, mu: float, cbar: float) -> np.ndarray:
    if not (mu > 0 and cbar > 0):
        raise ValueError(f"mu and cbar must be positive, got mu={mu}, cbar={cbar}")
    return tls_weights(residuals(tims, rotation), mu, cbar)


def surrogate_objective(res: np.ndarray, weights: np.ndarray, mu: float, cbar: float) -> float:
    """Weighted residuals plus the outlier-process penalty."""
    penalty = mu * (1.0 - weights) / (mu + weights) * cbar * cbar
    return float(np.sum(weights * res + penalty))


def initialize(tims: TimSet, cfg: GncConfig) -> GncState:
    """Range-aware start: far measurements get smaller prior weight."""
    spread = np.sqrt(np.sum(tims.prior_ranges**2, axis=1))
    spread = np.maximum(spread, np.finfo(float).tiny)
    prior = spread.min() / spread
    rotation = solve_weighted_rotation(tims, prior)
    res = residuals(tims, rotation)
    c2 = cfg.cbar**2
    denom = 2.0 * float(res.max()) - c2
    mu = c2 / denom if denom > 0 else MU_FLOOR
    mu = max(mu, MU_FLOOR)
    weights = tls_weights(res, mu, cfg.cbar)
    return GncState(
        mu=mu,
        weights=weights,
        rotation=rotation,
        mu_history=[mu],
        cost_history=[float(np.dot(weights, res))],
        prior_weights=prior,
    )


def run_gnc(tims: TimSet, cfg: GncConfig) -> GncState:
    """Alternate rotation and weight updates until the weighted cost settles."""
    state = initialize(tims, cfg)
    mu0 = state.mu
    prev_res = residuals(tims, state.rotation)
    for n in range(1, cfg.max_iterations + 1):
        rotation = solve_weighted_rotation(tims, state.weights)
        res = residuals(tims, rotation)
        mu = mu0 * cfg.kappa**n
        weights = tls_weights(res, mu, cfg.cbar)
        state.half_steps.append(
            HalfStep(
                rotation_before=float(np.dot(state.weights, prev_res)),
                rotation_after=float(np.dot(state.weights, res)),
                weights_before=surrogate_objective(res, state.weights, mu, cfg.cbar),
                weights_after=surrogate_objective(res, weights, mu, cfg.cbar),
            )
        )
        cost = float(np.dot(weights, res))
        state.rotation, state.weights, state.mu, state.iteration = rotation, weights, mu, n
        state.mu_history.append(mu)
        state.cost_history.append(cost)
        prev_res = res
        if abs(cost - state.cost_history[-2]) < cfg.convergence_tol:
            state.converged = True
            break
        if not np.any(weights > 0):
            raise DegenerateError("every measurement was rejected")
    return state


def estimate_rotation(inliers: CorrespondenceSet, cfg: GncConfig | None = None) -> GncState:
    cfg = cfg or GncConfig()
    return run_gnc(build_tims(inliers, cfg.tim_chain), cfg)

"""Brute-force reference solvers for testing.

These deliberately avoid the estimator modules: each one evaluates its
objective exhaustively with plain Python or a dense grid.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

MAX_CLIQUE_ORACLE_VERTICES = 30


def oracle_rotation(alpha, beta, weights, step: float = 1e-4) -> float:
    """Grid minimiser of ``sum w |beta - R alpha|^2`` over [-pi, pi)."""
    alpha = np.asarray(alpha, dtype=float).reshape(-1, 2)
    beta = np.asarray(beta, dtype=float).reshape(-1, 2)
    w = np.asarray(weights, dtype=float)
    grid = np.arange(-math.pi, math.pi, step)
    best_angle, best_cost = 0.0, math.inf
    for chunk in np.array_split(grid, max(1, len(grid) // 20000)):
        c, s = np.cos(chunk)[:, None], np.sin(chunk)[:, None]
        rx = c * alpha[None, :, 0] - s * alpha[None, :, 1]
        ry = s * alpha[None, :, 0] + c * alpha[None, :, 1]
        cost = ((beta[None, :, 0] - rx) ** 2 + (beta[None, :, 1] - ry) ** 2) @ w
        k = int(np.argmin(cost))
        if cost[k] < best_cost:
            best_angle, best_cost = float(chunk[k]), float(cost[k])
    return best_angle


def oracle_acote(values, sigmas) -> tuple[float, frozenset[int]]:
    """Exhaustive per-axis consensus search.

    Every open interval between two distinct sorted endpoints is probed; each
    non-empty consensus set is scored by its weighted fit plus the summed
    spreads of the excluded votes. Ties within 1e-12 prefer the larger set,
    then the value closer to zero.
    """
    values = [float(v) for v in values]
    sigmas = [float(s) for s in sigmas]
    ends = sorted([v - s for v, s in zip(values, sigmas)] + [v + s for v, s in zip(values, sigmas)])
    best = None
    for lo, hi in zip(ends, ends[1:]):
        if not lo < hi:
            continue
        probe = (lo + hi) / 2
        inside = [k for k, (v, s) in enumerate(zip(values, sigmas)) if (probe - v) ** 2 <= s * s]
        if not inside:
            continue
        num = sum(values[k] / sigmas[k] ** 2 for k in inside)
        den = sum(1 / sigmas[k] ** 2 for k in inside)
        xi = num / den
        cost = sum(((xi - values[k]) / sigmas[k]) ** 2 for k in inside)
        cost += sum(sigmas[k] for k in range(len(values)) if k not in inside)
        key = (cost, len(inside), xi)
        if best is None:
            best = (key, frozenset(inside))
            continue
        b_cost, b_size, b_xi = best[0]
        if cost < b_cost - 1e-12 or (
            abs(cost - b_cost) <= 1e-12
            and (len(inside) > b_size or (len(inside) == b_size and abs(xi) < abs(b_xi)))
        ):
            best = (key, frozenset(inside))
    return best[0][2], best[1]


def oracle_max_clique(n: int, edges) -> frozenset[int]:
    """Largest clique by enumerating every clique; smallest sorted tuple on ties."""
    if n > MAX_CLIQUE_ORACLE_VERTICES:
        raise ValueError(f"oracle limited to {MAX_CLIQUE_ORACLE_VERTICES} vertices, got {n}")
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    best: tuple[int, ...] = ()

    def grow(clique: tuple[int, ...], cand: list[int]) -> None:
        nonlocal best
        if len(clique) > len(best) or (len(clique) == len(best) and clique < best):
            best = clique
        for k, v in enumerate(cand):
            grow(clique + (v,), [u for u in cand[k + 1:] if u in adj[v]])

    grow((), list(range(n)))
    return frozenset(best)


def is_clique(vertices, edges) -> bool:
    edge_set = {frozenset(e) for e in edges}
    return all(frozenset(pair) in edge_set for pair in combinations(sorted(vertices), 2))

"""Max-clique inlier selection.

Two correspondences are compatible when the distance between their source
points matches the distance between their destination points, up to the
noise radii of the points involved. Rigid motions preserve distances, so
true matches are mutually compatible and form a clique; the largest clique
is kept as the initial inlier set.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from orora.core import CorrespondenceSet, DegenerateError
from orora.uncertainty import NoiseParams


@dataclass(frozen=True, eq=False)
class ConsistencyGraph:
    adjacency: np.ndarray

    def __post_init__(self) -> None:
        adj = self.adjacency
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if np.any(np.diagonal(adj)) or not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric without self-loops")

    @classmethod
    def from_edges(cls, n: int, edges) -> ConsistencyGraph:
        adj = np.zeros((n, n), dtype=bool)
        for a, b in edges:
            if a != b:
                adj[a, b] = adj[b, a] = True
        return cls(adj)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def neighbor_masks(self) -> list[int]:
        """Row ``v`` as an integer bitset (bit ``u`` set iff ``u ~ v``)."""
        packed = np.packbits(self.adjacency, axis=1, bitorder="little")
        return [int.from_bytes(row.tobytes(), "little") for row in packed]

    def is_clique(self, vertices) -> bool:
        idx = np.asarray(list(vertices), dtype=int)
        sub = self.adjacency[np.ix_(idx, idx)]
        return bool(np.all(sub | np.eye(len(idx), dtype=bool)))


@dataclass(frozen=True)
class CliqueResult:
    vertices: tuple[int, ...]
    exact: bool

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True, eq=False)
class PruneResult:
    inliers: CorrespondenceSet
    inlier_indices: np.ndarray
    outlier_indices: np.ndarray
    exact: bool


def correspondence_radii(corr: CorrespondenceSet, noise: NoiseParams) -> np.ndarray:
    far = np.maximum(corr.src_polar[:, 0], corr.dst_polar[:, 0])
    return noise.radius(far)


def build_consistency_graph(
    corr: CorrespondenceSet, noise: NoiseParams, cbar: float
) -> ConsistencyGraph:
    """Edge m-n iff ``| |p_m - p_n| - |q_m - q_n| | <= cbar * (r_m + r_n)``.

    ``r_k`` is the noise radius of correspondence ``k``, taken at the larger of
    its two ranges.
    """
    gap = cdist(corr.src_xy, corr.src_xy)
    gap -= cdist(corr.dst_xy, corr.dst_xy)
    np.abs(gap, out=gap)
    radii = cbar * correspondence_radii(corr, noise)
    adj = gap <= radii[:, None] + radii[None, :]
    np.fill_diagonal(adj, False)
    return ConsistencyGraph(adj)


def _greedy_clique(adjacency: np.ndarray, starts: int) -> list[int]:
    """Grow cliques from the highest-degree vertices, always adding the
    candidate with the most neighbours among the remaining candidates."""
    adj = adjacency.astype(np.int32)
    degree = adj.sum(axis=1)
    best: list[int] = []
    for v in np.argsort(-degree, kind="stable")[:starts]:
        clique = [int(v)]
        cand = adjacency[v].copy()
        inner = adj[:, cand].sum(axis=1)
        while cand.any():
            score = np.where(cand, inner, -1)
            u = int(np.argmax(score))
            clique.append(u)
            dropped = cand & ~adjacency[u]
            dropped[u] = True
            cand &= ~dropped
            inner -= adj[:, dropped].sum(axis=1)
        if len(clique) > len(best):
            best = clique
    return sorted(best)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Timeout(Exception):
    pass


def max_clique(graph: ConsistencyGraph, time_budget_ms: float | None = 100.0) -> CliqueResult:
    """Exact maximum clique by branch and bound.

    Among several maximum cliques the lexicographically smallest sorted vertex
    tuple is returned. The search walks vertices in ascending order and
    bounds each branch by a greedy colouring of its candidates. If
    ``time_budget_ms`` runs out, the best clique seen so far is returned with
    ``exact=False``.
    """
    n = graph.n
    if n == 0:
        return CliqueResult((), True)
    nbrs = graph.neighbor_masks()
    seed = _greedy_clique(graph.adjacency, starts=2)

    # a vertex with fewer than len(seed) - 1 neighbours cannot beat the seed
    keep = np.ones(n, dtype=bool)
    while True:
        low = keep & (graph.adjacency[:, keep].sum(axis=1) < len(seed) - 1)
        if not low.any():
            break
        keep &= ~low
    alive = sum(1 << int(v) for v in np.flatnonzero(keep))
    nbrs = [m & alive for m in nbrs]

    deadline = None if time_budget_ms is None else time.perf_counter() + time_budget_ms / 1e3
    best: list[int] = []
    best_size = len(seed) - 1  # ties with the seed must still be found in order
    nodes = 0

    def colour_tops(cand: int) -> list[int]:
        # greedy colouring; return each class's highest vertex, ascending
        tops = []
        uncoloured = cand
        while uncoloured:
            avail = uncoloured
            top = -1
            while avail:
                low = avail & -avail
                v = low.bit_length() - 1
                avail &= ~nbrs[v] & ~low
                uncoloured ^= low
                top = v
            tops.append(top)
        tops.sort()
        return tops

    def expand(clique: list[int], cand: int) -> None:
        nonlocal best, best_size, nodes
        nodes += 1
        if deadline is not None and nodes & 255 == 0 and time.perf_counter() > deadline:
            raise _Timeout
        depth = len(clique)
        if depth + cand.bit_count() <= best_size:
            return
        tops: list[int] | None = None
        k = 0
        for v in _bits(cand):
            if depth + (cand >> v).bit_count() <= best_size:
                return
            # colour lazily: the first branch rarely needs more than the size bound
            if tops is None and v != (cand & -cand).bit_length() - 1:
                tops = colour_tops(cand)
            if tops is not None:
                while k < len(tops) and tops[k] < v:
                    k += 1
                if depth + len(tops) - k <= best_size:
                    return
            rest = cand & nbrs[v] & ~((2 << v) - 1)
            clique.append(v)
            if rest:
                expand(clique, rest)
            elif depth + 1 > best_size:
                best = list(clique)
                best_size = depth + 1
            clique.pop()

    exact = True
    try:
        expand([], alive)
    except _Timeout:
        exact = False
    if len(best) < len(seed):
        best = seed
    return CliqueResult(tuple(best), exact)


def prune(
    corr: CorrespondenceSet,
    noise: NoiseParams,
    cbar: float,
    time_budget_ms: float | None = 100.0,
) -> PruneResult:
    """Split ``corr`` into the maximum clique and everything else."""
    if len(corr) == 0:
        raise DegenerateError("no correspondences to prune")
    clique = max_clique(build_consistency_graph(corr, noise, cbar), time_budget_ms)
    if len(clique) < 2:
        raise DegenerateError(f"largest consistent set has {len(clique)} member(s)")
    keep = np.zeros(len(corr), dtype=bool)
    keep[list(clique.vertices)] = True
    inliers = np.flatnonzero(keep)
    return PruneResult(corr.subset(inliers), inliers, np.flatnonzero(~keep), clique.exact)

"""Similarity-cue grouping of regions into dendrograms.

Region pairs are compared with a squared distance that mixes one feature
cue with spatial proximity, each term normalized by its own scale:

    d(a, b) = ((f_a - f_b) / feature_scale)^2
            + ((x_a - x_b) / coord_scale)^2
            + ((y_a - y_b) / coord_scale)^2

Single-linkage clustering merges the globally closest pair of clusters
until one cluster remains, producing a binary hierarchy whose every node is
a region group.  Each node carries incrementally merged statistics (count,
mean, sum of squared deviations per dimension), the union bounding box, and
the node's extent in normalized cue space, so downstream ranking never has
to touch member regions again.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .regionfeat import CUE_COLUMNS

CUE_IDS = "DFBGS"

# stats dimensions: the five region features then x, y centers
STAT_DIMS = 7


@dataclass(frozen=True)
class Cue:
    """A grouping cue: which feature column to compare, at what scale."""

    id: str
    scale: float

    def __post_init__(self):
        if self.id not in CUE_IDS:
            raise ValueError(f"unknown cue id {self.id!r}")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError("cue scale must be a positive finite number")

    @property
    def column(self) -> int:
        return CUE_COLUMNS[self.id]


def canonical_cues(cues) -> tuple:
    """Validate cue ids and return them deduplicated in D,F,B,G,S order."""
    ids = tuple(cues)
    if not ids:
        raise ValueError("cue set must not be empty")
    for c in ids:
        if c not in CUE_IDS:
            raise ValueError(f"unknown cue id {c!r}")
    return tuple(c for c in CUE_IDS if c in ids)


def pairwise_distance(f_a, xy_a, f_b, xy_b, cue: Cue, coord_scale: float = 1.0) -> float:
    """Squared cue distance between two regions (symmetric, zero iff the
    cue feature and both center coordinates coincide)."""
    df = (float(f_a) - float(f_b)) / cue.scale
    dx = (float(xy_a[0]) - float(xy_b[0])) / coord_scale
    dy = (float(xy_a[1]) - float(xy_b[1])) / coord_scale
    return df * df + dx * dx + dy * dy


# ---------------------------------------------------------------------------
# incremental statistics


@dataclass(frozen=True)
class RunningStats:
    """Count, mean and sum of squared deviations per dimension."""

    count: int
    mean: np.ndarray
    m2: np.ndarray

    def std(self) -> np.ndarray:
        """Population standard deviation (zeros for an empty accumulator)."""
        if self.count == 0:
            return np.zeros_like(self.mean)
        return np.sqrt(self.m2 / self.count)


def empty_stats(dims: int = STAT_DIMS) -> RunningStats:
    return RunningStats(0, np.zeros(dims), np.zeros(dims))


def stats_from_values(values) -> RunningStats:
    """Exact stats of a (k, d) value block (rows are observations)."""
    v = np.atleast_2d(np.asarray(values, np.float64))
    mean = v.mean(axis=0)
    m2 = ((v - mean) ** 2).sum(axis=0)
    return RunningStats(v.shape[0], mean, m2)


def merge_stats(a: RunningStats, b: RunningStats) -> RunningStats:
    """Combine two accumulators as if their samples were pooled."""
    if a.count == 0:
        return b
    if b.count == 0:
        return a
    k = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / k)
    m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / k)
    return RunningStats(k, mean, m2)


# ---------------------------------------------------------------------------
# hierarchy


@dataclass
class Hierarchy:
    """Binary merge tree over n leaf regions (2n - 1 nodes).

    Leaves occupy ids [0, n); internal nodes follow in merge order, so the
    root is the last node.  ``mean``/``m2`` hold per-node incremental stats
    over the five features plus x and y centers; ``cue_min``/``cue_max``
    bound the node's members in normalized (feature, x, y) cue space.
    """

    source: tuple
    n_leaves: int
    parent: np.ndarray
    children: np.ndarray
    merge_distance: np.ndarray
    bbox: np.ndarray
    count: np.ndarray
    mean: np.ndarray
    m2: np.ndarray
    cue_min: np.ndarray
    cue_max: np.ndarray
    min_member: np.ndarray

    @property
    def n_nodes(self) -> int:
        return 2 * self.n_leaves - 1

    @property
    def root(self) -> int:
        return self.n_nodes - 1

    def members(self, node: int) -> np.ndarray:
        """Leaf indices under a node, ascending."""
        if node < 0 or node >= self.n_nodes:
            raise IndexError(f"node {node} out of range")
        stack = [node]
        out = []
        while stack:
            v = stack.pop()
            if v < self.n_leaves:
                out.append(v)
            else:
                stack.extend(self.children[v])
        out.sort()
        return np.asarray(out, np.int64)

    def bfs_order(self) -> np.ndarray:
        """Breadth-first node order from the root; children are visited in
        their stored order (smaller minimum member first)."""
        order = np.empty(self.n_nodes, np.int64)
        queue = deque([self.root])
        k = 0
        while queue:
            v = queue.popleft()
            order[k] = v
            k += 1
            if v >= self.n_leaves:
                queue.extend(self.children[v])
        return order

    def node_stats(self, node: int) -> RunningStats:
        return RunningStats(int(self.count[node]), self.mean[node].copy(),
                            self.m2[node].copy())

    def cv_features(self) -> np.ndarray:
        """(n_nodes, 5) coefficients of variation (std / mean) of the five
        region features per node; dimensions with zero mean yield 0."""
        mean = self.mean[:, :5]
        std = np.sqrt(self.m2[:, :5] / self.count[:, None])
        out = np.zeros_like(mean)
        np.divide(std, mean, out=out, where=mean != 0)
        return out

    def volume_ratio(self, p_min: float = 1e-6) -> np.ndarray:
        """Volume of each node's bounding hyperrectangle in normalized cue
        space, clamped to [p_min, 1]."""
        vol = np.prod(self.cue_max - self.cue_min, axis=1)
        return np.clip(vol, p_min, 1.0)


def slc_cluster(features, centers, cue: Cue, coord_scale: float = 1.0,
                leaf_bboxes=None, source: tuple = ("I", 1, "D")) -> Hierarchy:
    """Single-linkage clustering of regions under one cue.

    ``features`` is (n, 5) in feature_matrix column order, ``centers`` is
    (n, 2) region centers, ``leaf_bboxes`` optional (n, 4) boxes unioned up
    the tree (degenerate point boxes at the centers when omitted).

    Merging is exact: every step joins the globally closest pair, and ties
    are broken toward the lexicographically smallest (sorted) pair of
    minimum member indices, which makes the merge sequence deterministic
    under region permutations.
    """
    F = np.asarray(features, np.float64)
    C = np.asarray(centers, np.float64)
    if F.ndim != 2 or F.shape[1] != 5:
        raise ValueError("features must be (n, 5)")
    n = F.shape[0]
    if n == 0:
        raise ValueError("cannot cluster zero regions")
    if C.shape != (n, 2):
        raise ValueError("centers must be (n, 2)")
    if not (np.isfinite(F).all() and np.isfinite(C).all()):
        raise ValueError("features and centers must be finite")
    if not (np.isfinite(coord_scale) and coord_scale > 0):
        raise ValueError("coord_scale must be positive and finite")
    if leaf_bboxes is None:
        leaf_bboxes = np.column_stack([C[:, 0], C[:, 1], C[:, 0], C[:, 1]])
    B = np.asarray(leaf_bboxes, np.float64)
    if B.shape != (n, 4):
        raise ValueError("leaf_bboxes must be (n, 4)")

    total = 2 * n - 1
    parent = np.full(total, -1, np.int32)
    children = np.full((total, 2), -1, np.int32)
    merge_distance = np.zeros(total)
    bbox = np.zeros((total, 4))
    bbox[:n] = B
    count = np.zeros(total, np.int64)
    count[:n] = 1
    mean = np.zeros((total, STAT_DIMS))
    mean[:n, :5] = F
    mean[:n, 5:] = C
    m2 = np.zeros((total, STAT_DIMS))
    cue_min = np.zeros((total, 3))
    cue_max = np.zeros((total, 3))
    norm_pts = np.column_stack([(F[:, cue.column]) / cue.scale,
                                C[:, 0] / coord_scale, C[:, 1] / coord_scale])
    cue_min[:n] = norm_pts
    cue_max[:n] = norm_pts
    min_member = np.zeros(total, np.int64)
    min_member[:n] = np.arange(n)

    h = Hierarchy(tuple(source), n, parent, children, merge_distance, bbox,
                  count, mean, m2, cue_min, cue_max, min_member)
    if n == 1:
        return h

    # distance matrix; term order mirrors pairwise_distance exactly
    df = (F[:, cue.column][:, None] - F[:, cue.column][None, :]) / cue.scale
    dx = (C[:, 0][:, None] - C[:, 0][None, :]) / coord_scale
    dy = (C[:, 1][:, None] - C[:, 1][None, :]) / coord_scale
    D = df * df + dx * dx + dy * dy
    np.fill_diagonal(D, np.inf)

    active = np.ones(n, bool)
    slot_node = np.arange(n, dtype=np.int64)
    dmin = D.min(axis=1)

    for step in range(n - 1):
        alive = np.flatnonzero(active)
        m = dmin[alive].min()
        best_key = None
        best_pair = None
        for s in alive[dmin[alive] == m]:
            row = D[s]
            for j in alive[row[alive] == m]:
                if j == s:
                    continue
                a = min_member[slot_node[s]]
                b = min_member[slot_node[j]]
                key = (a, b) if a < b else (b, a)
                if best_key is None or key < best_key:
                    best_key = key
                    best_pair = (s, j)
        si, sj = best_pair
        ca, cb = int(slot_node[si]), int(slot_node[sj])
        if min_member[cb] < min_member[ca]:
            ca, cb = cb, ca

        nid = n + step
        parent[ca] = nid
        parent[cb] = nid
        children[nid, 0] = ca
        children[nid, 1] = cb
        merge_distance[nid] = m
        k1, k2 = count[ca], count[cb]
        k = k1 + k2
        count[nid] = k
        delta = mean[cb] - mean[ca]
        mean[nid] = mean[ca] + delta * (k2 / k)
        m2[nid] = m2[ca] + m2[cb] + delta * delta * (k1 * k2 / k)
        bbox[nid, :2] = np.minimum(bbox[ca, :2], bbox[cb, :2])
        bbox[nid, 2:] = np.maximum(bbox[ca, 2:], bbox[cb, 2:])
        cue_min[nid] = np.minimum(cue_min[ca], cue_min[cb])
        cue_max[nid] = np.maximum(cue_max[ca], cue_max[cb])
        min_member[nid] = min(min_member[ca], min_member[cb])

        # single-linkage row update into slot si, retire slot sj
        active[sj] = False
        slot_node[si] = nid
        merged_row = np.minimum(D[si], D[sj])
        D[si, :] = merged_row
        D[:, si] = merged_row
        D[si, si] = np.inf
        D[si, sj] = np.inf
        D[sj, si] = np.inf
        others = np.flatnonzero(active)
        others = others[others != si]
        if others.size:
            # distances to the merged cluster never exceed the previous ones
            dmin[others] = np.minimum(dmin[others], merged_row[others])
            dmin[si] = merged_row[others].min()
        else:
            dmin[si] = np.inf
    return h

"""Scoring and ordering of hierarchy nodes into a proposal ranking.

Three strategies assign every node of a grouping hierarchy a score where
lower means more word-like:

* ``pr``     pseudo-random: the node's breadth-first enumeration index
             (1 at the root) times a uniform random draw.
* ``nfa``    meaningfulness: the binomial tail probability of observing at
             least k of the hierarchy's n regions inside the node's bounding
             volume in normalized cue space.
* ``prnfa``  the nfa score times an independent uniform draw, which breaks
             the strict nestedness of raw tail probabilities.
* ``cls``    a stump-ensemble classifier on the node's coefficient-of-
             variation features; the score is the negated confidence.

Scored nodes from any number of hierarchies are then pooled, sorted by
ascending score with a stable sort, and deduplicated on exact bounding-box
equality (first occurrence wins).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

STRATEGIES = ("pr", "nfa", "prnfa", "cls")

P_MIN = 1e-6


@dataclass(frozen=True)
class Proposal:
    """One ranked box hypothesis; bbox is (xmin, ymin, xmax, ymax) in
    continuous native-image coordinates."""

    bbox: tuple
    score: float
    strategy: str
    provenance: tuple = ()


@dataclass
class ProposalList:
    """Proposals in rank order (best first) plus the dedup policy applied."""

    proposals: list = field(default_factory=list)
    dedup: str = "exact-bbox"

    def __len__(self):
        return len(self.proposals)

    def __iter__(self):
        return iter(self.proposals)

    def __getitem__(self, i):
        return self.proposals[i]

    def boxes(self) -> np.ndarray:
        """(N, 4) float64 boxes in rank order."""
        if not self.proposals:
            return np.zeros((0, 4))
        return np.asarray([p.bbox for p in self.proposals], np.float64)


def binomial_tail(k: int, n: int, p: float) -> float:
    """P[X >= k] for X ~ Binomial(n, p).

    Evaluated through the regularized incomplete beta function, with the
    edge cases (k = 0, p in {0, 1}) handled exactly.
    """
    k = int(k)
    n = int(n)
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got k={k} n={n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if k == 0:
        return 1.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    return float(special.betainc(k, n - k + 1, p))


def _binomial_tail_vec(k, n: int, p) -> np.ndarray:
    """Vectorized binomial_tail for 1 <= k <= n arrays with k = 0 allowed."""
    k, p = np.broadcast_arrays(np.asarray(k, np.float64), np.asarray(p, np.float64))
    out = np.ones(k.shape)
    pos = k > 0
    out[pos] = special.betainc(k[pos], n - k[pos] + 1, p[pos])
    return out


def rank_pseudorandom(hierarchy, rng) -> np.ndarray:
    """Breadth-first index (1 at the root, increasing toward leaves) times
    one uniform draw per node; one (n_nodes,) array is drawn from ``rng``."""
    order = hierarchy.bfs_order()
    value = np.empty(hierarchy.n_nodes)
    value[order] = np.arange(1, hierarchy.n_nodes + 1, dtype=np.float64)
    u = rng.random(hierarchy.n_nodes)
    return value * u


def rank_nfa(hierarchy, randomize: bool = False, rng=None,
             p_min: float = P_MIN) -> np.ndarray:
    """Binomial tail score per node: k = member count, n = the hierarchy's
    leaf count, p = the node's normalized cue-space volume clamped to
    [p_min, 1].  With ``randomize`` each score is multiplied by an
    independent uniform draw."""
    p = hierarchy.volume_ratio(p_min)
    scores = _binomial_tail_vec(hierarchy.count, hierarchy.n_leaves, p)
    if randomize:
        if rng is None:
            raise ValueError("randomize=True needs an rng")
        scores = scores * rng.random(hierarchy.n_nodes)
    return scores


def rank_classifier(hierarchy, model) -> np.ndarray:
    """Negated ensemble confidence on each node's coefficient-of-variation
    features (more word-like then means lower score)."""
    if model is None:
        raise ValueError("classifier ranking needs a trained model")
    return -np.asarray(model.confidence(hierarchy.cv_features()), np.float64)


def score_hierarchy(hierarchy, strategy: str, rng=None, model=None) -> np.ndarray:
    """Dispatch one strategy over all nodes of a hierarchy."""
    if strategy == "pr":
        return rank_pseudorandom(hierarchy, rng)
    if strategy == "nfa":
        return rank_nfa(hierarchy)
    if strategy == "prnfa":
        return rank_nfa(hierarchy, randomize=True, rng=rng)
    if strategy == "cls":
        return rank_classifier(hierarchy, model)
    raise ValueError(f"unknown ranking strategy {strategy!r}")


def dedup_and_sort(proposals) -> ProposalList:
    """Stable sort by ascending score, then drop exact duplicate boxes,
    keeping each box's best-ranked occurrence."""
    ranked = sorted(proposals, key=lambda pr: pr.score)
    seen = set()
    kept = []
    for pr in ranked:
        if pr.bbox not in seen:
            seen.add(pr.bbox)
            kept.append(pr)
    return ProposalList(kept)

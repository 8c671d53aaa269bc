"""Real-valued boosting of decision stumps over group dispersion features.

A group of regions that forms a word tends to have low dispersion: its
members agree on intensity, stroke width, size and so on.  Each hierarchy
node is therefore described by the coefficients of variation (std / mean)
of the five region features over its members, and a small ensemble of
confidence-rated decision stumps is boosted to separate word groups from
everything else.

Training follows the real AdaBoost recipe: each round picks the stump
minimizing Z = 2 * sum(sqrt(W+ * W-)) over all features and thresholds
(thresholds sit midway between consecutive distinct feature values), leaf
confidences are half log-odds smoothed by eps = 1 / (4 N), and the weights
are multiplied by exp(-y * c) and renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

MODEL_MAGIC = "textprop-stumps"
MODEL_VERSION = "v1"
DEFAULT_ROUNDS = 100

TEXT_IOU = 0.7
BACKGROUND_IOU = 0.2


@dataclass(frozen=True)
class Stump:
    """One axis-aligned split: rows with feature < threshold fall left."""

    feature: int
    threshold: float
    c_left: float
    c_right: float

    def __post_init__(self):
        if not 0 <= self.feature < 5:
            raise ValueError("feature index must be in [0, 5)")
        for v in (self.threshold, self.c_left, self.c_right):
            if not np.isfinite(v):
                raise ValueError("stump parameters must be finite")


@dataclass
class StumpEnsemble:
    stumps: list

    @property
    def rounds(self) -> int:
        return len(self.stumps)

    def confidence(self, features):
        """Summed stump confidence; positive leans word-like.

        Accepts a single 5-vector (returns float) or an (m, 5) matrix
        (returns an (m,) array).  Non-finite features are rejected.
        """
        F = np.asarray(features, np.float64)
        single = F.ndim == 1
        F = np.atleast_2d(F)
        if F.ndim != 2 or F.shape[1] != 5:
            raise ValueError("features must be a 5-vector or an (m, 5) matrix")
        if not np.isfinite(F).all():
            raise ValueError("features must be finite")
        total = np.zeros(F.shape[0])
        for st in self.stumps:
            total += np.where(F[:, st.feature] < st.threshold, st.c_left, st.c_right)
        return float(total[0]) if single else total

    def save(self, path):
        """Plain-text model file; floats are written with full round-trip
        precision so save/load is exact."""
        lines = [f"{MODEL_MAGIC} {MODEL_VERSION} {self.rounds}"]
        for st in self.stumps:
            lines.append(f"{st.feature} {float(st.threshold)!r} "
                         f"{float(st.c_left)!r} {float(st.c_right)!r}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_ensemble(path) -> StumpEnsemble:
    """Parse a stump model file, validating header and line count."""
    text = Path(path).read_text(encoding="ascii")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"empty model file: {path}")
    head = lines[0].split()
    if len(head) != 3 or head[0] != MODEL_MAGIC or head[1] != MODEL_VERSION:
        raise ValueError(f"bad model header in {path}: {lines[0]!r}")
    try:
        rounds = int(head[2])
    except ValueError as exc:
        raise ValueError(f"bad round count in {path}: {head[2]!r}") from exc
    if len(lines) - 1 != rounds:
        raise ValueError(f"model file {path} declares {rounds} stumps "
                         f"but has {len(lines) - 1}")
    stumps = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 4:
            raise ValueError(f"bad stump line in {path}: {ln!r}")
        stumps.append(Stump(int(parts[0]), float(parts[1]),
                            float(parts[2]), float(parts[3])))
    return StumpEnsemble(stumps)


def pretrained_path() -> Path:
    """Location of the stump model shipped with the package."""
    return Path(resources.files("textprop") / "models" / "pretrained-stumps-v1.txt")


def load_pretrained() -> StumpEnsemble:
    return load_ensemble(pretrained_path())


@dataclass
class TrainingSet:
    """Labeled dispersion features: labels are +1 (word) / -1 (background),
    weights default to uniform."""

    features: np.ndarray
    labels: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        self.features = np.asarray(self.features, np.float64)
        self.labels = np.asarray(self.labels)
        if self.features.ndim != 2 or self.features.shape[1] != 5:
            raise ValueError("features must be (N, 5)")
        n = self.features.shape[0]
        if self.labels.shape != (n,):
            raise ValueError("labels must be (N,)")
        if self.weights is None:
            self.weights = np.ones(n)
        self.weights = np.asarray(self.weights, np.float64)
        if self.weights.shape != (n,):
            raise ValueError("weights must be (N,)")

    def __len__(self):
        return self.features.shape[0]


def train(data: TrainingSet, rounds: int = DEFAULT_ROUNDS) -> StumpEnsemble:
    """Boost ``rounds`` stumps on a labeled training set.

    Rows are brought into a canonical order first (sorted by the feature
    columns, then label) so the result is invariant to input permutation.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    X = data.features
    y = np.where(np.asarray(data.labels, np.float64) > 0, 1.0, -1.0)
    w0 = data.weights
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two training rows")
    if not np.isfinite(X).all():
        raise ValueError("training features must be finite")
    if not ((y > 0).any() and (y < 0).any()):
        raise ValueError("training set must contain both classes")
    if (w0 < 0).any() or w0.sum() <= 0:
        raise ValueError("weights must be nonnegative with positive sum")

    order = np.lexsort((y, X[:, 4], X[:, 3], X[:, 2], X[:, 1], X[:, 0]))
    X = X[order]
    y = y[order]
    w = w0[order] / w0.sum()

    eps = 1.0 / (4.0 * n)
    argsorts = [np.argsort(X[:, j], kind="stable") for j in range(5)]
    sorted_vals = [X[argsorts[j], j] for j in range(5)]

    stumps = []
    for _ in range(rounds):
        wp = np.where(y > 0, w, 0.0)
        wn = np.where(y < 0, w, 0.0)
        tp = wp.sum()
        tn = wn.sum()
        best = None  # (z, feature, threshold, c_left tuple source)
        for j in range(5):
            v = sorted_vals[j]
            splits = np.flatnonzero(v[1:] > v[:-1])
            if splits.size == 0:
                continue
            o = argsorts[j]
            cp = np.cumsum(wp[o])
            cn = np.cumsum(wn[o])
            wlp = cp[splits]
            wln = cn[splits]
            # cancellation can leave these a hair below zero
            wrp = np.maximum(tp - wlp, 0.0)
            wrn = np.maximum(tn - wln, 0.0)
            z = 2.0 * (np.sqrt(wlp * wln) + np.sqrt(wrp * wrn))
            i = int(np.argmin(z))
            if best is None or z[i] < best[0]:
                thr = (v[splits[i]] + v[splits[i] + 1]) / 2.0
                best = (z[i], j, thr, wlp[i], wln[i], wrp[i], wrn[i])
        if best is None:
            # every feature is constant; emit a constant-confidence stump
            c = 0.5 * np.log((tp + eps) / (tn + eps))
            stump = Stump(0, float(X[0, 0]), float(c), float(c))
        else:
            _, j, thr, wlp_i, wln_i, wrp_i, wrn_i = best
            c_left = 0.5 * np.log((wlp_i + eps) / (wln_i + eps))
            c_right = 0.5 * np.log((wrp_i + eps) / (wrn_i + eps))
            stump = Stump(int(j), float(thr), float(c_left), float(c_right))
        stumps.append(stump)

        conf = np.where(X[:, stump.feature] < stump.threshold,
                        stump.c_left, stump.c_right)
        w = w * np.exp(-y * conf)
        w = w / w.sum()
    return StumpEnsemble(stumps)


def harvest_training_data(samples, config=None, text_iou: float = TEXT_IOU,
                          background_iou: float = BACKGROUND_IOU) -> TrainingSet:
    """Build a TrainingSet by running the grouping pipeline over annotated
    images.

    ``samples`` yields (image, gt_boxes) pairs, where image is a path or an
    (H, W, 3) uint8 array and gt_boxes is a (k, 4) array of word boxes in
    continuous image coordinates.  Hierarchy nodes overlapping a ground
    truth box with IoU >= text_iou become positives, nodes at or below
    background_iou negatives; anything in between is discarded as
    ambiguous.
    """
    from .evaluation import iou_matrix
    from .pipeline import DiversificationConfig, build_hierarchies

    if config is None:
        config = DiversificationConfig()
    if not background_iou < text_iou:
        raise ValueError("need background_iou < text_iou")
    feats = []
    labels = []
    total_gt = 0
    for image, gt_boxes in samples:
        gt = np.asarray(gt_boxes, np.float64).reshape(-1, 4)
        total_gt += gt.shape[0]
        for h in build_hierarchies(image, config):
            F = h.cv_features()
            if gt.shape[0]:
                best = iou_matrix(h.bbox, gt).max(axis=1)
            else:
                best = np.zeros(h.n_nodes)
            pos = best >= text_iou
            neg = best <= background_iou
            keep = pos | neg
            feats.append(F[keep])
            labels.append(np.where(pos[keep], 1, -1))
    if total_gt == 0:
        raise ValueError("no ground-truth boxes in any sample")
    if not feats:
        raise ValueError("no samples provided")
    return TrainingSet(np.concatenate(feats), np.concatenate(labels))

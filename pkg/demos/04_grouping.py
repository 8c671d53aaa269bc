"""Single-linkage grouping under one similarity cue.

Regions that look alike and sit close together merge early; unrelated ones
merge last.  The full merge tree is kept: every internal node is a group
hypothesis, and each node carries running statistics (count, per-dimension
mean and spread), the union bounding box, and its extent in the normalized
cue space used by the rankers.

This demo clusters the regions of one scene by stroke-width similarity and
walks the merge sequence.

Run:  python3 demos/04_grouping.py
"""

import numpy as np

from textprop import Cue, MserParams, render_scene, slc_cluster
from textprop.channels import luma
from textprop.mser import DARK_ON_LIGHT, extract_mser
from textprop.regionfeat import feature_matrix


def main():
    rgb, _ = render_scene(seed=5, size=(320, 240), word_count=(2, 3))
    gray = luma(rgb)
    regions = extract_mser(gray, MserParams(), DARK_ON_LIGHT)
    features = feature_matrix(regions, gray)
    centers = np.array([r.centroid for r in regions])
    boxes = np.array([r.bbox for r in regions], np.float64)
    n = len(regions)
    print(f"{n} regions to cluster")

    diag = float(np.hypot(*gray.shape))
    cue = Cue("S", diag)  # compare stroke widths, normalized by the diagonal
    h = slc_cluster(features, centers, cue, coord_scale=diag,
                    leaf_bboxes=boxes, source=("I", 1, "S"))

    print(f"hierarchy: {h.n_nodes} nodes = {h.n_leaves} leaves "
          f"+ {h.n_nodes - h.n_leaves} merges, root {h.root}\n")

    print("merge sequence (squared normalized distance is nondecreasing):")
    for node in range(n, h.n_nodes):
        a, b = h.children[node]
        print(f"  node {node:2d} = {h.members(a).tolist()} + "
              f"{h.members(b).tolist()}  at d^2 = {h.merge_distance[node]:.3g}")

    root = h.root
    print(f"\nroot node statistics over all {h.count[root]} members:")
    print(f"  mean (F,B,D,S,G,x,y) = "
          + " ".join(f"{v:.1f}" for v in h.mean[root]))
    print(f"  std  (F,B,D,S,G,x,y) = "
          + " ".join(f"{v:.1f}" for v in h.node_stats(root).std()))
    print(f"  union bbox = {tuple(float(round(v, 1)) for v in h.bbox[root])}")

    # the cue-space envelope: how much of the normalized (cue, x, y) cube a
    # node occupies; compact groups occupy very little of it
    vr = h.volume_ratio()
    tightest = int(np.argmin(vr[n:])) + n
    print(f"\ncue-space volume ratio: root {vr[root]:.3g}, "
          f"tightest internal node {tightest} -> {vr[tightest]:.3g}")
    print(f"  node {tightest} groups regions {h.members(tightest).tolist()}")

    # per-node dispersion features (coefficient of variation per column)
    cv = h.cv_features()
    print(f"\ndispersion features for the classifier: shape {cv.shape}, "
          f"root row = " + " ".join(f"{v:.2f}" for v in cv[root]))


if __name__ == "__main__":
    main()

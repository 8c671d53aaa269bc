"""End-to-end: image in, ranked word boxes out.

propose() runs the whole pipeline: channel/pyramid decomposition, stable
region extraction in both polarities, one merge hierarchy per
(channel, level, cue) combination, node scoring, pooling, deduplication.
The presets trade diversity for speed:

  fast         R,G,B at full resolution, D+F cues      ->  6 hierarchies
  full         R,G,B,I at both levels, all five cues   -> 40 hierarchies
  i-d          luma only, one cue                      ->  1 hierarchy

Run:  python3 demos/06_proposals.py
"""

import time
from pathlib import Path

import numpy as np

from textprop import preset, propose, render_scene
from textprop.evaluation import iou_matrix
from textprop.pipeline import nms_filter, read_proposals, write_proposals

OUT = Path(__file__).parent / "out" / "06"


def best_covers(boxes, gt):
    m = iou_matrix(np.asarray([p.bbox for p in boxes]), gt)
    return m.max(axis=0)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rgb, gt = render_scene(seed=99, size=(480, 320))
    print(f"scene with {len(gt)} ground-truth words\n")

    for name in ("i-d", "fast", "full"):
        cfg = preset(name, seed=11)
        t0 = time.perf_counter()
        plist = propose(rgb, cfg)
        dt = time.perf_counter() - t0
        cover = best_covers(plist, gt)
        print(f"{name:6s} {cfg.n_hierarchies:2d} hierarchies "
              f"{len(plist):5d} proposals in {dt:5.2f}s   "
              f"worst word IoU {cover.min():.2f}")

    plist = propose(rgb, preset("fast", seed=11))
    print(f"\ntop proposals (fast preset) of {len(plist)}:")
    for p in plist[:5]:
        x0, y0, x1, y1 = (round(v, 1) for v in p.bbox)
        src, node = p.provenance
        print(f"  score {p.score:9.3g}  ({x0:6.1f},{y0:6.1f},{x1:6.1f},{y1:6.1f})"
              f"  from hierarchy {src} node {node}")

    # a cap and an overlap filter for consumers that want short lists
    capped = propose(rgb, preset("fast", seed=11, max_proposals=20))
    print(f"\nmax_proposals=20 keeps the best {len(capped)}")
    slim = nms_filter(plist, 0.8)
    print(f"nms at IoU 0.8 keeps {len(slim)} of {len(plist)}")

    csv = OUT / "proposals.csv"
    write_proposals(plist, csv)
    write_proposals(plist, OUT / "proposals.json", fmt="json")
    back = read_proposals(OUT / "proposals.json")
    assert [p.bbox for p in back] == [p.bbox for p in plist]
    print(f"\nwrote {csv} and a JSON twin; JSON round trip is exact")


if __name__ == "__main__":
    main()

"""Train the word/background classifier behind the "cls" strategy.

Group hypotheses are labeled by overlap with ground-truth word boxes
(IoU >= 0.7 word, <= 0.2 background), summarized as five coefficients of
variation — the per-group spread of ink intensity, background intensity,
size, stroke width and boundary gradient relative to their means — and a
Real AdaBoost ensemble of decision stumps is boosted on those labels.

Running this script end to end reproduces the packaged model byte for
byte: 16 synthetic scenes (seeds 9000-9015), the default diversification,
100 rounds.  Expect roughly 15 seconds.

Run:  python3 demos/08_train_classifier.py
"""

import filecmp
import time
from pathlib import Path

import numpy as np

from textprop import (curves, harvest_training_data, load_pretrained, preset,
                      propose, render_scene, train)
from textprop.boost import pretrained_path
from textprop.evaluation import GroundTruth, GTImage

OUT = Path(__file__).parent / "out" / "08"

TRAIN_SEEDS = range(9000, 9016)
ROUNDS = 100


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    print(f"harvesting group hypotheses from {len(TRAIN_SEEDS)} scenes ...")
    t0 = time.perf_counter()
    scenes = [render_scene(s) for s in TRAIN_SEEDS]
    data = harvest_training_data(scenes)  # default (full) diversification
    pos = int((data.labels > 0).sum())
    print(f"  {len(data)} samples ({pos} word, {len(data) - pos} background) "
          f"in {time.perf_counter() - t0:.1f}s")

    t0 = time.perf_counter()
    model = train(data, rounds=ROUNDS)
    acc = (np.sign(model.confidence(data.features)) == data.labels).mean()
    print(f"trained {len(model.stumps)} stumps in "
          f"{time.perf_counter() - t0:.1f}s, training accuracy {acc:.3f}")

    path = OUT / "stumps.txt"
    model.save(path)
    if filecmp.cmp(path, pretrained_path(), shallow=False):
        print(f"saved -> {path} (byte-identical to the packaged model)")
    else:
        print(f"saved -> {path} (differs from the packaged model!)")

    # does the learned ranking actually help?  compare the area under
    # recall-vs-n against the pseudo-random baseline on held-out scenes
    print("\nheld-out comparison (10 fresh scenes, fast preset):")
    held = [render_scene(s) for s in range(9500, 9510)]
    gt = GroundTruth(images={
        f"h{i}": GTImage(boxes=b, ignore=np.zeros(len(b), bool),
                         texts=[""] * len(b))
        for i, (_, b) in enumerate(held)
    })
    for strategy in ("pr", "cls"):
        cfg = preset("fast", strategy=strategy, seed=2)
        boxes = {
            f"h{i}": np.asarray([p.bbox for p in propose(img, cfg, model=model)])
            for i, (img, _) in enumerate(held)
        }
        (curve,) = curves(gt, boxes, iou_grid=(0.5,), n_grid=())
        print(f"  {strategy:3s}  auc(recall vs n at IoU 0.5) = {curve.auc:.3f}")


if __name__ == "__main__":
    main()

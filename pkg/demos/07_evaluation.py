"""Recall/IoU evaluation of a proposal set against word ground truth.

The quality measure for a proposal generator: how many ground-truth words
are covered by at least one of the top-n proposals at IoU >= t?  Sweeping
n gives recall-vs-n curves (one per IoU threshold); sweeping t gives
recall-vs-IoU curves (one per budget n).  Areas under those curves
summarize each curve in one number.

This demo builds a small synthetic dataset, generates proposals for every
image, writes them to per-image CSVs like an external tool would, then
evaluates purely from the files.

Run:  python3 demos/07_evaluation.py
"""

from pathlib import Path

from textprop import (curves, ingest_external_proposals, ingest_ground_truth,
                      iou, preset, propose, recall_at, save_dataset)
from textprop.channels import load_image
from textprop.evaluation import write_curves_csv
from textprop.pipeline import write_proposals

OUT = Path(__file__).parent / "out" / "07"


def main():
    data = OUT / "data"
    props = OUT / "proposals"
    props.mkdir(parents=True, exist_ok=True)

    ids = save_dataset(data, count=6, seed=400, size=(480, 320))
    gt = ingest_ground_truth(data / "gt.csv", "plain-boxes")
    n_words = sum(len(img.boxes) for img in gt.images.values())
    print(f"dataset: {len(ids)} images, {n_words} words -> {data}")

    cfg = preset("fast", seed=1)
    for image_id in ids:
        plist = propose(load_image(data / f"{image_id}.png"), cfg)
        write_proposals(plist, props / f"{image_id}.csv")
    print(f"proposals written per image -> {props}")

    proposals = ingest_external_proposals(props)
    counts = {k: len(v) for k, v in proposals.items()}
    print(f"ingested counts: {counts}\n")

    print("iou on two hand boxes:",
          round(iou((0, 0, 2, 2), (1, 0, 3, 2)), 4), "\n")

    for t in (0.5, 0.7, 0.9):
        line = "  ".join(
            f"n={n:3d}: {recall_at(gt, proposals, n, t):.3f}"
            for n in (1, 10, 100)
        )
        print(f"recall at IoU {t}:  {line}")

    curve_list = curves(gt, proposals)
    csv = OUT / "curves.csv"
    write_curves_csv(csv, curve_list)
    print(f"\n{len(curve_list)} curves -> {csv}")
    for c in curve_list:
        if c.axis == "n":
            label = f"recall vs n at IoU={c.param}"
        else:
            label = f"recall vs IoU at n={c.param if c.param else 'all'}"
        print(f"  {label:26s} ends at {c.recall[-1]:.3f}, auc {c.auc:.3f}")


if __name__ == "__main__":
    main()

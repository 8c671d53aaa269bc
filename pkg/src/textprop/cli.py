"""Command-line front end: propose, evaluate, bench."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import boost, evaluation, pipeline, synth
from .mser import MserParams


def _parse_letters(text: str) -> tuple:
    return tuple(c for c in text.replace(",", "").replace(" ", "") if c)


def _parse_ints(text: str) -> tuple:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _parse_floats(text: str) -> tuple:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_topn(text: str) -> tuple:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        out.append(None if tok.lower() == "all" else int(tok))
    return tuple(out)


def _config_from_args(args) -> pipeline.DiversificationConfig:
    if args.preset:
        kw = dict(pipeline.PRESETS[args.preset])
    else:
        kw = dict(pipeline.PRESETS["full"])
    if args.channels:
        kw["channels"] = _parse_letters(args.channels)
    if args.levels:
        kw["levels"] = _parse_ints(args.levels)
    if args.cues:
        kw["cues"] = _parse_letters(args.cues)
    mser = MserParams(delta=args.mser_delta, min_area=args.mser_min_area,
                      max_area=args.mser_max_area,
                      max_variation=args.mser_max_variation)
    return pipeline.DiversificationConfig(
        strategy=args.rank, seed=args.seed, mser=mser,
        max_proposals=args.max_proposals, nms_iou=args.nms,
        threads=args.threads, **kw)


def _resolve_model(args):
    """Load the stump model for cls ranking; a missing model downgrades the
    strategy to prnfa with a warning."""
    if args.rank != "cls":
        return None, args.rank
    path = Path(args.model) if args.model else boost.pretrained_path()
    try:
        return boost.load_ensemble(path), "cls"
    except (FileNotFoundError, ValueError) as exc:
        print(f"warning: cannot load model ({exc}); falling back to prnfa",
              file=sys.stderr)
        return None, "prnfa"


def _cmd_propose(args) -> int:
    model, rank = _resolve_model(args)
    args.rank = rank
    config = _config_from_args(args)
    plist = pipeline.propose(args.image, config, model=model)
    if args.dump_regions:
        from .channels import write_pgm
        from .mser import label_raster
        for seg in pipeline.build_segmentations(args.image, config):
            ci = seg.channel_image
            labels = label_raster(seg.regions, ci.raster.shape)
            write_pgm(f"{args.dump_regions}-{ci.channel}{ci.level}.pgm", labels)
    if args.out:
        pipeline.write_proposals(plist, args.out, args.format)
    else:
        sys.stdout.write(pipeline.CSV_HEADER + "\n")
        for pr in plist:
            x0, y0, x1, y1 = (pipeline._fmt_float(v) for v in pr.bbox)
            sys.stdout.write(f"{x0},{y0},{x1},{y1},"
                             f"{pipeline._fmt_float(pr.score)},{pr.strategy}\n")
    return 0


def _cmd_evaluate(args) -> int:
    gt = evaluation.ingest_ground_truth(args.gt, args.gt_format)
    proposals = evaluation.ingest_external_proposals(args.proposals)
    curve_list = evaluation.curves(gt, proposals,
                                   iou_grid=_parse_floats(args.iou),
                                   n_grid=_parse_topn(args.topn))
    evaluation.write_curves_csv(args.out, curve_list)
    for c in curve_list:
        if c.axis == "n":
            print(f"iou={c.param:g}: recall@all={c.recall[-1]:.4f} "
                  f"auc={c.auc:.4f}")
    return 0


def _cmd_bench(args) -> int:
    if args.synthetic:
        scenes = synth.make_dataset(args.synthetic, seed=args.seed)
        images = {f"img_{i:03d}": rgb for i, (rgb, _) in enumerate(scenes)}
        gt = evaluation.GroundTruth({
            f"img_{i:03d}": evaluation.GTImage(
                boxes, np.zeros(len(boxes), bool), [None] * len(boxes))
            for i, (_, boxes) in enumerate(scenes)})
    else:
        if not args.images or not args.gt:
            print("bench needs --images and --gt (or --synthetic N)",
                  file=sys.stderr)
            return 2
        gt = evaluation.ingest_ground_truth(args.gt, args.gt_format)
        paths = sorted(p for p in Path(args.images).iterdir()
                       if p.suffix.lower() in (".png", ".jpg", ".jpeg", ".ppm"))
        if args.limit:
            paths = paths[:args.limit]
        images = {p.stem: p for p in paths}
        gt = evaluation.GroundTruth(
            {k: v for k, v in gt.images.items() if k in images})
        missing = sorted(set(images) - set(gt.images))
        if missing:
            print(f"warning: no ground truth for {len(missing)} images; "
                  "skipping them", file=sys.stderr)
            images = {k: v for k, v in images.items() if k in gt.images}

    model, rank = _resolve_model(args)
    args.rank = rank
    config = _config_from_args(args)
    proposals = {}
    elapsed = []
    counts = []
    for image_id in sorted(images):
        t0 = time.perf_counter()
        plist = pipeline.propose(images[image_id], config, model=model)
        elapsed.append(time.perf_counter() - t0)
        counts.append(len(plist))
        proposals[image_id] = plist.boxes()
        if args.proposals_out:
            out_dir = Path(args.proposals_out)
            out_dir.mkdir(parents=True, exist_ok=True)
            pipeline.write_proposals(plist, out_dir / f"{image_id}.csv")

    recalls = {t: evaluation.recall_at(gt, proposals, n=10 ** 9, t=t)
               for t in (0.5, 0.7, 0.9)}
    label = args.preset or "custom"
    print(f"{'config':<14}{'images':>7}{'avg boxes':>11}{'r@0.5':>8}"
          f"{'r@0.7':>8}{'r@0.9':>8}{'s/img':>8}")
    print(f"{label:<14}{len(images):>7}{np.mean(counts):>11.1f}"
          f"{recalls[0.5]:>8.3f}{recalls[0.7]:>8.3f}{recalls[0.9]:>8.3f}"
          f"{np.mean(elapsed):>8.2f}")
    return 0


def _add_common_propose_args(p) -> None:
    p.add_argument("--preset", choices=sorted(pipeline.PRESETS),
                   help="named channel/level/cue combination")
    p.add_argument("--channels", help="channel ids, e.g. RGBI or R,G,B")
    p.add_argument("--levels", help="pyramid levels, e.g. 1,2")
    p.add_argument("--cues", help="grouping cues, e.g. DFBGS")
    p.add_argument("--rank", choices=("pr", "nfa", "prnfa", "cls"),
                   default="prnfa", help="ranking strategy (default prnfa)")
    p.add_argument("--model", help="stump model file for --rank cls "
                   "(default: bundled model)")
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")
    p.add_argument("--max-proposals", type=int, default=None,
                   help="truncate the ranked list")
    p.add_argument("--nms", type=float, default=None,
                   help="greedy NMS IoU threshold (off by default)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads (results do not depend on this)")
    p.add_argument("--mser-delta", type=int, default=2)
    p.add_argument("--mser-min-area", type=float, default=0.00007)
    p.add_argument("--mser-max-area", type=float, default=0.5)
    p.add_argument("--mser-max-variation", type=float, default=0.3)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textprop",
        description="Text-specific object proposals: segmentation, grouping, "
                    "ranking and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propose", help="rank word-box proposals for an image")
    p.add_argument("image", help="PNG/JPEG/PPM image file")
    _add_common_propose_args(p)
    p.add_argument("--out", help="output file (stdout CSV when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--dump-regions", metavar="PREFIX",
                   help="debug: write per-raster region label PGMs")
    p.set_defaults(func=_cmd_propose)

    p = sub.add_parser("evaluate", help="recall curves for stored proposals")
    p.add_argument("--gt", required=True, help="ground-truth directory or file")
    p.add_argument("--gt-format", required=True,
                   choices=evaluation.GT_FORMATS)
    p.add_argument("--proposals", required=True,
                   help="proposal CSV file or per-image directory")
    p.add_argument("--iou", default="0.5,0.7,0.9",
                   help="IoU thresholds for recall-vs-N curves")
    p.add_argument("--topn", default="100,1000,10000,all",
                   help="top-N cutoffs for recall-vs-IoU curves")
    p.add_argument("--out", required=True, help="output curve CSV")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("bench", help="propose + evaluate in one pass")
    p.add_argument("--images", help="image directory")
    p.add_argument("--gt", help="ground-truth directory or file")
    p.add_argument("--gt-format", default="icdar2013",
                   choices=evaluation.GT_FORMATS)
    p.add_argument("--synthetic", type=int, default=0,
                   help="bench on N generated scenes instead of a dataset")
    p.add_argument("--limit", type=int, default=0,
                   help="use only the first N images")
    p.add_argument("--proposals-out", help="directory for per-image CSVs")
    _add_common_propose_args(p)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Recall evaluation of ranked box proposals against word ground truth.

The protocol is detection-free: a ground-truth word counts as recalled at
threshold t within the top N proposals if ANY of those N boxes overlaps it
with IoU >= t.  No one-to-one assignment is computed, so a single proposal
may cover several words.  Boxes are continuous (xmin, ymin, xmax, ymax)
rectangles; ground-truth entries flagged as ignorable (e.g. "###"
transcriptions) are excluded from the denominator.
"""

from __future__ import annotations

import csv
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

GT_FORMATS = ("icdar2013", "svt-xml", "plain-boxes")

IGNORE_MARK = "###"

DEFAULT_IOU_GRID = (0.5, 0.7, 0.9)
DEFAULT_TOPN_GRID = (100, 1000, 10000, None)


def iou(a, b) -> float:
    """Intersection over union of two continuous boxes; degenerate or
    disjoint pairs give 0."""
    ax0, ay0, ax1, ay1 = (float(v) for v in a)
    bx0, by0, bx1, by1 = (float(v) for v in b)
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def iou_matrix(a, b) -> np.ndarray:
    """(m, k) IoU matrix between two box arrays."""
    A = np.asarray(a, np.float64).reshape(-1, 4)
    B = np.asarray(b, np.float64).reshape(-1, 4)
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.zeros((A.shape[0], B.shape[0]))
    iw = (np.minimum(A[:, None, 2], B[None, :, 2])
          - np.maximum(A[:, None, 0], B[None, :, 0]))
    ih = (np.minimum(A[:, None, 3], B[None, :, 3])
          - np.maximum(A[:, None, 1], B[None, :, 1]))
    pos = (iw > 0.0) & (ih > 0.0)
    inter = np.where(pos, iw * ih, 0.0)
    area_a = (A[:, 2] - A[:, 0]) * (A[:, 3] - A[:, 1])
    area_b = (B[:, 2] - B[:, 0]) * (B[:, 3] - B[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    out = np.zeros_like(inter)
    valid = pos & (union > 0.0)
    np.divide(inter, union, out=out, where=valid)
    return out


@dataclass
class GTImage:
    boxes: np.ndarray
    ignore: np.ndarray
    texts: list

    @property
    def valid_boxes(self) -> np.ndarray:
        return self.boxes[~self.ignore]


@dataclass
class GroundTruth:
    images: dict = field(default_factory=dict)

    def ids(self):
        return sorted(self.images)

    def total_valid(self) -> int:
        return int(sum((~g.ignore).sum() for g in self.images.values()))


def ingest_ground_truth(path, fmt: str) -> GroundTruth:
    """Read word ground truth from a directory (or single file) in one of
    the supported annotation layouts."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such ground-truth path: {path}")
    if fmt == "icdar2013":
        return _ingest_icdar2013(path)
    if fmt == "svt-xml":
        return _ingest_svt_xml(path)
    if fmt == "plain-boxes":
        return _ingest_plain_boxes(path)
    raise ValueError(f"unknown ground-truth format {fmt!r}")


def _parse_float(token, where):
    try:
        return float(token)
    except ValueError as exc:
        raise ValueError(f"{where}: bad coordinate {token!r}") from exc


def _ingest_icdar2013(path: Path) -> GroundTruth:
    """One gt_<image>.txt per image; lines are x1,y1,x2,y2,"transcription"
    and "###" marks unreadable words."""
    files = sorted(path.glob("*.txt")) if path.is_dir() else [path]
    if not files:
        raise ValueError(f"no .txt ground-truth files under {path}")
    gt = GroundTruth()
    for f in files:
        image_id = f.stem
        if image_id.startswith("gt_"):
            image_id = image_id[3:]
        boxes, ignore, texts = [], [], []
        with open(f, newline="", encoding="utf-8-sig") as fh:
            for lineno, row in enumerate(csv.reader(fh, skipinitialspace=True), 1):
                if not row or all(not c.strip() for c in row):
                    continue
                where = f"{f}:{lineno}"
                if len(row) not in (4, 5):
                    raise ValueError(f"{where}: expected 4 coordinates and a "
                                     f"transcription, got {len(row)} fields")
                x1, y1, x2, y2 = (_parse_float(c, where) for c in row[:4])
                if x2 < x1 or y2 < y1:
                    raise ValueError(f"{where}: inverted box "
                                     f"({x1},{y1},{x2},{y2})")
                text = row[4].strip() if len(row) == 5 else None
                boxes.append((x1, y1, x2, y2))
                texts.append(text)
                ignore.append(text == IGNORE_MARK)
        gt.images[image_id] = GTImage(
            np.asarray(boxes, np.float64).reshape(-1, 4),
            np.asarray(ignore, bool), texts)
    return gt


def _ingest_svt_xml(path: Path) -> GroundTruth:
    """SVT distribution XML: taggedRectangle elements carry x,y,width,height
    attributes and a tag child with the transcription."""
    files = sorted(path.glob("*.xml")) if path.is_dir() else [path]
    if not files:
        raise ValueError(f"no .xml ground-truth files under {path}")
    gt = GroundTruth()
    for f in files:
        try:
            root = ET.parse(f).getroot()
        except ET.ParseError as exc:
            raise ValueError(f"{f}: not parseable as XML: {exc}") from exc
        for image_el in root.iter("image"):
            name_el = image_el.find("imageName")
            if name_el is None or not (name_el.text or "").strip():
                raise ValueError(f"{f}: image element without imageName")
            image_id = Path(name_el.text.strip()).stem
            boxes, ignore, texts = [], [], []
            for rect in image_el.iter("taggedRectangle"):
                try:
                    x = float(rect.attrib["x"])
                    y = float(rect.attrib["y"])
                    w = float(rect.attrib["width"])
                    h = float(rect.attrib["height"])
                except (KeyError, ValueError) as exc:
                    raise ValueError(f"{f}: bad taggedRectangle attributes "
                                     f"for image {image_id}") from exc
                tag = rect.find("tag")
                text = tag.text.strip() if tag is not None and tag.text else None
                boxes.append((x, y, x + w, y + h))
                texts.append(text)
                ignore.append(text == IGNORE_MARK)
            gt.images[image_id] = GTImage(
                np.asarray(boxes, np.float64).reshape(-1, 4),
                np.asarray(ignore, bool), texts)
    if not gt.images:
        raise ValueError(f"no image entries found in {path}")
    return gt


def _ingest_plain_boxes(path: Path) -> GroundTruth:
    """CSV rows image-id,xmin,ymin,xmax,ymax with an optional transcription
    column; a header row is tolerated."""
    files = sorted(path.glob("*.csv")) if path.is_dir() else [path]
    if not files:
        raise ValueError(f"no .csv ground-truth files under {path}")
    gt = GroundTruth()
    staging = {}
    for f in files:
        with open(f, newline="", encoding="utf-8-sig") as fh:
            for lineno, row in enumerate(csv.reader(fh, skipinitialspace=True), 1):
                if not row or all(not c.strip() for c in row):
                    continue
                where = f"{f}:{lineno}"
                if lineno == 1 and _looks_like_header(row):
                    continue
                if len(row) not in (5, 6):
                    raise ValueError(f"{where}: expected image-id and 4 "
                                     f"coordinates, got {len(row)} fields")
                image_id = row[0].strip()
                if not image_id:
                    raise ValueError(f"{where}: empty image id")
                x1, y1, x2, y2 = (_parse_float(c, where) for c in row[1:5])
                if x2 < x1 or y2 < y1:
                    raise ValueError(f"{where}: inverted box")
                text = row[5].strip() if len(row) == 6 else None
                staging.setdefault(image_id, []).append((x1, y1, x2, y2, text))
    for image_id, rows in staging.items():
        boxes = np.asarray([r[:4] for r in rows], np.float64)
        texts = [r[4] for r in rows]
        ignore = np.asarray([t == IGNORE_MARK for t in texts], bool)
        gt.images[image_id] = GTImage(boxes, ignore, texts)
    if not gt.images:
        raise ValueError(f"no ground-truth rows found under {path}")
    return gt


def _looks_like_header(row) -> bool:
    if len(row) < 5:
        return False
    try:
        float(row[1])
        return False
    except ValueError:
        return True


def ingest_external_proposals(path, fmt: str = "plain-boxes-with-score") -> dict:
    """Read ranked proposal boxes per image.

    A directory is treated as one CSV per image (named <image-id>.csv, the
    propose output format: xmin,ymin,xmax,ymax[,score[,strategy]]); rows
    are kept in file order, which for pipeline output is rank order.

    A single file is treated as a combined table with rows
    image-id,xmin,ymin,xmax,ymax[,score]; when every row of an image has a
    score, that image's rows are sorted by descending score (the usual
    objectness convention), otherwise file order is kept.
    """
    if fmt != "plain-boxes-with-score":
        raise ValueError(f"unknown proposal format {fmt!r}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such proposals path: {path}")
    out = {}
    if path.is_dir():
        files = sorted(path.glob("*.csv"))
        if not files:
            raise ValueError(f"no .csv proposal files under {path}")
        for f in files:
            boxes = []
            with open(f, newline="", encoding="utf-8-sig") as fh:
                for lineno, row in enumerate(csv.reader(fh, skipinitialspace=True), 1):
                    if not row or all(not c.strip() for c in row):
                        continue
                    if lineno == 1 and _proposal_header(row):
                        continue
                    where = f"{f}:{lineno}"
                    if len(row) < 4:
                        raise ValueError(f"{where}: expected at least 4 "
                                         f"coordinates")
                    boxes.append([_parse_float(c, where) for c in row[:4]])
            out[f.stem] = np.asarray(boxes, np.float64).reshape(-1, 4)
        return out

    staging = {}
    with open(path, newline="", encoding="utf-8-sig") as fh:
        for lineno, row in enumerate(csv.reader(fh, skipinitialspace=True), 1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and _looks_like_header(row):
                continue
            where = f"{path}:{lineno}"
            if len(row) not in (5, 6):
                raise ValueError(f"{where}: expected image-id, 4 coordinates "
                                 f"and an optional score")
            image_id = row[0].strip()
            coords = [_parse_float(c, where) for c in row[1:5]]
            score = _parse_float(row[5], where) if len(row) == 6 else None
            staging.setdefault(image_id, []).append((coords, score))
    for image_id, rows in staging.items():
        boxes = np.asarray([r[0] for r in rows], np.float64)
        scores = [r[1] for r in rows]
        if all(s is not None for s in scores):
            order = np.argsort(-np.asarray(scores), kind="stable")
            boxes = boxes[order]
        out[image_id] = boxes
    return out


def _proposal_header(row) -> bool:
    try:
        float(row[0])
        return False
    except ValueError:
        return True


def _check_proposal_ids(gt: GroundTruth, proposals) -> None:
    unknown = sorted(set(proposals) - set(gt.images))
    if unknown:
        raise ValueError("proposals reference images absent from the ground "
                         "truth: " + ", ".join(unknown))


def recall_at(gt: GroundTruth, proposals, n: int, t: float) -> float:
    """Fraction of valid ground-truth words covered (IoU >= t) by any of
    each image's first n proposals.  Images missing from ``proposals``
    contribute zero covered words; proposal ids unknown to the ground truth
    raise."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if not 0.0 < t <= 1.0:
        raise ValueError("IoU threshold must be in (0, 1]")
    _check_proposal_ids(gt, proposals)
    total = gt.total_valid()
    if total == 0:
        raise ValueError("ground truth contains no valid (non-ignored) boxes")
    covered = 0
    for image_id, gti in gt.images.items():
        gtb = gti.valid_boxes
        if gtb.shape[0] == 0:
            continue
        props = np.asarray(proposals.get(image_id, np.zeros((0, 4))),
                           np.float64).reshape(-1, 4)[:int(n)]
        if props.shape[0] == 0:
            continue
        m = iou_matrix(props, gtb)
        covered += int(((m >= t).any(axis=0)).sum())
    return covered / total


@dataclass
class RecallCurve:
    """One evaluation curve: axis is "n" (x = top-N cutoffs at a fixed IoU
    threshold ``param``) or "iou" (x = IoU thresholds at a fixed cutoff
    ``param``, None meaning all proposals)."""

    axis: str
    param: object
    x: np.ndarray
    recall: np.ndarray
    auc: float


def _auc_log_n(x, recall) -> float:
    """Area under recall vs N with N on a normalized log10 axis."""
    x = np.asarray(x, np.float64)
    r = np.asarray(recall, np.float64)
    if x.size == 1 or x[-1] <= 1.0:
        return float(r[-1])
    u = np.log10(x) / np.log10(x[-1])
    return float(np.sum((r[1:] + r[:-1]) * np.diff(u)) / 2.0)


def _auc_linear(x, recall) -> float:
    x = np.asarray(x, np.float64)
    r = np.asarray(recall, np.float64)
    if x.size == 1 or x[-1] == x[0]:
        return float(r[0])
    u = (x - x[0]) / (x[-1] - x[0])
    return float(np.sum((r[1:] + r[:-1]) * np.diff(u)) / 2.0)


def _cover_stats(gt: GroundTruth, proposals, thresholds, cutoffs):
    """Per ground-truth word: the first rank covering it at each IoU
    threshold, and the best IoU within each top-N cutoff."""
    ranks = {t: [] for t in thresholds}
    best = {c: [] for c in cutoffs}
    for image_id, gti in gt.images.items():
        gtb = gti.valid_boxes
        k = gtb.shape[0]
        if k == 0:
            continue
        props = np.asarray(proposals.get(image_id, np.zeros((0, 4))),
                           np.float64).reshape(-1, 4)
        if props.shape[0] == 0:
            for t in thresholds:
                ranks[t].append(np.full(k, -1, np.int64))
            for c in cutoffs:
                best[c].append(np.zeros(k))
            continue
        m = iou_matrix(props, gtb)
        for t in thresholds:
            hit = m >= t
            any_hit = hit.any(axis=0)
            first = np.where(any_hit, hit.argmax(axis=0), -1)
            ranks[t].append(first)
        for c in cutoffs:
            top = m if c is None else m[:int(c)]
            if top.shape[0] == 0:
                best[c].append(np.zeros(k))
            else:
                best[c].append(top.max(axis=0))
    ranks = {t: np.concatenate(v) for t, v in ranks.items()}
    best = {c: np.concatenate(v) for c, v in best.items()}
    return ranks, best


def _default_n_axis(proposals) -> np.ndarray:
    n_max = max((np.asarray(b).reshape(-1, 4).shape[0] for b in proposals.values()),
                default=0)
    n_max = max(n_max, 1)
    pts = np.unique(np.rint(np.logspace(0, np.log10(n_max), 49)).astype(np.int64))
    return pts[pts >= 1]


def curves(gt: GroundTruth, proposals, iou_grid=DEFAULT_IOU_GRID,
           n_grid=DEFAULT_TOPN_GRID, n_axis=None, iou_axis=None) -> list:
    """Recall-vs-N curves (one per IoU threshold in ``iou_grid``) and
    recall-vs-IoU curves (one per top-N cutoff in ``n_grid``, None meaning
    all proposals).  Returns RecallCurve entries, recall-vs-N curves first.
    """
    _check_proposal_ids(gt, proposals)
    total = gt.total_valid()
    if total == 0:
        raise ValueError("ground truth contains no valid (non-ignored) boxes")
    iou_grid = tuple(float(t) for t in iou_grid)
    for t in iou_grid:
        if not 0.0 < t <= 1.0:
            raise ValueError(f"IoU threshold {t} outside (0, 1]")
    n_grid = tuple(n_grid)
    if n_axis is None:
        n_axis = _default_n_axis(proposals)
    n_axis = np.asarray(n_axis, np.int64)
    if iou_axis is None:
        iou_axis = np.round(np.arange(0.5, 1.0 + 1e-9, 0.05), 10)
    iou_axis = np.asarray(iou_axis, np.float64)

    ranks, best = _cover_stats(gt, proposals, iou_grid, n_grid)
    out = []
    for t in iou_grid:
        r = ranks[t]
        rec = np.array([np.sum((r >= 0) & (r < n)) / total for n in n_axis])
        out.append(RecallCurve("n", t, n_axis.copy(), rec, _auc_log_n(n_axis, rec)))
    for c in n_grid:
        b = best[c]
        rec = np.array([np.sum(b >= t) / total for t in iou_axis])
        out.append(RecallCurve("iou", c, iou_axis.copy(), rec,
                               _auc_linear(iou_axis, rec)))
    return out


def write_curves_csv(path, curve_list) -> None:
    """Flatten curves into kind,param,x,value rows with an AUC summary
    block at the end."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "param", "x", "value"])
        for c in curve_list:
            kind = "recall_vs_n" if c.axis == "n" else "recall_vs_iou"
            param = _param_label(c)
            for x, r in zip(c.x, c.recall):
                writer.writerow([kind, param, _fmt(x), _fmt(r)])
        for c in curve_list:
            kind = "auc_vs_n" if c.axis == "n" else "auc_vs_iou"
            writer.writerow([kind, _param_label(c), "", _fmt(c.auc)])


def _param_label(c: RecallCurve) -> str:
    if c.axis == "n":
        return f"iou={c.param:g}"
    return "n=all" if c.param is None else f"n={int(c.param)}"


def _fmt(v) -> str:
    f = float(v)
    return str(int(f)) if f == int(f) else repr(f)

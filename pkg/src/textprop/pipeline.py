"""End-to-end proposal pipeline.

One image fans out into several segmentations (channel x pyramid level,
both region polarities pooled), each segmentation fans out into one
grouping hierarchy per similarity cue, every hierarchy node contributes a
candidate box, and the pooled candidates are scored, sorted and
deduplicated into a single ranked proposal list in native image
coordinates.

All randomness is derived from one master seed: each hierarchy gets its own
generator keyed by (seed, channel, level, cue), so results are reproducible
and independent of thread count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import channels as channels_mod
from .channels import CHANNEL_IDS, ChannelImage, canonical_channels, canonical_levels, load_image
from .evaluation import iou_matrix
from .grouping import CUE_IDS, Cue, Hierarchy, canonical_cues, slc_cluster
from .mser import DARK_ON_LIGHT, LIGHT_ON_DARK, MserParams, extract_mser
from .ranking import STRATEGIES, Proposal, ProposalList, dedup_and_sort, score_hierarchy
from .regionfeat import feature_matrix, gradient_magnitude

PRESETS = {
    "fast": {"channels": ("R", "G", "B"), "levels": (1,), "cues": ("D", "F")},
    "full": {"channels": ("R", "G", "B", "I"), "levels": (1, 2),
             "cues": ("D", "F", "B", "G", "S")},
    "i-d": {"channels": ("I",), "levels": (1,), "cues": ("D",)},
    "i-df": {"channels": ("I",), "levels": (1,), "cues": ("D", "F")},
    "i-dfbgs": {"channels": ("I",), "levels": (1,), "cues": ("D", "F", "B", "G", "S")},
    "rgbi-dfbgs": {"channels": ("R", "G", "B", "I"), "levels": (1,),
                   "cues": ("D", "F", "B", "G", "S")},
}


@dataclass(frozen=True)
class DiversificationConfig:
    """Which segmentations and cues to run, and how to rank the pool."""

    channels: tuple = ("R", "G", "B", "I")
    levels: tuple = (1, 2)
    cues: tuple = ("D", "F", "B", "G", "S")
    strategy: str = "prnfa"
    seed: int = 0
    mser: MserParams = field(default_factory=MserParams)
    max_proposals: int | None = None
    nms_iou: float | None = None
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "channels", canonical_channels(self.channels))
        object.__setattr__(self, "levels", canonical_levels(self.levels))
        object.__setattr__(self, "cues", canonical_cues(self.cues))
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown ranking strategy {self.strategy!r}")
        if int(self.seed) < 0:
            raise ValueError("seed must be nonnegative")
        if self.max_proposals is not None and self.max_proposals < 1:
            raise ValueError("max_proposals must be positive")
        if self.nms_iou is not None and not 0.0 < self.nms_iou < 1.0:
            raise ValueError("nms_iou must be in (0, 1)")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @property
    def n_hierarchies(self) -> int:
        return len(self.channels) * len(self.levels) * len(self.cues)


def preset(name: str, **overrides) -> DiversificationConfig:
    """A named channel/level/cue combination, optionally overridden."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r} (have: {', '.join(PRESETS)})")
    kw = dict(PRESETS[name])
    kw.update(overrides)
    return DiversificationConfig(**kw)


@dataclass
class Segmentation:
    """Pooled both-polarity regions of one channel raster with everything
    grouping needs, mapped into native (level-1) units."""

    channel_image: ChannelImage
    regions: list
    features: np.ndarray   # (n, 5), D and S columns scaled to level-1 units
    centers: np.ndarray    # (n, 2) level-1 coordinates
    leaf_bboxes: np.ndarray  # (n, 4) continuous level-1 boxes
    grad_p99: float

    @property
    def n_regions(self) -> int:
        return len(self.regions)


def _segment_channel(ci: ChannelImage, params: MserParams,
                     image_shape: tuple) -> Segmentation:
    """Extract both polarities on one raster and lift measurements to
    native coordinates."""
    regions = []
    for polarity in (DARK_ON_LIGHT, LIGHT_ON_DARK):
        regions.extend(extract_mser(ci.raster, params, polarity,
                                    source=(ci.channel, ci.level)))
    h, w = image_shape
    if regions:
        F = feature_matrix(regions, ci.raster)
        centers = np.asarray([r.centroid for r in regions], np.float64)
        boxes = np.asarray([r.bbox for r in regions], np.float64)
        boxes[:, 2:] += 1.0  # inclusive pixel box to continuous corner box
        if ci.scale != 1.0:
            F = F.copy()
            F[:, 2] *= ci.scale  # major axis
            F[:, 3] *= ci.scale  # stroke width
            centers = centers * ci.scale
            boxes = boxes * ci.scale
        boxes[:, 0] = np.clip(boxes[:, 0], 0.0, w)
        boxes[:, 1] = np.clip(boxes[:, 1], 0.0, h)
        boxes[:, 2] = np.clip(boxes[:, 2], 0.0, w)
        boxes[:, 3] = np.clip(boxes[:, 3], 0.0, h)
    else:
        F = np.zeros((0, 5))
        centers = np.zeros((0, 2))
        boxes = np.zeros((0, 4))
    grad_p99 = float(np.percentile(gradient_magnitude(ci.raster), 99))
    return Segmentation(ci, regions, F, centers, boxes, grad_p99)


def build_segmentations(image, config: DiversificationConfig) -> list:
    """Channel/level rasters of an image, each segmented into regions."""
    rgb = _as_rgb(image)
    chan_images = channels_mod.decompose(rgb, config.channels, config.levels)
    shape = rgb.shape[:2]

    def work(ci):
        return _segment_channel(ci, config.mser, shape)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(work, chan_images))
    return [work(ci) for ci in chan_images]


def _cue_for(seg: Segmentation, cue_id: str, diag: float) -> Cue:
    if cue_id in ("F", "B"):
        return Cue(cue_id, 255.0)
    if cue_id in ("D", "S"):
        return Cue(cue_id, diag)
    # gradient scale adapts to the raster's own contrast
    return Cue(cue_id, max(seg.grad_p99, 1.0))


def _hierarchy_tasks(segmentations, config):
    for seg in segmentations:
        if seg.n_regions == 0:
            continue
        for cue_id in config.cues:
            yield seg, cue_id


def build_hierarchies(image, config: DiversificationConfig | None = None) -> list:
    """All grouping hierarchies of an image under a configuration, ordered
    channel-major (R, G, B, I), level 1 before 2, cues in D,F,B,G,S order.
    Segmentations with no regions contribute no hierarchy."""
    if config is None:
        config = DiversificationConfig()
    rgb = _as_rgb(image)
    diag = float(np.hypot(rgb.shape[1], rgb.shape[0]))
    segmentations = build_segmentations(rgb, config)
    tasks = list(_hierarchy_tasks(segmentations, config))

    def work(task):
        seg, cue_id = task
        ci = seg.channel_image
        return slc_cluster(seg.features, seg.centers,
                           _cue_for(seg, cue_id, diag), diag,
                           leaf_bboxes=seg.leaf_bboxes,
                           source=(ci.channel, ci.level, cue_id))

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(work, tasks))
    return [work(t) for t in tasks]


def _hierarchy_rng(seed: int, source: tuple):
    """Deterministic per-hierarchy generator keyed by the master seed and
    the hierarchy's (channel, level, cue) coordinates."""
    channel, level, cue_id = source
    key = [int(seed), CHANNEL_IDS.index(channel), int(level),
           CUE_IDS.index(cue_id)]
    return np.random.default_rng(np.random.SeedSequence(key))


def propose(image, config: DiversificationConfig | None = None,
            model=None) -> ProposalList:
    """Ranked word-box proposals for one image.

    ``image`` is a path or an (H, W, 3) uint8 array.  The "cls" strategy
    needs a stump-ensemble ``model``.  Returns a ProposalList in rank order
    (best first), deduplicated on exact box equality, optionally truncated
    and NMS-filtered per the configuration.
    """
    if config is None:
        config = DiversificationConfig()
    if config.strategy == "cls" and model is None:
        raise ValueError('strategy "cls" requires a model '
                         "(see boost.load_pretrained)")
    rgb = _as_rgb(image)
    hierarchies = build_hierarchies(rgb, config)

    def score(h: Hierarchy):
        rng = _hierarchy_rng(config.seed, h.source)
        return score_hierarchy(h, config.strategy, rng=rng, model=model)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            all_scores = list(pool.map(score, hierarchies))
    else:
        all_scores = [score(h) for h in hierarchies]

    pooled = []
    for h, scores in zip(hierarchies, all_scores):
        for i in range(h.n_nodes):
            pooled.append(Proposal(
                bbox=tuple(float(v) for v in h.bbox[i]),
                score=float(scores[i]),
                strategy=config.strategy,
                provenance=(h.source, i),
            ))
    plist = dedup_and_sort(pooled)
    if config.nms_iou is not None:
        plist = nms_filter(plist, config.nms_iou)
    if config.max_proposals is not None:
        plist = ProposalList(plist.proposals[:config.max_proposals], plist.dedup)
    return plist


def nms_filter(plist: ProposalList, iou_threshold: float) -> ProposalList:
    """Greedy non-maximum suppression in rank order: a proposal is dropped
    when it overlaps an already kept one with IoU above the threshold."""
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError("iou_threshold must be in (0, 1)")
    kept = []
    kept_boxes = np.empty((len(plist), 4))
    k = 0
    for pr in plist:
        box = np.asarray(pr.bbox, np.float64).reshape(1, 4)
        if k and iou_matrix(box, kept_boxes[:k]).max() > iou_threshold:
            continue
        kept.append(pr)
        kept_boxes[k] = box
        k += 1
    return ProposalList(kept, plist.dedup)


# ---------------------------------------------------------------------------
# serialization

CSV_HEADER = "xmin,ymin,xmax,ymax,score,strategy"


def write_proposals(plist: ProposalList, path, fmt: str = "csv") -> None:
    """Serialize a proposal list in rank order.

    csv: one header line then xmin,ymin,xmax,ymax,score,strategy rows.
    json: an object with the dedup policy and a proposals array that also
    carries each proposal's provenance.  Floats are written with full
    round-trip precision in both formats.
    """
    path = Path(path)
    if fmt == "csv":
        lines = [CSV_HEADER]
        for pr in plist:
            x0, y0, x1, y1 = (_fmt_float(v) for v in pr.bbox)
            lines.append(f"{x0},{y0},{x1},{y1},{_fmt_float(pr.score)},{pr.strategy}")
        path.write_text("\n".join(lines) + "\n", encoding="ascii")
    elif fmt == "json":
        entries = []
        for pr in plist:
            channel, level, cue_id = pr.provenance[0] if pr.provenance else (None, None, None)
            entries.append({
                "xmin": pr.bbox[0], "ymin": pr.bbox[1],
                "xmax": pr.bbox[2], "ymax": pr.bbox[3],
                "score": pr.score, "strategy": pr.strategy,
                "provenance": {
                    "channel": channel, "level": level, "cue": cue_id,
                    "node": pr.provenance[1] if pr.provenance else None,
                },
            })
        doc = {"format": "textprop-proposals", "version": 1,
               "dedup": plist.dedup, "count": len(plist), "proposals": entries}
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="ascii")
    else:
        raise ValueError(f"unknown proposal format {fmt!r}")


def read_proposals(path) -> ProposalList:
    """Load a JSON proposal file written by write_proposals."""
    doc = json.loads(Path(path).read_text(encoding="ascii"))
    if doc.get("format") != "textprop-proposals":
        raise ValueError(f"{path} is not a textprop proposal file")
    out = []
    for e in doc["proposals"]:
        prov = e.get("provenance") or {}
        provenance = ()
        if prov.get("channel") is not None:
            provenance = ((prov["channel"], prov["level"], prov["cue"]),
                          prov["node"])
        out.append(Proposal(
            bbox=(float(e["xmin"]), float(e["ymin"]),
                  float(e["xmax"]), float(e["ymax"])),
            score=float(e["score"]), strategy=e["strategy"],
            provenance=provenance))
    return ProposalList(out, doc.get("dedup", "exact-bbox"))


def _fmt_float(v: float) -> str:
    f = float(v)
    return str(int(f)) if f == int(f) and abs(f) < 1e15 else repr(f)


def _as_rgb(image) -> np.ndarray:
    if isinstance(image, (str, Path)):
        return load_image(image)
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise ValueError("image must be a path or an (H, W, 3) uint8 array")
    return arr

"""Text-specific object proposals.

A detector-free pipeline that turns an image into a ranked list of word
bounding-box hypotheses: grayscale channel decomposition, stable-region
segmentation, similarity-cue grouping into hierarchies, and probabilistic
or learned ranking of the pooled groups, plus an evaluation harness for
recall/IoU curves against word-level ground truth.
"""

from .boost import (StumpEnsemble, TrainingSet, harvest_training_data,
                    load_ensemble, load_pretrained, train)
from .channels import ChannelImage, ImageFormatError, decompose, load_image
from .evaluation import (GroundTruth, RecallCurve, curves,
                         ingest_external_proposals, ingest_ground_truth, iou,
                         iou_matrix, recall_at)
from .grouping import (Cue, Hierarchy, RunningStats, merge_stats,
                       pairwise_distance, slc_cluster, stats_from_values)
from .mser import MserParams, Region, extract_mser
from .pipeline import (DiversificationConfig, build_hierarchies,
                       build_segmentations, nms_filter, preset, propose,
                       read_proposals, write_proposals)
from .ranking import (Proposal, ProposalList, binomial_tail, dedup_and_sort,
                      rank_classifier, rank_nfa, rank_pseudorandom)
from .regionfeat import RegionFeatures, compute_features, feature_matrix
from .synth import make_dataset, render_scene, save_dataset

__version__ = "0.1.0"

__all__ = [
    "ChannelImage", "Cue", "DiversificationConfig", "GroundTruth",
    "Hierarchy", "ImageFormatError", "MserParams", "Proposal",
    "ProposalList", "RecallCurve", "Region", "RegionFeatures",
    "RunningStats", "StumpEnsemble", "TrainingSet", "binomial_tail",
    "build_hierarchies", "build_segmentations", "compute_features", "curves",
    "decompose", "dedup_and_sort", "extract_mser", "feature_matrix",
    "harvest_training_data", "ingest_external_proposals",
    "ingest_ground_truth", "iou", "iou_matrix", "load_ensemble",
    "load_image", "load_pretrained", "make_dataset", "merge_stats",
    "nms_filter", "pairwise_distance", "preset", "propose",
    "rank_classifier", "rank_nfa", "rank_pseudorandom", "read_proposals",
    "recall_at", "render_scene", "save_dataset", "slc_cluster",
    "stats_from_values", "train", "write_proposals",
]

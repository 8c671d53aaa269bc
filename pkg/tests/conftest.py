import numpy as np
import pytest
from PIL import Image


@pytest.fixture
def tiny_rgb():
    """4x4 image with distinct channel planes."""
    rgb = np.zeros((4, 4, 3), np.uint8)
    rgb[:, :, 0] = np.arange(16).reshape(4, 4) * 10
    rgb[:, :, 1] = 100
    rgb[:, :, 2] = 255 - rgb[:, :, 0]
    return rgb


@pytest.fixture
def png_file(tmp_path, tiny_rgb):
    path = tmp_path / "tiny.png"
    Image.fromarray(tiny_rgb).save(path)
    return path


def make_gt(images: dict):
    """GroundTruth from {image_id: (k, 4) boxes} with nothing ignored."""
    from textprop.evaluation import GroundTruth, GTImage

    out = GroundTruth()
    for image_id, boxes in images.items():
        boxes = np.asarray(boxes, np.float64).reshape(-1, 4)
        out.images[image_id] = GTImage(boxes, np.zeros(len(boxes), bool),
                                       [None] * len(boxes))
    return out

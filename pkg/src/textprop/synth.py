"""Synthetic text scenes with exact word ground truth.

Scenes are built from a small block-glyph alphabet (5 x 7 cells, every
glyph 4-connected) scaled to a per-word cell size, so each letter is a
single uniform-intensity connected component on a lightly noised
background.  Words are placed with generous separation, letters within a
word share ink color, stroke width and height, and an optional dark panel
carries light-on-dark words.  Ground truth is the exact ink bounding box
of each word in continuous image coordinates.

Everything is a pure function of the seed, which makes these scenes usable
as frozen corpora for tests and for training the bundled classifier.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

GLYPHS = {
    "A": ("#####",
          "#...#",
          "#...#",
          "#####",
          "#...#",
          "#...#",
          "#...#"),
    "B": ("####.",
          "#..#.",
          "#..#.",
          "####.",
          "#..#.",
          "#..#.",
          "####."),
    "C": ("#####",
          "#....",
          "#....",
          "#....",
          "#....",
          "#....",
          "#####"),
    "D": ("####.",
          "#..#.",
          "#..#.",
          "#..#.",
          "#..#.",
          "#..#.",
          "####."),
    "E": ("#####",
          "#....",
          "#....",
          "####.",
          "#....",
          "#....",
          "#####"),
    "F": ("#####",
          "#....",
          "#....",
          "####.",
          "#....",
          "#....",
          "#...."),
    "H": ("#...#",
          "#...#",
          "#...#",
          "#####",
          "#...#",
          "#...#",
          "#...#"),
    "I": ("#####",
          "..#..",
          "..#..",
          "..#..",
          "..#..",
          "..#..",
          "#####"),
    "J": ("#####",
          "...#.",
          "...#.",
          "...#.",
          "...#.",
          "#..#.",
          "####."),
    "L": ("#....",
          "#....",
          "#....",
          "#....",
          "#....",
          "#....",
          "#####"),
    "O": ("#####",
          "#...#",
          "#...#",
          "#...#",
          "#...#",
          "#...#",
          "#####"),
    "P": ("#####",
          "#...#",
          "#...#",
          "#####",
          "#....",
          "#....",
          "#...."),
    "T": ("#####",
          "..#..",
          "..#..",
          "..#..",
          "..#..",
          "..#..",
          "..#.."),
    "U": ("#...#",
          "#...#",
          "#...#",
          "#...#",
          "#...#",
          "#...#",
          "#####"),
}

GLYPH_W = 5
GLYPH_H = 7

# dark ink palettes: grayscale plus saturated-but-dark colors so every
# channel keeps usable contrast against the light background
_INK_COLORS = (
    (40, 40, 40),
    (25, 25, 25),
    (150, 30, 30),
    (30, 130, 45),
    (35, 55, 160),
    (130, 95, 25),
)

_BACKGROUND = 232.0
_PANEL = 42.0
_PANEL_INK = 225.0
_NOISE_SIGMA = 3.0

# separation (in pixels, between inflated word boxes) that keeps
# within-word linkage distances strictly below any cross-word distance
_WORD_MARGIN = 30


def _glyph_mask(letter: str, cell: int) -> np.ndarray:
    rows = GLYPHS[letter]
    bitmap = np.array([[c == "#" for c in row] for row in rows], bool)
    return np.kron(bitmap, np.ones((cell, cell), bool))


def _word_masks(letters, cell: int):
    """Per-letter ink masks and x offsets for a word; the inter-letter gap
    equals one cell."""
    masks = [_glyph_mask(ch, cell) for ch in letters]
    offsets = []
    x = 0
    for _ in letters:
        offsets.append(x)
        x += GLYPH_W * cell + cell
    width = x - cell
    return masks, offsets, width


def render_scene(seed: int = 0, size=(640, 480), word_count=(3, 6),
                 panel_prob: float = 0.5):
    """One synthetic scene.

    Returns (rgb, boxes): an (H, W, 3) uint8 image and a (k, 4) float64
    array of word ink boxes (xmin, ymin, xmax, ymax) in continuous
    coordinates.  Identical seeds give identical scenes.
    """
    rng = np.random.default_rng(seed)
    w, h = int(size[0]), int(size[1])
    img = np.full((h, w, 3), _BACKGROUND)
    occupied = []  # inflated (x0, y0, x1, y1) keep-out boxes
    boxes = []

    panel = None
    if rng.random() < panel_prob and w >= 76 and h >= 56:
        # clamp so the panel (and so any word placed on it) fits the canvas
        pw = min(int(rng.integers(180, 281)), w - 16)
        ph = min(int(rng.integers(80, 131)), h - 16)
        px = int(rng.integers(8, max(9, w - pw - 8)))
        py = int(rng.integers(8, max(9, h - ph - 8)))
        img[py:py + ph, px:px + pw] = _PANEL
        panel = (px, py, pw, ph)
        occupied.append((px - _WORD_MARGIN, py - _WORD_MARGIN,
                         px + pw + _WORD_MARGIN, py + ph + _WORD_MARGIN))

    glyph_keys = sorted(GLYPHS)
    n_words = int(rng.integers(word_count[0], word_count[1] + 1))
    panel_words_left = 1 if panel is not None else 0

    for wi in range(n_words):
        k = int(rng.integers(2, 7))
        letters = [glyph_keys[i] for i in rng.integers(0, len(glyph_keys), k)]
        cell = int(rng.integers(3, 9))
        masks, offsets, width = _word_masks(letters, cell)
        height = GLYPH_H * cell

        on_panel = False
        if panel_words_left and width <= panel[2] - 24 and height <= panel[3] - 24:
            on_panel = True
            panel_words_left -= 1

        pos = _place(rng, w, h, width, height, occupied, panel if on_panel else None)
        if pos is None:
            continue
        x, y = pos
        if on_panel:
            color = np.array([_PANEL_INK] * 3)
        else:
            base = _INK_COLORS[int(rng.integers(0, len(_INK_COLORS)))]
            color = np.asarray(base, np.float64) + rng.integers(-10, 11, 3)
        ix0 = iy0 = 1 << 30
        ix1 = iy1 = -1
        for mask, dx in zip(masks, offsets):
            ys, xs = np.nonzero(mask)
            gx = xs + x + dx
            gy = ys + y
            img[gy, gx] = color
            ix0 = min(ix0, int(gx.min()))
            ix1 = max(ix1, int(gx.max()))
            iy0 = min(iy0, int(gy.min()))
            iy1 = max(iy1, int(gy.max()))
        boxes.append((float(ix0), float(iy0), float(ix1 + 1), float(iy1 + 1)))
        if not on_panel:
            occupied.append((x - _WORD_MARGIN, y - _WORD_MARGIN,
                             x + width + _WORD_MARGIN, y + height + _WORD_MARGIN))
        else:
            occupied.append((x - 12, y - 12, x + width + 12, y + height + 12))

    noise = rng.normal(0.0, _NOISE_SIGMA, img.shape)
    rgb = np.clip(img + noise, 0, 255).astype(np.uint8)
    return rgb, np.asarray(boxes, np.float64).reshape(-1, 4)


def _place(rng, w, h, width, height, occupied, panel, tries: int = 80):
    """Rejection-sample a top-left position whose inflated box avoids all
    occupied boxes (or sits inside the panel, for panel words)."""
    for _ in range(tries):
        if panel is not None:
            px, py, pw, ph = panel
            if pw - width - 24 <= 0 or ph - height - 24 <= 0:
                return None
            x = px + 12 + int(rng.integers(0, pw - width - 24))
            y = py + 12 + int(rng.integers(0, ph - height - 24))
            return x, y
        if w - width - 12 <= 0 or h - height - 12 <= 0:
            return None
        x = 6 + int(rng.integers(0, w - width - 12))
        y = 6 + int(rng.integers(0, h - height - 12))
        box = (x - _WORD_MARGIN, y - _WORD_MARGIN,
               x + width + _WORD_MARGIN, y + height + _WORD_MARGIN)
        if all(box[2] <= o[0] or o[2] <= box[0] or box[3] <= o[1] or o[3] <= box[1]
               for o in occupied):
            return x, y
    return None


def make_dataset(count: int, seed: int = 0, size=(640, 480)) -> list:
    """A list of (rgb, boxes) scenes with consecutive seeds."""
    return [render_scene(seed + i, size=size) for i in range(count)]


def save_dataset(directory, count: int, seed: int = 0, size=(640, 480)) -> list:
    """Render scenes to <dir>/img_NNN.png plus a plain-boxes gt.csv; returns
    the image ids."""
    from PIL import Image

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    ids = []
    for i in range(count):
        rgb, boxes = render_scene(seed + i, size=size)
        image_id = f"img_{i:03d}"
        Image.fromarray(rgb).save(directory / f"{image_id}.png")
        for b in boxes:
            rows.append(f"{image_id},{b[0]:g},{b[1]:g},{b[2]:g},{b[3]:g}")
        ids.append(image_id)
    (directory / "gt.csv").write_text("\n".join(rows) + "\n", encoding="ascii")
    return ids

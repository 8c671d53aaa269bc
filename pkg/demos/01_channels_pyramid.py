"""Channel decomposition and the two-level pyramid.

Renders a synthetic scene, loads it back from disk like any photograph,
and splits it into grayscale channels (R, G, B and the luma channel I) at
full and half resolution.  Every channel raster is what the region
extractor consumes; the per-entry scale factor is what later maps
half-resolution boxes back into image coordinates.

Run:  python3 demos/01_channels_pyramid.py
"""

from pathlib import Path

import numpy as np
from PIL import Image

from textprop import decompose, render_scene
from textprop.channels import load_image, luma, write_pgm

OUT = Path(__file__).parent / "out" / "01"


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    rgb, boxes = render_scene(seed=7, size=(480, 320))
    scene_path = OUT / "scene.png"
    Image.fromarray(rgb).save(scene_path)
    print(f"rendered a {rgb.shape[1]}x{rgb.shape[0]} scene with "
          f"{len(boxes)} words -> {scene_path}")

    loaded = load_image(scene_path)
    assert np.array_equal(loaded, rgb), "PNG round trip is lossless"
    print("reloaded losslessly from PNG")

    print("\nluma check: pure red/green/blue map to the BT.601 weights")
    for name, px in [("red", [255, 0, 0]), ("green", [0, 255, 0]),
                     ("blue", [0, 0, 255])]:
        val = luma(np.array([[px]], np.uint8))[0, 0]
        print(f"  {name:5s} -> {val}")

    print("\nfull decomposition (4 channels x 2 pyramid levels):")
    print(f"  {'channel':7s} {'level':5s} {'shape':12s} scale")
    for ci in decompose(loaded):
        h, w = ci.raster.shape
        print(f"  {ci.channel:7s} {ci.level:<5d} {w}x{h:<8d} {ci.scale}")

    print("\na restricted decomposition (I channel, level 1 only):")
    (only,) = decompose(loaded, channels="I", levels=(1,))
    print(f"  {only.channel} level {only.level}: {only.raster.shape}")

    pgm = OUT / "luma.pgm"
    write_pgm(pgm, only.raster)
    print(f"\nwrote the luma raster as a binary PGM -> {pgm}")

    # level-2 rasters are 2x2 block means with edge replication, so their
    # dimensions are ceil(w/2) x ceil(h/2) even for odd sizes
    odd = decompose(loaded[:319, :477], levels=(2,))
    print("odd-sized input", (477, 319), "halves to",
          tuple(reversed(odd[0].raster.shape)))


if __name__ == "__main__":
    main()

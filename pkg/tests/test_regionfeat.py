import numpy as np
import pytest

from textprop.mser import DARK_ON_LIGHT, MserParams, Region, extract_mser
from textprop.regionfeat import (
    CUE_COLUMNS,
    FEATURE_NAMES,
    compute_features,
    feature_matrix,
    gradient_magnitude,
)


def region_from_mask(mask, level=0, polarity="dark"):
    ys, xs = np.nonzero(mask)
    pixels = np.stack([xs, ys], axis=1).astype(np.int32)
    return Region(
        pixels=pixels,
        bbox=(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())),
        centroid=(float(xs.mean()), float(ys.mean())),
        level=level,
        polarity=polarity,
        source="test",
    )


def bar_scene(width=11, height=3, ink=50, bg=200, pad=4):
    raster = np.full((height + 2 * pad, width + 2 * pad), bg, np.uint8)
    raster[pad : pad + height, pad : pad + width] = ink
    mask = np.zeros_like(raster, bool)
    mask[pad : pad + height, pad : pad + width] = True
    return raster, mask


class TestColumnLayout:
    def test_names_and_columns_agree(self):
        assert len(FEATURE_NAMES) == 5
        assert set(CUE_COLUMNS) == {"F", "B", "D", "S", "G"}
        assert sorted(CUE_COLUMNS.values()) == [0, 1, 2, 3, 4]

    def test_as_array_ordering(self):
        raster, mask = bar_scene()
        f = compute_features(region_from_mask(mask), raster)
        arr = f.as_array()
        assert arr[CUE_COLUMNS["F"]] == f.intensity_mean
        assert arr[CUE_COLUMNS["B"]] == f.boundary_intensity_mean
        assert arr[CUE_COLUMNS["D"]] == f.major_axis
        assert arr[CUE_COLUMNS["S"]] == f.stroke_width_mean
        assert arr[CUE_COLUMNS["G"]] == f.border_gradient_mean


class TestIntensity:
    def test_means_on_bar(self):
        raster, mask = bar_scene(ink=50, bg=200)
        f = compute_features(region_from_mask(mask), raster)
        assert f.intensity_mean == 50.0
        assert f.boundary_intensity_mean == 200.0

    def test_boundary_falls_back_when_region_fills_raster(self):
        raster = np.full((3, 3), 77, np.uint8)
        mask = np.ones_like(raster, bool)
        f = compute_features(region_from_mask(mask), raster)
        assert f.boundary_intensity_mean == 77.0


class TestMajorAxis:
    def test_bar_equals_its_length(self):
        raster, mask = bar_scene(width=11, height=3)
        f = compute_features(region_from_mask(mask), raster)
        assert f.major_axis == pytest.approx(11.0)

    def test_single_pixel(self):
        raster = np.full((5, 5), 200, np.uint8)
        raster[2, 2] = 0
        mask = raster == 0
        f = compute_features(region_from_mask(mask), raster)
        assert f.major_axis == pytest.approx(1.0)
        assert f.stroke_width_mean == pytest.approx(1.0)

    def test_square_diagonal_free(self):
        # for an n x n square both eigenvalues are equal: axis == n
        raster, mask = bar_scene(width=7, height=7)
        f = compute_features(region_from_mask(mask), raster)
        assert f.major_axis == pytest.approx(7.0)

    def test_rotation_symmetry(self):
        rng = np.random.default_rng(3)
        raster = np.full((20, 20), 220, np.uint8)
        blob = rng.random((20, 20)) < 0.2
        blob[0, 0] = True
        f1 = compute_features(region_from_mask(blob), raster)
        f2 = compute_features(region_from_mask(blob.T), raster.T.copy())
        assert f1.major_axis == pytest.approx(f2.major_axis)


class TestStrokeWidth:
    @pytest.mark.parametrize("h,expected", [(1, 1.0), (3, 3.0), (5, 5.0)])
    def test_bar_width(self, h, expected):
        raster, mask = bar_scene(width=15, height=h)
        f = compute_features(region_from_mask(mask), raster)
        assert f.stroke_width_mean == pytest.approx(expected)

    def test_thick_blob_wider_than_thin(self):
        thin_raster, thin = bar_scene(width=15, height=1)
        thick_raster, thick = bar_scene(width=15, height=7)
        ft = compute_features(region_from_mask(thin), thin_raster)
        fk = compute_features(region_from_mask(thick), thick_raster)
        assert fk.stroke_width_mean > ft.stroke_width_mean


class TestGradient:
    def test_uniform_image_zero(self):
        g = gradient_magnitude(np.full((6, 6), 44, np.uint8))
        assert (g == 0).all()

    def test_linear_ramp(self):
        raster = np.tile(np.arange(0, 60, 10, np.uint8), (4, 1))
        g = gradient_magnitude(raster)
        # central differences with replicated edges: half-step at the borders
        want = np.full((4, 6), 10.0)
        want[:, 0] = 5.0
        want[:, -1] = 5.0
        assert g == pytest.approx(want)

    def test_invariant_under_inversion(self):
        rng = np.random.default_rng(8)
        raster = rng.integers(0, 256, size=(12, 12), dtype=np.uint8)
        assert gradient_magnitude(raster) == pytest.approx(
            gradient_magnitude(255 - raster)
        )

    def test_border_gradient_positive_on_edges(self):
        raster, mask = bar_scene(ink=0, bg=255)
        f = compute_features(region_from_mask(mask), raster)
        assert f.border_gradient_mean > 0


class TestFeatureMatrix:
    def test_matches_per_region(self):
        raster = np.full((30, 30), 210, np.uint8)
        raster[3:8, 3:20] = 40
        raster[15:26, 5:9] = 90
        regions = extract_mser(
            raster, MserParams(min_area=0.002, max_area=0.5), DARK_ON_LIGHT
        )
        assert len(regions) >= 2
        mat = feature_matrix(regions, raster)
        assert mat.shape == (len(regions), 5)
        for i, r in enumerate(regions):
            assert mat[i] == pytest.approx(compute_features(r, raster).as_array())

    def test_empty(self):
        mat = feature_matrix([], np.zeros((4, 4), np.uint8))
        assert mat.shape == (0, 5)

    def test_precomputed_gradient_equivalent(self):
        raster, mask = bar_scene()
        r = region_from_mask(mask)
        g = gradient_magnitude(raster)
        assert compute_features(r, raster, grad=g).as_array() == pytest.approx(
            compute_features(r, raster).as_array()
        )

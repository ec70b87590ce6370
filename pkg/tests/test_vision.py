"""Vision: segmentation, contour features, moment invariance, region selection."""

import numpy as np
import pytest

from handlang.vision import (
    DEFAULT_SKIN_BAND,
    FrameRaster,
    HandPlacement,
    HsvThreshold,
    InvalidRegionError,
    InvalidSceneError,
    RegionBox,
    RegionCache,
    SceneSpec,
    Distractor,
    contour_bank,
    crop_patch,
    extract_contour_features,
    moment_signature_from_mask,
    raster_glyph,
    render_synthetic_frame,
    rgb_to_hsv,
    segment_skin,
    select_regions,
    select_regions_detailed,
    trace_boundary,
)
from handlang.vision.contours import label_components
from handlang.vision.synthetic import SKIN_RGB
from handlang.vocabulary import GestureClass


def skin_frame(mask: np.ndarray) -> FrameRaster:
    """Paint mask pixels in the reference skin tone on black."""
    img = np.zeros(mask.shape + (3,), dtype=np.uint8)
    img[mask] = np.array(SKIN_RGB, dtype=np.uint8)
    return FrameRaster(img)


class TestRaster:
    def test_frame_minimum_size(self):
        with pytest.raises(ValueError):
            FrameRaster(np.zeros((32, 32, 3), dtype=np.uint8))

    def test_png_round_trip(self):
        rng = np.random.default_rng(0)
        frame = FrameRaster(rng.integers(0, 256, (64, 80, 3), dtype=np.uint8))
        again = FrameRaster.from_png_bytes(frame.to_png_bytes())
        assert np.array_equal(frame.pixels, again.pixels)

    def test_rgb_to_hsv_known_values(self):
        arr = np.array([[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.5, 0.5]]])
        h, s, v = rgb_to_hsv(arr)
        assert h[0, 0] == pytest.approx(0.0)
        assert h[0, 1] == pytest.approx(120.0)
        assert s[0, 2] == pytest.approx(0.0)
        assert v[0, 0] == pytest.approx(1.0)

    def test_skin_tone_inside_default_band(self):
        arr = np.array([[np.array(SKIN_RGB) / 255.0]])
        h, s, v = rgb_to_hsv(arr)
        b = DEFAULT_SKIN_BAND
        assert b.hue_min <= h[0, 0] <= b.hue_max
        assert b.sat_min <= s[0, 0] <= b.sat_max
        assert b.val_min <= v[0, 0] <= b.val_max


class TestSegmentation:
    def test_black_frame_empty_mask(self):
        frame = FrameRaster(np.zeros((64, 64, 3), dtype=np.uint8))
        assert not segment_skin(frame, DEFAULT_SKIN_BAND, 0).any()

    def test_rectangle_segmented_exactly_with_zero_blur(self):
        mask = np.zeros((64, 64), dtype=bool)
        mask[10:30, 20:50] = True
        out = segment_skin(skin_frame(mask), DEFAULT_SKIN_BAND, 0)
        assert np.array_equal(out, mask)

    def test_idempotent_on_binarized_frame(self):
        mask = np.zeros((64, 64), dtype=bool)
        mask[12:40, 8:30] = True
        once = segment_skin(skin_frame(mask), DEFAULT_SKIN_BAND, 0)
        twice = segment_skin(skin_frame(once), DEFAULT_SKIN_BAND, 0)
        assert np.array_equal(once, twice)

    def test_hue_wrap_band(self):
        band = HsvThreshold(350.0, 10.0, 0.2, 1.0, 0.2, 1.0, hue_wrap=True)
        red = FrameRaster(np.full((64, 64, 3), (200, 30, 30), dtype=np.uint8))
        assert segment_skin(red, band, 0).all()


class TestContours:
    def test_label_components_counts_and_separates(self):
        mask = np.zeros((20, 20), dtype=bool)
        mask[2:5, 2:5] = True
        mask[10:15, 10:16] = True
        labels, count = label_components(mask)
        assert count == 2
        assert len(np.unique(labels)) == 3

    def test_label_components_8_connectivity_joins_diagonal(self):
        mask = np.zeros((6, 6), dtype=bool)
        mask[1, 1] = True
        mask[2, 2] = True
        assert label_components(mask, connectivity=8)[1] == 1
        assert label_components(mask, connectivity=4)[1] == 2

    def test_square_contour_features(self):
        mask = np.zeros((100, 100), dtype=bool)
        mask[30:70, 30:70] = True
        feats = extract_contour_features(mask, min_area=10)
        assert len(feats) == 1
        f = feats[0]
        assert f.area == pytest.approx(1600, rel=0.02)
        assert f.bbox == (30, 30, 40, 40)
        deep = [d for d in f.defects if d.depth > 2.0]
        assert deep == []

    def test_empty_mask_no_contours(self):
        assert extract_contour_features(np.zeros((50, 50), dtype=bool), 10) == []

    def test_min_area_filters_small_blob(self):
        mask = np.zeros((60, 60), dtype=bool)
        mask[5:25, 5:25] = True  # 400 px
        mask[40:43, 40:43] = True  # 9 px
        feats = extract_contour_features(mask, min_area=50)
        assert len(feats) == 1

    def test_boundary_is_closed_loop_on_the_square(self):
        mask = np.zeros((30, 30), dtype=bool)
        mask[10:20, 10:20] = True
        boundary = trace_boundary(mask)
        assert len(boundary) == 36  # 10x10 square rim
        assert (boundary[:, 0].min(), boundary[:, 0].max()) == (10, 19)

    def test_ring_has_hole(self):
        feats = extract_contour_features(raster_glyph(GestureClass.OK, 120), min_area=100)
        assert feats[0].hole_area_frac > 0.05

    def test_finger_glyph_has_deep_defects(self):
        feats = extract_contour_features(raster_glyph(GestureClass.DIGIT_1, 120), 100)
        assert feats[0].deep_defect_count() >= 1


class TestMomentInvariance:
    @pytest.mark.parametrize("gesture", [GestureClass.DIGIT_5, GestureClass.PIC, GestureClass.LEFT])
    def test_translation_invariance(self, gesture):
        glyph = raster_glyph(gesture, 80)
        base = np.zeros((200, 200), dtype=bool)
        base[10 : 10 + 80, 10 : 10 + 80] = glyph
        shifted = np.zeros((200, 200), dtype=bool)
        shifted[97 : 97 + 80, 41 : 41 + 80] = glyph
        s1 = moment_signature_from_mask(base)
        s2 = moment_signature_from_mask(shifted)
        assert np.linalg.norm(s1 - s2) / np.linalg.norm(s1) < 1e-3

    @pytest.mark.parametrize("gesture", [GestureClass.DIGIT_5, GestureClass.PIC, GestureClass.LEFT])
    def test_rotation_90_invariance(self, gesture):
        glyph = raster_glyph(gesture, 120)
        s1 = moment_signature_from_mask(glyph)
        s2 = moment_signature_from_mask(np.rot90(glyph))
        assert np.linalg.norm(s1 - s2) / np.linalg.norm(s1) < 1e-3

    @pytest.mark.parametrize("gesture", [GestureClass.DIGIT_5, GestureClass.PIC, GestureClass.LEFT])
    def test_scale_2x_invariance(self, gesture):
        glyph = raster_glyph(gesture, 100)
        doubled = np.kron(glyph, np.ones((2, 2), dtype=bool))
        s1 = moment_signature_from_mask(glyph)
        s2 = moment_signature_from_mask(doubled)
        assert np.linalg.norm(s1 - s2) / np.linalg.norm(s1) < 1e-3

    def test_signature_finite_for_every_glyph(self):
        for g in GestureClass:
            s = moment_signature_from_mask(raster_glyph(g, 90))
            assert np.all(np.isfinite(s))


class TestRenderer:
    def scene(self, **kw):
        base = dict(
            width=320,
            height=240,
            left=HandPlacement(GestureClass.DIGIT_5, (80, 120), 40, 0.0),
            right=HandPlacement(GestureClass.DIGIT_0, (240, 120), 40, 0.0),
            seed=7,
        )
        base.update(kw)
        return SceneSpec(**base)

    def test_deterministic_given_seed(self):
        f1, gt1 = render_synthetic_frame(self.scene())
        f2, gt2 = render_synthetic_frame(self.scene())
        assert np.array_equal(f1.pixels, f2.pixels)
        assert gt1 == gt2

    def test_ground_truth_boxes_cover_placements(self):
        _, gt = render_synthetic_frame(self.scene())
        for side, center in (("left", 80), ("right", 240)):
            x, y, w, h = gt[side]
            assert x <= center <= x + w

    def test_overlapping_hands_rejected(self):
        with pytest.raises(InvalidSceneError):
            render_synthetic_frame(
                self.scene(
                    left=HandPlacement(GestureClass.DIGIT_5, (150, 120), 40, 0.0),
                    right=HandPlacement(GestureClass.DIGIT_5, (170, 120), 40, 0.0),
                )
            )

    def test_out_of_frame_placement_rejected(self):
        with pytest.raises(InvalidSceneError):
            render_synthetic_frame(self.scene(left=HandPlacement(GestureClass.OK, (10, 10), 40, 0.0)))


class TestSelectRegions:
    def test_two_hands_found_with_high_iou(self):
        scene = SceneSpec(
            width=320,
            height=240,
            left=HandPlacement(GestureClass.DIGIT_5, (80, 120), 40, 8.0),
            right=HandPlacement(GestureClass.OK, (240, 120), 40, -5.0),
            seed=3,
        )
        frame, gt = render_synthetic_frame(scene)
        left, right, _ = select_regions(frame, RegionCache())
        assert left is not None and right is not None
        assert left.iou(RegionBox(*gt["left"])) >= 0.8
        assert right.iou(RegionBox(*gt["right"])) >= 0.8
        assert left.center()[0] < right.center()[0]
        assert not left.intersects(right)

    def test_black_frame_gives_absent_and_ages_cache(self):
        frame = FrameRaster(np.zeros((240, 320, 3), dtype=np.uint8))
        cache = RegionCache()
        left, right, cache = select_regions(frame, cache)
        assert left is None and right is None
        assert cache.clock == 1

    def test_distractor_rejected_when_cache_valid_near_hand(self):
        hand = HandPlacement(GestureClass.DIGIT_5, (80, 120), 38, 0.0)
        distractor = Distractor("glyph", (250, 120), 38, gesture=GestureClass.DIGIT_5)
        clean = SceneSpec(width=320, height=240, left=hand, seed=5)
        frame0, gt = render_synthetic_frame(clean)
        # prime the cache with the true hand
        _, _, cache = select_regions(frame0, RegionCache())
        scene = SceneSpec(width=320, height=240, left=hand, distractors=(distractor,), seed=5)
        frame, _ = render_synthetic_frame(scene)
        sel, _ = select_regions_detailed(frame, cache)
        picks = [p for p in (sel.left, sel.right) if p is not None]
        assert len(picks) == 1
        assert picks[0].box.iou(RegionBox(*gt["left"])) >= 0.8

    def test_without_cache_distractor_is_picked_too(self):
        hand = HandPlacement(GestureClass.DIGIT_5, (80, 120), 38, 0.0)
        distractor = Distractor("glyph", (250, 120), 38, gesture=GestureClass.DIGIT_5)
        scene = SceneSpec(width=320, height=240, left=hand, distractors=(distractor,), seed=5)
        frame, _ = render_synthetic_frame(scene)
        sel, _ = select_regions_detailed(frame, RegionCache())
        picks = [p for p in (sel.left, sel.right) if p is not None]
        assert len(picks) == 2

    def test_stale_cache_equals_empty_cache(self):
        hand = HandPlacement(GestureClass.DIGIT_2, (90, 120), 40, 0.0)
        scene = SceneSpec(width=320, height=240, left=hand, seed=9)
        frame, _ = render_synthetic_frame(scene)
        _, _, primed = select_regions(frame, RegionCache())
        # age the cache far beyond max_age with empty frames
        dark = FrameRaster(np.zeros((240, 320, 3), dtype=np.uint8))
        stale = primed
        for _ in range(primed.max_age + 1):
            _, _, stale = select_regions(dark, stale)
        scene2 = SceneSpec(
            width=320,
            height=240,
            left=HandPlacement(GestureClass.DIGIT_2, (240, 120), 40, 0.0),
            seed=9,
        )
        frame2, _ = render_synthetic_frame(scene2)
        from_stale = select_regions(frame2, stale)[:2]
        from_empty = select_regions(frame2, RegionCache())[:2]
        assert from_stale == from_empty

    def test_noisy_frames_still_hit_iou_080(self):
        import numpy as np

        rng = np.random.default_rng(55)
        hits = 0
        trials = 60
        for _ in range(trials):
            def placement(side):
                scale = int(rng.integers(32, 48))
                x_lo, x_hi = (
                    (scale + 2, 160 - scale - 6) if side == "left" else (160 + scale + 6, 318 - scale)
                )
                return HandPlacement(
                    GestureClass(int(rng.integers(0, 10))),
                    (int(rng.integers(x_lo, x_hi)), int(rng.integers(scale + 2, 238 - scale))),
                    scale,
                    float(rng.uniform(-15, 15)),
                )

            scene = SceneSpec(
                width=320, height=240, left=placement("left"), right=placement("right"),
                noise_sigma=0.1, seed=int(rng.integers(0, 2**31)),
            )
            frame, gt = render_synthetic_frame(scene)
            left, right, _ = select_regions(frame, RegionCache())
            hits += (
                left is not None
                and right is not None
                and left.iou(RegionBox(*gt["left"])) >= 0.8
                and right.iou(RegionBox(*gt["right"])) >= 0.8
            )
        assert hits / trials >= 0.95

    def test_speckle_not_selected(self):
        scene = SceneSpec(
            width=320,
            height=240,
            distractors=(Distractor("ellipse", (100, 100), 6),),
            seed=2,
        )
        frame, _ = render_synthetic_frame(scene)
        left, right, _ = select_regions(frame, RegionCache())
        assert left is None and right is None


class TestCropPatch:
    def frame_with_box(self):
        rng = np.random.default_rng(1)
        return FrameRaster(rng.integers(0, 256, (240, 320, 3), dtype=np.uint8))

    def test_identity_resize_for_32px_box(self):
        frame = self.frame_with_box()
        box = RegionBox(40, 50, 32, 32)
        patch = crop_patch(frame, box)
        expected = frame.as_float()[50:82, 40:72]
        assert np.allclose(patch, expected)

    def test_uniform_box_resizes_to_uniform(self):
        img = np.zeros((240, 320, 3), dtype=np.uint8)
        img[50:114, 40:104] = (120, 90, 60)
        patch = crop_patch(FrameRaster(img), RegionBox(40, 50, 64, 64))
        assert patch.shape == (32, 32, 3)
        assert np.allclose(patch, patch[0, 0])

    def test_output_dims_for_rectangular_box(self):
        patch = crop_patch(self.frame_with_box(), RegionBox(10, 20, 100, 60))
        assert patch.shape == (32, 32, 3)
        assert patch.min() >= 0.0 and patch.max() <= 1.0

    def test_degenerate_box_rejected(self):
        with pytest.raises(InvalidRegionError):
            crop_patch(self.frame_with_box(), RegionBox(10, 10, 1, 40))

    def test_out_of_frame_box_rejected(self):
        with pytest.raises(InvalidRegionError):
            crop_patch(self.frame_with_box(), RegionBox(300, 10, 40, 40))


class TestContourBank:
    def test_bank_has_one_entry_per_class(self):
        bank = contour_bank()
        assert [g for g, _ in bank] == list(GestureClass)

    def test_bank_features_distinct(self):
        bank = contour_bank()
        sigs = [f.moment_signature for _, f in bank]
        for i in range(len(sigs)):
            for j in range(i + 1, len(sigs)):
                assert np.linalg.norm(sigs[i] - sigs[j]) > 0.01

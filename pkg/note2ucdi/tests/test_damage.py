import numpy as np
import pytest
from pydantic import ValidationError

from note2ucdi.damage.background import remove_background
from note2ucdi.damage.features import (
    cluster_points,
    extract_feature_clusters,
    match_feature_clusters,
    ncc_scores,
)
from note2ucdi.damage.metrics import (
    binary_damage,
    count_damage_regions,
    damage_regions,
    rgb_damage,
    structural_overlap,
)
from note2ucdi.damage.models import BackgroundConfig, ClusterMatch, DamageConfig
from note2ucdi.damage.overlays import (
    GREEN,
    RED,
    render_cluster_annotations,
    render_damage_overlay,
    render_heatmap,
)
from note2ucdi.enhance.models import EnhanceConfig
from note2ucdi.exceptions import DamageError
from note2ucdi.imgcore.color import to_grayscale
from note2ucdi.imgcore.models import BinaryMask, RasterImage
from note2ucdi.imgcore.regions import build_region_masks
from note2ucdi.tests.oracles import dbscan_oracle, flood_fill_count
from note2ucdi.tests.synthetic import PAPER, erase_patch


def solid(shape, value) -> RasterImage:
    return RasterImage(pixels=np.full(shape, value, dtype=np.uint8))


def mask_from(bits) -> BinaryMask:
    return BinaryMask(bits=np.asarray(bits, dtype=bool))


def test_config_validation():
    with pytest.raises(ValidationError):
        BackgroundConfig(saturation_threshold=300)
    with pytest.raises(ValidationError):
        DamageConfig(adaptive_block_size=14)
    with pytest.raises(ValidationError):
        DamageConfig(overlap_threshold=1.5)
    with pytest.raises(ValidationError):
        DamageConfig(dbscan_eps=0)


def test_background_isolates_red_note():
    pixels = np.full((60, 80, 3), 255, dtype=np.uint8)
    pixels[10:50, 20:70] = (220, 20, 20)
    masked, mask = remove_background(RasterImage(pixels=pixels))
    truth = np.zeros((60, 80), dtype=bool)
    truth[10:50, 20:70] = True
    assert not (mask.bits & ~truth).any()
    # the elliptical kernel may shave the four outermost corner pixels
    assert mask.area >= truth.sum() - 4
    assert (masked.pixels[~mask.bits] == 255).all()
    assert np.array_equal(masked.pixels[mask.bits], pixels[mask.bits])


def test_background_of_grayscale_photo():
    gray = np.repeat(np.arange(256, dtype=np.uint8)[None, :, None], 3, axis=2)
    with pytest.raises(DamageError, match="no note detected"):
        remove_background(RasterImage(pixels=np.repeat(gray, 20, axis=0)))


def test_background_ignores_salt_noise(note):
    _, clean = remove_background(note.image)
    rng = np.random.default_rng(5)
    pixels = np.array(note.image.pixels)
    salt = (rng.random(note.mask.bits.shape) < 0.05) & ~note.mask.bits
    pixels[salt] = (200, 30, 200)
    _, noisy = remove_background(RasterImage(pixels=pixels))
    assert abs(noisy.area - clean.area) <= 0.01 * clean.area


def test_note_mask_matches_footprint(note):
    _, mask = remove_background(note.image)
    assert abs(mask.area - note.mask.area) <= 8
    assert not (mask.bits & ~note.mask.bits).any()


def test_binary_damage_examples():
    ref = np.ones((10, 10), dtype=bool)
    assert binary_damage(mask_from(ref), mask_from(ref))[0] == 0.0
    assert binary_damage(mask_from(ref), BinaryMask.empty(10, 10))[0] == 100.0
    torn = ref.copy()
    torn[5:, 5:] = False
    pct, damage = binary_damage(mask_from(ref), mask_from(torn))
    assert pct == 25.0
    assert damage.area == 25 and damage.bits[9, 9]


def test_binary_damage_ignores_extra_material():
    ref = np.zeros((10, 10), dtype=bool)
    ref[:5] = True
    pct, damage = binary_damage(mask_from(ref), BinaryMask.full(10, 10))
    assert pct == 0.0 and damage.area == 0


def test_binary_damage_errors():
    with pytest.raises(DamageError):
        binary_damage(BinaryMask.empty(4, 4), BinaryMask.full(4, 4))
    with pytest.raises(DamageError):
        binary_damage(BinaryMask.full(4, 4), BinaryMask.full(5, 4))


def test_rgb_damage_examples():
    mask = BinaryMask.full(8, 8)
    gray = solid((8, 8, 3), 100)
    assert rgb_damage(gray, gray, mask)[0] == 0.0
    assert rgb_damage(solid((8, 8, 3), 0), solid((8, 8, 3), 255), mask)[0] == 100.0
    pct, heatmap = rgb_damage(gray, solid((8, 8, 3), 151), mask)
    assert pct == pytest.approx(20.0)
    assert (heatmap == 51).all()


def test_rgb_damage_only_counts_the_mask():
    ref = solid((4, 4, 3), 0)
    other = np.zeros((4, 4, 3), dtype=np.uint8)
    other[:2] = 255
    bits = np.zeros((4, 4), dtype=bool)
    bits[2:] = True
    assert rgb_damage(ref, RasterImage(pixels=other), mask_from(bits))[0] == 0.0


def test_rgb_damage_with_enhancement_of_identical_notes(note):
    pct, _ = rgb_damage(note.image, note.image, note.mask, EnhanceConfig())
    assert pct == 0.0


def test_rgb_damage_empty_mask():
    with pytest.raises(DamageError):
        rgb_damage(solid((4, 4, 3), 0), solid((4, 4, 3), 0), BinaryMask.empty(4, 4))


REGIONS = build_region_masks(200, 100, 0.05, 0.10)


def test_overlap_of_empty_damage():
    result = structural_overlap(BinaryMask.empty(200, 100), REGIONS, 0.1)
    assert set(result.overlaps.values()) == {0.0}
    assert (result.damaged_edges, result.damaged_corners) == (0, 0)


def test_overlap_of_total_damage():
    result = structural_overlap(BinaryMask.full(200, 100), REGIONS, 0.1)
    assert set(result.overlaps.values()) == {1.0}
    assert (result.damaged_edges, result.damaged_corners) == (4, 4)


def test_overlap_threshold_is_strict():
    bits = np.zeros((100, 200), dtype=bool)
    bits[0:5, 100:120] = True  # 100 of the top strip's 1000 pixels
    result = structural_overlap(mask_from(bits), REGIONS, 0.1)
    assert result.overlaps["top"] == pytest.approx(0.1)
    assert result.damaged_edges == 0
    bits[0, 120] = True
    assert structural_overlap(mask_from(bits), REGIONS, 0.1).damaged_edges == 1


@pytest.mark.parametrize("seed", range(10))
def test_overlap_is_monotone(seed):
    rng = np.random.default_rng(seed)
    bits = rng.random((100, 200)) < 0.05
    more = bits | (rng.random((100, 200)) < 0.05)
    before = structural_overlap(mask_from(bits), REGIONS, 0.1)
    after = structural_overlap(mask_from(more), REGIONS, 0.1)
    assert all(after.overlaps[k] >= v for k, v in before.overlaps.items())
    assert after.damaged_edges >= before.damaged_edges
    assert after.damaged_corners >= before.damaged_corners


def test_count_regions_examples():
    assert count_damage_regions(BinaryMask.empty(50, 50), 2500) == 0
    bits = np.zeros((50, 50), dtype=bool)
    bits[2:8, 2:8] = True
    bits[20:30, 20:25] = True
    bits[40:48, 40:48] = True
    assert count_damage_regions(mask_from(bits), 2500) == 3


@pytest.mark.parametrize("seed", range(20))
def test_count_regions_matches_flood_fill(seed):
    bits = np.random.default_rng(seed).random((64, 64)) < 0.35
    # floor = ceil(0.0005 * 10000) = 5 pixels
    config = DamageConfig()
    assert count_damage_regions(mask_from(bits), 10000, config) == flood_fill_count(bits, 5)


def test_damage_regions_sorted_with_zones():
    bits = np.zeros((90, 90), dtype=bool)
    bits[0:10, 0:10] = True
    bits[40:45, 40:50] = True
    bits[80:82, 80:82] = True
    regions = damage_regions(mask_from(bits), min_area=5, top_k=5)
    assert [r.area for r in regions] == [100, 50]
    assert regions[0].zone == "Top Left"
    assert regions[1].zone == "Middle Center"
    assert regions[0].bbox == (0, 0, 10, 10)
    assert regions[0].centroid == pytest.approx((4.5, 4.5))
    assert len(damage_regions(mask_from(bits), min_area=1, top_k=1)) == 1


def test_two_distant_blobs_form_two_clusters(rng):
    blob = rng.normal(0, 0.5, size=(30, 2))
    points = np.vstack([blob, blob + 20.0])
    labels = cluster_points(points, eps=2.0, min_samples=3)
    assert set(labels.tolist()) == {0, 1}


def test_tight_group_is_one_cluster(rng):
    points = rng.uniform(0, 1, size=(10, 2))
    labels = cluster_points(points, eps=2.0, min_samples=3)
    assert set(labels.tolist()) == {0}


@pytest.mark.parametrize("seed", range(100))
def test_clustering_matches_dbscan_oracle(seed):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0, 100, size=(4, 2))
    points = np.vstack(
        [c + rng.normal(0, 4, size=(30, 2)) for c in centers] + [rng.uniform(0, 100, size=(30, 2))]
    )
    labels = cluster_points(points, eps=5.0, min_samples=4)
    assert labels.tolist() == dbscan_oracle(points, 5.0, 4)


def test_feature_clusters_of_note(reference):
    clusters = reference.clusters
    assert len(clusters) >= 1
    assert [c.id for c in clusters] == list(range(len(clusters)))
    for cluster in clusters:
        assert cluster.size >= DamageConfig().dbscan_min_samples
        tx, ty = cluster.template_origin
        assert tx >= 0 and ty >= 0
        assert tx + cluster.template.width <= reference.image.width


def test_plain_note_has_no_features():
    pixels = np.full((120, 200, 3), 255, dtype=np.uint8)
    pixels[20:100, 20:180] = PAPER
    img = RasterImage(pixels=pixels)
    _, mask = remove_background(img)
    with pytest.raises(DamageError, match="no salient features in reference"):
        extract_feature_clusters(img, mask)


def test_self_match_finds_everything(reference):
    matches, missing = match_feature_clusters(reference.clusters, reference.masked)
    assert missing == 0
    assert all(m.score >= 0.99 for m in matches)
    assert [m.cluster_id for m in matches] == [c.id for c in reference.clusters]


def test_erased_motif_is_missing(note, reference):
    cluster = max(reference.clusters, key=lambda c: c.size)
    x, y, w, h = cluster.bbox
    damaged = erase_patch(note, x - 2, y - 2, x + w + 2, y + h + 2)
    matches, missing = match_feature_clusters(reference.clusters, damaged)
    assert matches[cluster.id].missing
    assert matches[cluster.id].score < 0.5
    assert missing >= 1


def test_whitened_motif_is_missing(note, reference):
    cluster = max(reference.clusters, key=lambda c: c.size)
    x, y, w, h = cluster.bbox
    pixels = np.array(reference.masked.pixels)
    pixels[y : y + h, x : x + w] = 255
    matches, _ = match_feature_clusters(reference.clusters, RasterImage(pixels=pixels))
    assert matches[cluster.id].score < 0.5


def test_negative_template_anticorrelates(reference):
    cluster = max(reference.clusters, key=lambda c: c.size)
    gray = np.array(to_grayscale(reference.masked).pixels)
    tx, ty = cluster.template_origin
    th, tw = cluster.template.height, cluster.template.width
    negative = 255 - gray[ty : ty + th, tx : tx + tw]
    scores = ncc_scores(negative, np.array(cluster.template.pixels))
    assert scores.shape == (1, 1)
    assert scores[0, 0] == pytest.approx(-1.0, abs=1e-4)


def test_flat_template_scores_zero():
    window = np.random.default_rng(0).integers(0, 256, size=(20, 20), dtype=np.uint8)
    scores = ncc_scores(window, np.full((5, 5), 7, dtype=np.uint8))
    assert scores.shape == (16, 16)
    assert (scores == 0).all()


def test_flat_window_scores_zero():
    template = np.random.default_rng(1).integers(0, 256, size=(5, 5), dtype=np.uint8)
    scores = ncc_scores(np.full((12, 12), 255, dtype=np.uint8), template)
    assert (scores == 0).all()


def test_matching_on_a_shrunk_frame(note, reference):
    config = DamageConfig(match_working_side=200)
    cluster = max(reference.clusters, key=lambda c: c.size)
    matches, _ = match_feature_clusters(reference.clusters, reference.masked, config)
    found = matches[cluster.id]
    assert not found.missing
    assert abs(found.location[0] - cluster.template_origin[0]) <= 3
    assert abs(found.location[1] - cluster.template_origin[1]) <= 3
    assert found.bbox == cluster.bbox

    x, y, w, h = cluster.bbox
    damaged = erase_patch(note, x - 2, y - 2, x + w + 2, y + h + 2)
    matches, _ = match_feature_clusters(reference.clusters, damaged, config)
    assert matches[cluster.id].missing


def test_frames_within_working_side_match_at_full_size(reference):
    uncapped = DamageConfig(match_working_side=0)
    full = match_feature_clusters(reference.clusters, reference.masked, uncapped)
    assert full == match_feature_clusters(reference.clusters, reference.masked, DamageConfig())


def test_match_in_smaller_frame_fails(reference):
    with pytest.raises(DamageError):
        match_feature_clusters(reference.clusters, solid((10, 10, 3), 255))


def test_parallel_matching_is_deterministic(reference):
    serial = match_feature_clusters(reference.clusters, reference.masked, DamageConfig(workers=1))
    parallel = match_feature_clusters(reference.clusters, reference.masked, DamageConfig(workers=4))
    assert serial == parallel


def test_damage_overlay_paints_red(note):
    bits = np.zeros(note.mask.bits.shape, dtype=bool)
    bits[50:60, 50:60] = True
    overlay = render_damage_overlay(note.image, mask_from(bits)).pixels
    assert (overlay[bits] == RED).all()
    assert np.array_equal(overlay[~bits], note.image.pixels[~bits])


def test_heatmap_is_black_outside_mask():
    heatmap = np.full((10, 10), 200.0)
    bits = np.zeros((10, 10), dtype=bool)
    bits[:5] = True
    rendered = render_heatmap(heatmap, mask_from(bits)).pixels
    assert (rendered[5:] == 0).all()
    assert rendered[:5].any()


def test_cluster_annotations_use_two_styles():
    canvas = solid((60, 60, 3), 255)
    matches = [
        ClusterMatch(cluster_id=0, score=0.9, location=(5, 20), bbox=(5, 20, 15, 15), missing=False),
        ClusterMatch(cluster_id=1, score=0.1, location=(35, 20), bbox=(35, 20, 15, 15), missing=True),
    ]
    pixels = render_cluster_annotations(canvas, matches).pixels
    assert tuple(pixels[30, 5]) == GREEN
    assert tuple(pixels[30, 35]) == RED

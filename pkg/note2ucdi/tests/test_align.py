import cv2
import numpy as np
import pytest
from pydantic import ValidationError

from note2ucdi.align.homography import estimate_homography, warp_mask, warp_to_reference
from note2ucdi.align.keypoints import detect_keypoints, match_descriptors
from note2ucdi.align.models import AlignConfig, Correspondence, Homography, Keypoint
from note2ucdi.exceptions import AlignmentError, ImageFormatError
from note2ucdi.imgcore.models import BinaryMask, RasterImage
from note2ucdi.tests.oracles import nn_match_oracle
from note2ucdi.tests.synthetic import random_homography, textured_image, warp_image


def keypoints_from(descriptors: np.ndarray) -> list:
    """Keypoints whose x coordinate records their index."""
    return [
        Keypoint(x=float(i), y=0.0, scale=1.0, orientation=0.0, descriptor=d)
        for i, d in enumerate(descriptors)
    ]


def correspondences(src: np.ndarray, dst: np.ndarray) -> list:
    return [Correspondence(src=tuple(s), dst=tuple(d)) for s, d in zip(src, dst)]


@pytest.fixture(scope="module")
def texture() -> RasterImage:
    return textured_image(320, 240, seed=2)


def test_align_config_validation():
    with pytest.raises(ValidationError):
        AlignConfig(ratio_test=1.2)
    with pytest.raises(ValidationError):
        AlignConfig(min_inliers=3)


def test_homography_normalizes_scale():
    H = Homography(values=np.diag([2.0, 2.0, 2.0]))
    assert H == Homography.identity()


def test_homography_rejects_singular():
    with pytest.raises(ValidationError):
        Homography(values=np.zeros((3, 3)))
    with pytest.raises(ValidationError):
        Homography(values=(1, 2, 3, 2, 4, 6, 0, 0, 1))


def test_homography_apply_and_inverse():
    H = Homography(values=np.array([[1.0, 0, 5], [0, 2.0, -3], [0, 0, 1]]))
    points = np.array([[0.0, 0.0], [10.0, 4.0]])
    mapped = H.apply(points)
    assert np.allclose(mapped, [[5, -3], [15, 5]])
    assert np.allclose(H.inverse().apply(mapped), points)


def test_homography_json_round_trip():
    H = Homography(values=np.array([[1.01, 0.02, 3.5], [-0.01, 0.99, -2.0], [1e-5, 2e-5, 1.0]]))
    assert Homography.model_validate_json(H.model_dump_json()) == H


def test_detect_blank_image():
    blank = RasterImage(pixels=np.full((128, 128), 200, dtype=np.uint8))
    with pytest.raises(AlignmentError, match="featureless image"):
        detect_keypoints(blank)


def test_detect_rejects_tiny_image():
    with pytest.raises(ImageFormatError):
        detect_keypoints(RasterImage(pixels=np.zeros((32, 32), dtype=np.uint8)))


def test_detect_textured_image(texture):
    keypoints = detect_keypoints(texture)
    assert len(keypoints) >= 50
    assert all(np.linalg.norm(kp.descriptor) > 0 for kp in keypoints)


def test_detect_is_deterministic(texture):
    first = [(kp.x, kp.y) for kp in detect_keypoints(texture)]
    second = [(kp.x, kp.y) for kp in detect_keypoints(texture)]
    assert first == second


def test_detect_respects_keypoint_cap(texture):
    assert len(detect_keypoints(texture, AlignConfig(max_keypoints=40))) <= 40


def test_detect_accepts_colour(note):
    assert len(detect_keypoints(note.image)) > 0


def test_working_side_is_validated():
    with pytest.raises(ValidationError):
        AlignConfig(working_side=32)
    assert AlignConfig(working_side=0).working_side == 0


def test_detect_below_working_side_is_full_resolution(texture):
    full = detect_keypoints(texture, AlignConfig(working_side=0))
    capped = detect_keypoints(texture, AlignConfig(working_side=1024))
    assert [(kp.x, kp.y, kp.scale) for kp in full] == [(kp.x, kp.y, kp.scale) for kp in capped]


def test_shrunk_detection_reports_full_frame_positions():
    config = AlignConfig(working_side=320)
    reference = textured_image(640, 480, seed=9)
    ref_keypoints = detect_keypoints(reference, config)
    xs = np.array([kp.x for kp in ref_keypoints])
    ys = np.array([kp.y for kp in ref_keypoints])
    assert xs.max() > 400 and ys.max() > 300
    assert xs.min() >= -0.5 and xs.max() < 640 and ys.max() < 480

    shift = np.array([[1.0, 0.0, 12.0], [0.0, 1.0, -8.0], [0.0, 0.0, 1.0]])
    moved = warp_image(reference, shift)
    matches = match_descriptors(detect_keypoints(moved, config), ref_keypoints, config)
    estimate = estimate_homography(matches, config)
    points = np.array([[150.0, 120.0], [500.0, 380.0], [320.0, 240.0]])
    assert np.allclose(estimate.homography.apply(points), points - [12.0, -8.0], atol=1.5)


def test_rotation_is_matched(texture):
    rotated = RasterImage(pixels=np.rot90(texture.pixels))
    a = detect_keypoints(texture)
    b = detect_keypoints(rotated)
    matches = match_descriptors(a, b)
    assert len(matches) >= 0.6 * min(len(a), len(b))


def test_match_self_gives_identity(texture):
    keypoints = detect_keypoints(texture)
    matches = match_descriptors(keypoints, keypoints)
    assert len(matches) >= 0.9 * len(keypoints)
    assert all(m.src == m.dst and m.distance == 0 for m in matches)


def test_match_disjoint_random_descriptors(rng):
    a = keypoints_from(rng.random((50, 128)))
    b = keypoints_from(rng.random((50, 128)))
    with pytest.raises(AlignmentError, match="insufficient matches"):
        match_descriptors(a, b)


def test_match_empty_lists():
    with pytest.raises(AlignmentError):
        match_descriptors([], [])


@pytest.mark.parametrize("seed", range(100))
def test_match_equals_exhaustive_oracle(seed):
    rng = np.random.default_rng(seed)
    a = rng.random((30, 16))
    b = np.vstack([a[:20] + rng.normal(0, 0.05, size=(20, 16)), rng.random((20, 16))])
    b = b[rng.permutation(len(b))]
    config = AlignConfig(min_matches=4)
    matches = match_descriptors(keypoints_from(a), keypoints_from(b), config)
    found = [(int(m.src[0]), int(m.dst[0])) for m in matches]
    assert found == nn_match_oracle(a, b, config.ratio_test)


def test_identity_correspondences(rng):
    pts = rng.uniform(0, 500, size=(50, 2))
    estimate = estimate_homography(correspondences(pts, pts))
    assert np.allclose(estimate.homography.matrix, np.eye(3), atol=1e-6)
    assert estimate.inlier_count == 50


def test_recovers_homography_with_outliers(rng):
    H_true = random_homography(rng, 640, 480)
    src = rng.uniform(0, 640, size=(100, 2))
    dst = Homography(values=H_true).apply(src) + rng.normal(0, 0.2, size=(100, 2))
    outliers = rng.choice(100, size=30, replace=False)
    dst[outliers] = rng.uniform(0, 640, size=(30, 2))

    estimate = estimate_homography(correspondences(src, dst))
    inliers = np.ones(100, dtype=bool)
    inliers[outliers] = False
    clean = Homography(values=H_true).apply(src[inliers])
    error = np.linalg.norm(estimate.homography.apply(src[inliers]) - clean, axis=1)
    assert error.max() < 1.0
    assert not any(estimate.inliers[i] for i in outliers)


def test_estimate_ignores_correspondence_order(rng):
    H_true = random_homography(rng, 640, 480)
    src = rng.uniform(0, 640, size=(60, 2))
    dst = Homography(values=H_true).apply(src) + rng.normal(0, 0.5, size=(60, 2))
    dst[:15] = rng.uniform(0, 640, size=(15, 2))
    pairs = correspondences(src, dst)
    order = rng.permutation(len(pairs))

    first = estimate_homography(pairs)
    second = estimate_homography([pairs[i] for i in order])
    assert first.homography == second.homography
    assert [first.inliers[i] for i in order] == second.inliers


def test_three_correspondences_fail():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(AlignmentError, match="alignment failed"):
        estimate_homography(correspondences(pts, pts))


def test_random_correspondences_fail(rng):
    src = rng.uniform(0, 640, size=(40, 2))
    dst = rng.uniform(0, 640, size=(40, 2))
    with pytest.raises(AlignmentError, match="alignment failed"):
        estimate_homography(correspondences(src, dst))


def test_collinear_points_fail():
    pts = np.array([[float(i), 2.0 * i] for i in range(20)])
    with pytest.raises(AlignmentError, match="alignment failed"):
        estimate_homography(correspondences(pts, pts))


def test_warp_identity(note):
    warped = warp_to_reference(note.image, Homography.identity(), note.image.size)
    assert np.abs(warped.pixels.astype(int) - note.image.pixels.astype(int)).max() <= 1


def test_warp_translation_leaves_white_strip(note):
    shift = Homography(values=np.array([[1.0, 0, 10], [0, 1.0, 0], [0, 0, 1]]))
    warped = warp_to_reference(note.image, shift, note.image.size).pixels
    assert (warped[:, :10] == 255).all()
    assert np.array_equal(warped[:, 10:], note.image.pixels[:, :-10])


def test_warp_into_other_frame(note):
    warped = warp_to_reference(note.image, Homography.identity(), (100, 50))
    assert warped.size == (100, 50)


def test_warp_round_trip(wide_note, rng):
    size = wide_note.image.size
    H = random_homography(
        rng, *size, max_rotation=5, scale_range=(0.95, 1.05), max_translation=0.03
    )
    forward = Homography(values=H)
    smooth = RasterImage(pixels=cv2.GaussianBlur(np.array(wide_note.image.pixels), (0, 0), 2))
    back = warp_to_reference(warp_to_reference(smooth, forward, size), forward.inverse(), size)
    x, y, w, h = wide_note.bounds
    original = smooth.pixels[y : y + h, x : x + w].astype(int)
    restored = back.pixels[y : y + h, x : x + w].astype(int)
    assert np.abs(restored - original).mean() < 3


def test_warp_mask_nearest(note):
    warped = warp_mask(note.mask, Homography.identity(), note.image.size)
    assert warped == note.mask
    shift = Homography(values=np.array([[1.0, 0, 5], [0, 1.0, 0], [0, 0, 1]]))
    moved = warp_mask(BinaryMask.full(20, 10), shift, (20, 10))
    assert not moved.bits[:, :5].any() and moved.bits[:, 5:].all()


@pytest.mark.slow
def test_registration_sweep():
    config = AlignConfig(max_keypoints=2000)
    reference = textured_image(640, 480, seed=9)
    ref_keypoints = detect_keypoints(reference, config)
    rng = np.random.default_rng(2024)
    recovered = 0
    for _ in range(100):
        H_true = random_homography(rng, 640, 480)
        damaged = warp_image(reference, H_true)
        try:
            matches = match_descriptors(detect_keypoints(damaged, config), ref_keypoints, config)
            estimate = estimate_homography(matches, config)
        except AlignmentError:
            continue
        src = np.array([m.src for m, keep in zip(matches, estimate.inliers) if keep])
        truth = Homography(values=np.linalg.inv(H_true)).apply(src)
        error = np.linalg.norm(estimate.homography.apply(src) - truth, axis=1)
        recovered += error.mean() < 1.0
    assert recovered >= 95

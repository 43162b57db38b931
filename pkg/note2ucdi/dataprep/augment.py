import logging
import math
from typing import Optional, Tuple

import cv2
import numpy as np

from note2ucdi.dataprep.models import AugmentConfig
from note2ucdi.imgcore.models import RasterImage
from note2ucdi.imgcore.stats import to_uint8

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 10

Box = Tuple[int, int, int, int]  # top, left, height, width


def resize_square(pixels: np.ndarray, size: int) -> np.ndarray:
    return cv2.resize(pixels, (size, size), interpolation=cv2.INTER_LINEAR)


def _log_uniform(rng: np.random.Generator, bounds: Tuple[float, float]) -> float:
    return math.exp(rng.uniform(math.log(bounds[0]), math.log(bounds[1])))


def sample_crop_box(
    height: int, width: int, config: AugmentConfig, rng: np.random.Generator
) -> Box:
    """Crop covering crop_scale of the area, aspect jittered around the input's own."""
    area = height * width
    for _ in range(MAX_ATTEMPTS):
        target = rng.uniform(*config.crop_scale) * area
        aspect = _log_uniform(rng, config.crop_ratio) * width / height
        w = int(round(math.sqrt(target * aspect)))
        h = int(round(math.sqrt(target / aspect)))
        if 0 < w <= width and 0 < h <= height:
            top = int(rng.integers(0, height - h + 1))
            left = int(rng.integers(0, width - w + 1))
            return top, left, h, w
    return 0, 0, height, width


def sample_erase_box(
    height: int, width: int, config: AugmentConfig, rng: np.random.Generator
) -> Optional[Box]:
    """Rectangle whose rounded area fraction lies within config.erase_area, or None."""
    area = height * width
    lo, hi = config.erase_area
    for _ in range(MAX_ATTEMPTS):
        target = rng.uniform(lo, hi) * area
        aspect = _log_uniform(rng, config.erase_ratio)
        h = int(round(math.sqrt(target * aspect)))
        w = int(round(math.sqrt(target / aspect)))
        if not (0 < h < height and 0 < w < width):
            continue
        if not lo <= h * w / area <= hi:
            continue
        top = int(rng.integers(0, height - h + 1))
        left = int(rng.integers(0, width - w + 1))
        return top, left, h, w
    return None


def _rotate(pixels: np.ndarray, angle: float, fill: int) -> np.ndarray:
    h, w = pixels.shape[:2]
    matrix = cv2.getRotationMatrix2D(((w - 1) / 2.0, (h - 1) / 2.0), angle, 1.0)
    return cv2.warpAffine(
        pixels, matrix, (w, h), flags=cv2.INTER_LINEAR, borderValue=(fill,) * 3
    )


def _grayscale_float(pixels: np.ndarray) -> np.ndarray:
    rgb = pixels.astype(np.float64)
    return 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]


def _jitter(pixels: np.ndarray, config: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    brightness = rng.uniform(1 - config.brightness, 1 + config.brightness)
    contrast = rng.uniform(1 - config.contrast, 1 + config.contrast)
    saturation = rng.uniform(1 - config.saturation, 1 + config.saturation)
    hue = rng.uniform(-config.hue, config.hue)

    if brightness != 1.0:
        pixels = to_uint8(pixels.astype(np.float64) * brightness)
    if contrast != 1.0:
        mean = _grayscale_float(pixels).mean()
        pixels = to_uint8(mean + contrast * (pixels.astype(np.float64) - mean))
    if saturation != 1.0:
        gray = _grayscale_float(pixels)[:, :, None]
        pixels = to_uint8(gray + saturation * (pixels.astype(np.float64) - gray))
    if hue != 0.0:
        hsv = cv2.cvtColor(pixels, cv2.COLOR_RGB2HSV_FULL)
        shift = int(round(hue * 256))
        hsv[:, :, 0] = ((hsv[:, :, 0].astype(np.int32) + shift) % 256).astype(np.uint8)
        pixels = cv2.cvtColor(hsv, cv2.COLOR_HSV2RGB_FULL)
    return pixels


def _affine(pixels: np.ndarray, config: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    h, w = pixels.shape[:2]
    tx = rng.uniform(-config.translate, config.translate) * w
    ty = rng.uniform(-config.translate, config.translate) * h
    scale = rng.uniform(*config.affine_scale)
    shear = math.radians(rng.uniform(-config.shear_degrees, config.shear_degrees))
    if tx == 0 and ty == 0 and scale == 1.0 and shear == 0:
        return pixels

    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    linear = scale * np.array([[1.0, math.tan(shear)], [0.0, 1.0]])
    offset = np.array([cx + tx, cy + ty]) - linear @ np.array([cx, cy])
    matrix = np.hstack([linear, offset[:, None]])
    fill = (config.fill_value,) * 3
    return cv2.warpAffine(pixels, matrix, (w, h), flags=cv2.INTER_LINEAR, borderValue=fill)


def augment(
    img: RasterImage, config: Optional[AugmentConfig] = None, rng: Optional[np.random.Generator] = None
) -> RasterImage:
    """Training-time augmentation producing an output_size x output_size RGB image.

    Stages run in a fixed order: resized crop, rotation, horizontal flip, colour
    jitter, affine, random erasing. All randomness comes from rng.
    """
    config = config or AugmentConfig()
    rng = rng if rng is not None else np.random.default_rng(config.seed)

    pixels = np.array(img.pixels)
    if img.channels == 1:
        pixels = np.repeat(pixels[:, :, None], 3, axis=2)

    top, left, h, w = sample_crop_box(img.height, img.width, config, rng)
    pixels = resize_square(pixels[top : top + h, left : left + w], config.output_size)

    angle = rng.uniform(-config.rotation_degrees, config.rotation_degrees)
    if angle != 0:
        pixels = _rotate(pixels, angle, config.fill_value)

    if rng.random() < config.hflip_prob:
        pixels = pixels[:, ::-1]

    pixels = _jitter(np.ascontiguousarray(pixels), config, rng)
    pixels = _affine(pixels, config, rng)

    if rng.random() < config.erase_prob:
        box = sample_erase_box(config.output_size, config.output_size, config, rng)
        if box is None:
            logger.debug(
                "no erase box with area fraction in %s after %d attempts",
                config.erase_area,
                MAX_ATTEMPTS,
            )
        else:
            et, el, eh, ew = box
            pixels = pixels.copy()
            pixels[et : et + eh, el : el + ew] = config.erase_value

    return RasterImage(pixels=np.ascontiguousarray(pixels))

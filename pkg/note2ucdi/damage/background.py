from typing import Optional, Tuple

import numpy as np

from note2ucdi.damage.models import BackgroundConfig
from note2ucdi.exceptions import DamageError
from note2ucdi.imgcore.color import rgb_to_hsv
from note2ucdi.imgcore.models import BinaryMask, RasterImage
from note2ucdi.imgcore.morphology import morph_open_close


def foreground_mask(img: RasterImage, config: BackgroundConfig) -> BinaryMask:
    saturation = rgb_to_hsv(img).pixels[:, :, 1]
    mask = BinaryMask(bits=saturation > config.saturation_threshold)
    if config.morph_radius >= 1:
        mask = morph_open_close(mask, config.morph_radius)
    return mask


def remove_background(
    img: RasterImage, config: Optional[BackgroundConfig] = None
) -> Tuple[RasterImage, BinaryMask]:
    """Saturation-threshold the note off its background and paint the background white."""
    config = config or BackgroundConfig()
    mask = foreground_mask(img, config)
    if mask.area == 0:
        raise DamageError("no note detected")

    masked = np.where(mask.bits[:, :, None], img.pixels, np.uint8(255))
    return RasterImage(pixels=masked.astype(np.uint8)), mask

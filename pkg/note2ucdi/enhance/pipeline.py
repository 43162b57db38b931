import logging
from typing import Optional

from note2ucdi.enhance.contrast import clahe, contrast_stretch
from note2ucdi.enhance.filters import bilateral_filter, median_blur, sharpen
from note2ucdi.enhance.models import EnhanceConfig
from note2ucdi.imgcore.models import RasterImage

logger = logging.getLogger(__name__)


def enhance_pipeline(
    img: RasterImage, config: Optional[EnhanceConfig] = None
) -> RasterImage:
    """Dataset enhancement chain: median -> sharpen -> contrast stretch -> CLAHE."""
    config = config or EnhanceConfig()

    if config.median_enabled:
        img = median_blur(img, config.median_kernel)
    if config.sharpen_enabled:
        img = sharpen(img)
    if config.stretch_enabled:
        img = contrast_stretch(img, config)
    if config.clahe_enabled:
        img = clahe(img, config)

    logger.debug(
        "enhanced %dx%d image (median=%s sharpen=%s stretch=%s clahe=%s)",
        img.width,
        img.height,
        config.median_enabled,
        config.sharpen_enabled,
        config.stretch_enabled,
        config.clahe_enabled,
    )
    return img


def prepare_for_comparison(img: RasterImage, config: EnhanceConfig) -> RasterImage:
    """CLAHE then bilateral smoothing, applied to both notes before chromatic comparison."""
    return bilateral_filter(clahe(img, config), config)

import cv2
import numpy as np

from note2ucdi.enhance.models import EnhanceConfig
from note2ucdi.exceptions import EnhanceError
from note2ucdi.imgcore.models import RasterImage
from note2ucdi.imgcore.stats import to_uint8

SHARPEN_KERNEL = np.array(
    [
        [-1, -1, -1],
        [-1, 9, -1],
        [-1, -1, -1],
    ],
    dtype=np.float32,
)


def median_blur(img: RasterImage, k: int) -> RasterImage:
    """k x k median per channel; OpenCV replicates the border for medianBlur."""
    if k < 3 or k % 2 == 0:
        raise EnhanceError(f"median kernel must be odd and >= 3, got {k}")
    return RasterImage(pixels=cv2.medianBlur(np.array(img.pixels), k))


def sharpen(img: RasterImage) -> RasterImage:
    # the kernel is symmetric, so filter2D's correlation equals convolution
    response = cv2.filter2D(
        img.pixels.astype(np.float32),
        cv2.CV_32F,
        SHARPEN_KERNEL,
        borderType=cv2.BORDER_REPLICATE,
    )
    return RasterImage(pixels=to_uint8(response))


def bilateral_filter(img: RasterImage, config: EnhanceConfig) -> RasterImage:
    """Edge-preserving smoothing over a circular window of bilateral_diameter.

    Range weights use the L1 colour distance summed over channels.
    """
    filtered = cv2.bilateralFilter(
        np.array(img.pixels),
        config.bilateral_diameter,
        config.bilateral_sigma_color,
        config.bilateral_sigma_space,
        borderType=cv2.BORDER_REPLICATE,
    )
    return RasterImage(pixels=filtered)

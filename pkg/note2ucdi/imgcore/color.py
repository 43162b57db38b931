import warnings

import numpy as np
from skimage import color as skcolor

from note2ucdi.exceptions import ImageFormatError
from note2ucdi.imgcore.models import RasterImage
from note2ucdi.imgcore.stats import to_uint8

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _require_rgb(img: RasterImage) -> np.ndarray:
    if img.channels != 3:
        raise ImageFormatError("already grayscale")
    return img.pixels


def to_grayscale(img: RasterImage) -> RasterImage:
    rgb = _require_rgb(img).astype(np.float64)
    wr, wg, wb = LUMA_WEIGHTS
    luma = wr * rgb[:, :, 0] + wg * rgb[:, :, 1] + wb * rgb[:, :, 2]
    return RasterImage(pixels=to_uint8(luma))


def as_grayscale(img: RasterImage) -> RasterImage:
    """Grayscale view of any raster; single-channel input passes through."""
    return img if img.channels == 1 else to_grayscale(img)


def rgb_to_hsv(img: RasterImage) -> RasterImage:
    """Hexcone HSV with every channel scaled to 0-255 (hue 360 degrees -> 255)."""
    rgb = _require_rgb(img).astype(np.float64) / 255.0
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]

    maxc = rgb.max(axis=2)
    minc = rgb.min(axis=2)
    rangec = maxc - minc
    chromatic = rangec > 0

    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(chromatic, rangec / maxc, 0.0)
        rc = (maxc - r) / rangec
        gc = (maxc - g) / rangec
        bc = (maxc - b) / rangec

    h = np.where(
        r == maxc,
        bc - gc,
        np.where(g == maxc, 2.0 + rc - bc, 4.0 + gc - rc),
    )
    h = np.where(chromatic, np.mod(h / 6.0, 1.0), 0.0)

    hsv = np.stack([h * 255.0, s * 255.0, maxc * 255.0], axis=2)
    return RasterImage(pixels=to_uint8(hsv))


def rgb_to_lab(img: RasterImage) -> RasterImage:
    """CIE L*a*b* (D65) packed to 8 bits: L scaled 0-100 -> 0-255, a and b offset by 128."""
    rgb = _require_rgb(img)
    lab = skcolor.rgb2lab(rgb.astype(np.float64) / 255.0, illuminant="D65")
    packed = np.empty_like(lab)
    packed[:, :, 0] = lab[:, :, 0] * 255.0 / 100.0
    packed[:, :, 1] = lab[:, :, 1] + 128.0
    packed[:, :, 2] = lab[:, :, 2] + 128.0
    return RasterImage(pixels=to_uint8(packed))


def lab_to_rgb(img: RasterImage) -> RasterImage:
    packed = _require_rgb(img).astype(np.float64)
    lab = np.empty_like(packed)
    lab[:, :, 0] = packed[:, :, 0] * 100.0 / 255.0
    lab[:, :, 1] = packed[:, :, 1] - 128.0
    lab[:, :, 2] = packed[:, :, 2] - 128.0
    with warnings.catch_warnings():
        # out-of-gamut triples are clipped by skimage, which warns about it
        warnings.simplefilter("ignore", UserWarning)
        rgb = skcolor.lab2rgb(lab, illuminant="D65")
    return RasterImage(pixels=to_uint8(rgb * 255.0))

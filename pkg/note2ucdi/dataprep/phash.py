import cv2
import numpy as np
from scipy.fft import dctn

from note2ucdi.imgcore.color import as_grayscale
from note2ucdi.imgcore.models import RasterImage

HASH_SIZE = 8
RESIZE = 32


def phash64(img: RasterImage) -> int:
    """64-bit DCT perceptual hash.

    The 63 AC terms of the 8x8 low-frequency block (row-major, DC dropped) fill
    bits 63..1, each set when the coefficient exceeds their median. Bit 0 is
    always 0.
    """
    gray = np.array(as_grayscale(img).pixels)
    small = cv2.resize(gray, (RESIZE, RESIZE), interpolation=cv2.INTER_AREA)
    coeffs = dctn(small.astype(np.float64), type=2, norm="ortho")
    ac = coeffs[:HASH_SIZE, :HASH_SIZE].ravel()[1:]
    bits = ac > np.median(ac)

    h = 0
    for bit in bits:
        h = (h << 1) | int(bit)
    return h << 1


def hamming(a: int, b: int) -> int:
    return (a ^ b).bit_count()

import hashlib
import os
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from note2ucdi.exceptions import ImageReadError
from note2ucdi.imgcore.models import BinaryMask, RasterImage

PathLike = Union[str, "os.PathLike[str]"]

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")

# Pillow raises ValueError on some malformed headers and refuses oversized
# dimensions with DecompressionBombError.
_READ_ERRORS = (
    OSError,
    UnidentifiedImageError,
    Image.DecompressionBombError,
    ValueError,
)


def is_image_file(path: PathLike) -> bool:
    return Path(path).suffix.lower() in IMAGE_EXTENSIONS


def find_images(paths: Iterable[PathLike]) -> List[Path]:
    """Image files among paths, directories searched recursively, sorted."""
    found = set()
    for path in map(Path, paths):
        if path.is_dir():
            found.update(p for p in path.rglob("*") if p.is_file() and is_image_file(p))
        elif path.is_file() and is_image_file(path):
            found.add(path)
    return sorted(found)


def read_image(path: PathLike) -> RasterImage:
    """Decode a PNG/JPEG/BMP file into a 3-channel RGB raster."""
    try:
        with Image.open(path) as im:
            rgb = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except _READ_ERRORS as e:
        raise ImageReadError(f"cannot read image {path}: {e}")
    return RasterImage(pixels=rgb)


def write_image(img: RasterImage, path: PathLike) -> None:
    mode = "L" if img.channels == 1 else "RGB"
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(img.pixels), mode=mode).save(path)


def write_mask(mask: BinaryMask, path: PathLike) -> None:
    """Masks are stored as 1-bit PNG."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(mask.to_uint8(), mode="L").convert("1").save(path, format="PNG")


def read_mask(path: PathLike) -> BinaryMask:
    try:
        with Image.open(path) as im:
            bits = np.asarray(im.convert("L")) > 127
    except _READ_ERRORS as e:
        raise ImageReadError(f"cannot read mask {path}: {e}")
    return BinaryMask(bits=bits)


def file_digest(path: PathLike) -> str:
    """sha256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(1 << 20), b""):
                digest.update(chunk)
    except OSError as e:
        raise ImageReadError(f"cannot read {path}: {e}")
    return digest.hexdigest()

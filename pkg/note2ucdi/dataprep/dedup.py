import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from note2ucdi.dataprep.models import DedupConfig, DedupEntry, DedupIndex, DedupResult
from note2ucdi.dataprep.phash import phash64
from note2ucdi.exceptions import Note2UCDIException
from note2ucdi.imgcore.io import is_image_file, read_image

logger = logging.getLogger(__name__)

PathLike = Union[str, "os.PathLike[str]"]
HashFn = Callable[[str], int]


def hash_file(path: str) -> int:
    return phash64(read_image(path))


def scan_source(root: PathLike) -> Dict[str, List[str]]:
    """Class-per-subdirectory tree -> {class: image paths sorted by filename}."""
    root = Path(root)
    dataset: Dict[str, List[str]] = {}
    for class_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        files = sorted(
            (p for p in class_dir.iterdir() if p.is_file() and is_image_file(p)),
            key=lambda p: p.name,
        )
        dataset[class_dir.name] = [str(p) for p in files]
    return dataset


def _scan_order(dataset: Mapping[str, Sequence[PathLike]]) -> List[Tuple[str, str]]:
    ordered = []
    for label in sorted(dataset):
        paths = sorted((str(p) for p in dataset[label]), key=lambda p: (Path(p).name, p))
        ordered.extend((label, p) for p in paths)
    return ordered


def _safe_hash(hash_fn: HashFn, path: str) -> Tuple[Optional[int], Optional[str]]:
    try:
        return hash_fn(path), None
    except Note2UCDIException as e:
        return None, str(e)


def deduplicate(
    dataset: Mapping[str, Sequence[PathLike]],
    config: Optional[DedupConfig] = None,
    source: str = "",
    hash_fn: HashFn = hash_file,
) -> DedupResult:
    """Greedy per-class near-duplicate removal.

    Images are hashed in parallel, then scanned one class at a time in
    filename order; an image is kept unless a hash already kept for its class
    lies within config.threshold bits. Unreadable images are marked skipped.
    """
    config = config or DedupConfig()
    ordered = _scan_order(dataset)

    with ThreadPoolExecutor(max_workers=config.workers) as executor:
        hashes = list(
            tqdm(
                executor.map(lambda item: _safe_hash(hash_fn, item[1]), ordered),
                total=len(ordered),
                desc=f"hashing {source}".strip(),
                disable=None,
            )
        )

    index = DedupIndex()
    entries: List[DedupEntry] = []
    for (label, path), (h, error) in zip(ordered, hashes):
        entry = DedupEntry(path=path, label=label, source=source, hash=h)
        if h is None:
            entry.status = "skipped"
            entry.failure_reason = error
            logger.warning("skipping %s: %s", path, error)
        else:
            match = index.find_similar(label, h, config.threshold)
            if match is None:
                index.add(label, h, path)
            else:
                entry.status = "duplicate-of"
                entry.duplicate_of = match
        entries.append(entry)

    result = DedupResult(index=index, entries=entries)
    logger.info(
        "dedup %s: %d images, %d retained, %d skipped",
        source or "<dataset>",
        len(entries),
        len(result.retained),
        len(result.skipped),
    )
    return result


def cross_dataset_dedup(
    primary: DedupResult,
    others: Sequence[DedupResult],
    config: Optional[DedupConfig] = None,
) -> DedupResult:
    """Drop images of later sources that repeat a retained image of an earlier one.

    Sources take precedence in the order given; within a source the scan order
    of its own dedup pass is kept.
    """
    config = config or DedupConfig()
    index = DedupIndex()
    entries: List[DedupEntry] = []

    for entry in primary.entries:
        if entry.status == "retained" and entry.hash is not None:
            index.add(entry.label, entry.hash, entry.path)
        entries.append(entry.model_copy())

    for other in others:
        earlier = index.model_copy(deep=True)
        for entry in other.entries:
            entry = entry.model_copy()
            if entry.status == "retained" and entry.hash is not None:
                match = earlier.find_similar(entry.label, entry.hash, config.threshold)
                if match is None:
                    index.add(entry.label, entry.hash, entry.path)
                else:
                    entry.status = "duplicate-of"
                    entry.duplicate_of = match
            entries.append(entry)

    result = DedupResult(index=index, entries=entries)
    logger.info(
        "cross-source dedup over %d sources: %d retained",
        1 + len(others),
        len(result.retained),
    )
    return result

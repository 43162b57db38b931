import logging
from collections import defaultdict
from fractions import Fraction
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from note2ucdi.dataprep.models import DedupEntry, SplitManifest, SplitName

logger = logging.getLogger(__name__)

SPLITS: Tuple[SplitName, ...] = ("train", "val", "test")
MIN_CLASS_SIZE = 3


def allocate(n: int, ratios: Sequence[float]) -> List[int]:
    """Largest-remainder allocation of n items; ties go to the earlier split."""
    quotas = [n * Fraction(r).limit_denominator(10**6) for r in ratios]
    counts = [int(q) for q in quotas]
    remainders = sorted(
        range(len(quotas)), key=lambda i: (-(quotas[i] - counts[i]), i)
    )
    for i in remainders[: n - sum(counts)]:
        counts[i] += 1
    return counts


def group_retained(entries: Sequence[DedupEntry]) -> Dict[str, List[str]]:
    grouped: Dict[str, List[str]] = defaultdict(list)
    for entry in entries:
        if entry.status == "retained":
            grouped[entry.label].append(entry.path)
    return dict(grouped)


def stratified_split(
    dataset: Mapping[str, Sequence[str]],
    ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> SplitManifest:
    """Per-class seeded shuffle followed by largest-remainder train/val/test allocation."""
    rng = np.random.default_rng(seed)
    assignments: Dict[str, SplitName] = {}
    counts: Dict[str, Dict[SplitName, int]] = {}
    warnings: List[str] = []

    for label in sorted(dataset):
        ids = sorted(dataset[label])
        if len(ids) < MIN_CLASS_SIZE:
            message = f"class {label} has {len(ids)} images; all assigned to train"
            logger.warning(message)
            warnings.append(message)
            per_split = [len(ids), 0, 0]
        else:
            ids = [ids[i] for i in rng.permutation(len(ids))]
            per_split = allocate(len(ids), ratios)

        start = 0
        for split, count in zip(SPLITS, per_split):
            for image_id in ids[start : start + count]:
                assignments[image_id] = split
            start += count
        counts[label] = dict(zip(SPLITS, per_split))

    return SplitManifest(
        assignments=assignments,
        ratios=ratios,
        seed=seed,
        counts=counts,
        warnings=warnings,
    )

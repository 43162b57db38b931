import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from note2ucdi import __version__
from note2ucdi.damage.models import AnalysisConfig, DamageReport
from note2ucdi.dataprep.models import DedupEntry, DedupResult, DedupStatus, SplitManifest, SplitName

PathLike = Union[str, "os.PathLike[str]"]

REPORT_SCHEMA_VERSION = 1
MANIFEST_SCHEMA_VERSION = 1

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

VOLATILE_FIELDS = {"timestamp", "timings_ms"}


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class InputFile(BaseModel):
    path: str
    sha256: Optional[str] = None


class ReportDocument(BaseModel):
    """One analysis as written to disk. timestamp and timings_ms vary between runs."""

    schema_version: int = REPORT_SCHEMA_VERSION
    tool_version: str = __version__
    timestamp: Optional[str] = None
    status: Literal["ok", "unalignable", "error"]
    failure_reason: Optional[str] = None
    stage: Optional[str] = None
    reference: InputFile
    input: InputFile
    report: Optional[DamageReport] = None
    timings_ms: Optional[Dict[str, float]] = None
    config: AnalysisConfig = AnalysisConfig()

    def to_json(self, volatile: bool = True, indent: Optional[int] = None) -> str:
        exclude = None if volatile else VOLATILE_FIELDS
        return self.model_dump_json(exclude=exclude, indent=indent)


class Normalization(BaseModel):
    mean: Tuple[float, float, float] = IMAGENET_MEAN
    std: Tuple[float, float, float] = IMAGENET_STD


class ManifestEntry(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    path: str
    label: str = Field(alias="class")
    source: str = ""
    hash: Optional[str] = None  # 16 hex digits
    status: DedupStatus
    duplicate_of: Optional[str] = None
    failure_reason: Optional[str] = None
    split: Optional[SplitName] = None

    @classmethod
    def from_entry(cls, entry: DedupEntry) -> "ManifestEntry":
        return cls(
            path=entry.path,
            label=entry.label,
            source=entry.source,
            hash=entry.hash_hex,
            status=entry.status,
            duplicate_of=entry.duplicate_of,
            failure_reason=entry.failure_reason,
            split=entry.split,
        )


class SplitMetadata(BaseModel):
    ratios: Tuple[float, float, float]
    seed: int
    counts: Dict[str, Dict[SplitName, int]] = {}
    warnings: List[str] = []


class DedupManifest(BaseModel):
    schema_version: int = MANIFEST_SCHEMA_VERSION
    tool_version: str = __version__
    threshold: int
    sources: List[str]
    entries: List[ManifestEntry]
    split: Optional[SplitMetadata] = None
    normalization: Normalization = Normalization()

    @classmethod
    def from_result(
        cls, result: DedupResult, sources: List[str], threshold: int
    ) -> "DedupManifest":
        return cls(
            threshold=threshold,
            sources=sources,
            entries=[ManifestEntry.from_entry(e) for e in result.entries],
        )

    def retained(self) -> Dict[str, List[str]]:
        """Retained image paths grouped by class."""
        grouped: Dict[str, List[str]] = {}
        for entry in self.entries:
            if entry.status == "retained":
                grouped.setdefault(entry.label, []).append(entry.path)
        return grouped

    def with_split(self, split: SplitManifest) -> "DedupManifest":
        entries = [
            entry.model_copy(update={"split": split.assignments.get(entry.path)})
            for entry in self.entries
        ]
        return self.model_copy(
            update={
                "entries": entries,
                "split": SplitMetadata(
                    ratios=split.ratios,
                    seed=split.seed,
                    counts=split.counts,
                    warnings=split.warnings,
                ),
            }
        )

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


def write_text(path: PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def read_manifest(path: PathLike) -> DedupManifest:
    return DedupManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))

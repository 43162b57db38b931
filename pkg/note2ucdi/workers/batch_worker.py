import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from statistics import fmean
from typing import Dict, List, Optional, Union

from pydantic import BaseModel
from tqdm import tqdm

from note2ucdi.Note2UCDI import Note2UCDI, ReferenceTemplate
from note2ucdi.exceptions import ConfigError, Note2UCDIException, StageError
from note2ucdi.imgcore.io import file_digest, is_image_file, read_image
from note2ucdi.imgcore.models import RasterImage
from note2ucdi.reports.schemas import InputFile, ReportDocument, read_manifest, utc_timestamp

logger = logging.getLogger(__name__)

PathLike = Union[str, "os.PathLike[str]"]


class BatchItem(BaseModel):
    path: str
    label: str


class BatchSummary(BaseModel):
    total: int
    ok: int
    unalignable: int
    errors: int
    ucdi_mean: Optional[float] = None
    ucdi_min: Optional[float] = None
    ucdi_max: Optional[float] = None


def load_templates(path: PathLike) -> Dict[str, str]:
    """JSON object {class: reference image}; relative paths resolve against the map's folder."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read template map {path}: {e}")
    if not isinstance(raw, dict) or not all(isinstance(v, str) for v in raw.values()):
        raise ConfigError(f"template map {path} must map class names to image paths")
    return {
        label: str(ref if Path(ref).is_absolute() else path.parent / ref)
        for label, ref in raw.items()
    }


def collect_items(source: PathLike) -> List[BatchItem]:
    """Batch inputs from a class-per-subdirectory tree or a dedup manifest, sorted by path."""
    source = Path(source)
    items: List[BatchItem] = []
    if source.is_dir():
        for class_dir in sorted(p for p in source.iterdir() if p.is_dir()):
            items.extend(
                BatchItem(path=str(p), label=class_dir.name)
                for p in class_dir.iterdir()
                if p.is_file() and is_image_file(p)
            )
    elif source.is_file():
        manifest = read_manifest(source)
        for label, paths in manifest.retained().items():
            items.extend(BatchItem(path=p, label=label) for p in paths)
    else:
        raise ConfigError(f"batch input {source} does not exist")
    return sorted(items, key=lambda item: item.path)


def _input_file(path: str) -> InputFile:
    try:
        return InputFile(path=path, sha256=file_digest(path))
    except Note2UCDIException:
        return InputFile(path=path)


def build_report(
    engine: Note2UCDI,
    reference: Union[RasterImage, ReferenceTemplate],
    damaged: RasterImage,
    ref_path: str,
    input_path: str,
) -> ReportDocument:
    """Run one analysis and wrap it, or its failing stage, in a ReportDocument."""
    document = ReportDocument(
        timestamp=utc_timestamp(),
        status="error",
        reference=_input_file(ref_path),
        input=_input_file(input_path),
        config=engine.config,
    )
    try:
        report = engine.analyze(reference, damaged)
    except StageError as e:
        document.failure_reason = str(e.cause)
        document.stage = e.stage
        return document

    document.status = report.status
    document.failure_reason = report.failure_reason
    document.report = report
    document.timings_ms = report.timings_ms
    return document


def _error_document(
    engine: Note2UCDI, item: BatchItem, ref_path: Optional[str], reason: str, stage: str
) -> ReportDocument:
    return ReportDocument(
        timestamp=utc_timestamp(),
        status="error",
        failure_reason=reason,
        stage=stage,
        reference=InputFile(path=ref_path or ""),
        input=_input_file(item.path),
        config=engine.config,
    )


class BatchWorker:
    """Analyzes many notes against per-class reference templates on a thread pool."""

    def __init__(self, engine: Note2UCDI, templates: Dict[str, str], workers: int = 1) -> None:
        self._engine = engine
        self._templates = templates
        self._workers = max(1, workers)
        self._prepared: Dict[str, Union[ReferenceTemplate, str]] = {}

    def _prepare(self, labels: List[str]) -> None:
        for label in sorted(set(labels)):
            ref_path = self._templates.get(label)
            if ref_path is None:
                self._prepared[label] = f"no reference template for class {label}"
                continue
            try:
                self._prepared[label] = self._engine.prepare_reference(read_image(ref_path))
            except Note2UCDIException as e:
                logger.error("reference %s for class %s unusable: %s", ref_path, label, e)
                self._prepared[label] = f"reference template unusable: {e}"

    def run_item(self, item: BatchItem) -> ReportDocument:
        ref_path = self._templates.get(item.label)
        prepared = self._prepared[item.label]
        if isinstance(prepared, str):
            return _error_document(self._engine, item, ref_path, prepared, "reference")
        try:
            damaged = read_image(item.path)
        except Note2UCDIException as e:
            return _error_document(self._engine, item, ref_path, str(e), "read")
        return build_report(self._engine, prepared, damaged, str(ref_path), item.path)

    def run(self, items: List[BatchItem]) -> List[ReportDocument]:
        """Reports in the order of items, independent of the worker count."""
        self._prepare([item.label for item in items])
        with ThreadPoolExecutor(max_workers=self._workers) as executor:
            return list(
                tqdm(
                    executor.map(self.run_item, items),
                    total=len(items),
                    desc="analyzing",
                    disable=None,
                )
            )


def summarize(documents: List[ReportDocument]) -> BatchSummary:
    scores = [
        d.report.ucdi
        for d in documents
        if d.status == "ok" and d.report is not None and d.report.ucdi is not None
    ]
    return BatchSummary(
        total=len(documents),
        ok=sum(d.status == "ok" for d in documents),
        unalignable=sum(d.status == "unalignable" for d in documents),
        errors=sum(d.status == "error" for d in documents),
        ucdi_mean=fmean(scores) if scores else None,
        ucdi_min=min(scores) if scores else None,
        ucdi_max=max(scores) if scores else None,
    )
